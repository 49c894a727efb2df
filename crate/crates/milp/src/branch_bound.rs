//! Built-in MILP solver: best-first branch and bound over the integrality-
//! constrained variables, with the dense-tableau simplex as node relaxation.
//!
//! Intended for small instances; the documented size envelope (roughly 50
//! free binaries/integers and 2000 continuous variables by default) is
//! enforced up front and larger models are refused with a pointer to the
//! external backend.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::ir::{ModelIR, ObjSense, Sense, SolStatus, Solution, VarKind};
use crate::simplex::{solve_lp, DenseLp, LpStatus, RowSense};
use crate::MilpError;

#[derive(Debug, Clone)]
pub struct BuiltinOpts {
    /// Cap on integrality-constrained variables that are not fixed by bounds.
    pub max_branch_ints: usize,
    /// Cap on continuous variables.
    pub max_continuous: usize,
    pub int_tol: f64,
    pub mip_rel_gap: f64,
    pub node_limit: usize,
    pub time_limit_s: f64,
    pub lp_iter_limit: usize,
}

impl Default for BuiltinOpts {
    fn default() -> Self {
        Self {
            max_branch_ints: 50,
            max_continuous: 2000,
            int_tol: 1e-6,
            mip_rel_gap: 1e-4,
            node_limit: 200_000,
            time_limit_s: 600.0,
            lp_iter_limit: 200_000,
        }
    }
}

struct Node {
    /// LP bound of the parent relaxation, in minimization units.
    bound: f64,
    /// Cumulative (var, lo, hi) overrides from the root.
    overrides: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; best-first on a minimization bound means
        // the smallest bound must surface first.
        other.bound.partial_cmp(&self.bound).unwrap_or(Ordering::Equal)
    }
}

fn to_dense_lp(ir: &ModelIR) -> DenseLp {
    let n = ir.n_vars();
    let flip = match ir.obj_sense() {
        ObjSense::Maximize => -1.0,
        ObjSense::Minimize => 1.0,
    };
    let (obj, _) = ir.objective();
    DenseLp {
        n,
        c: obj.iter().map(|c| flip * c).collect(),
        lo: ir.vars().iter().map(|v| v.lo).collect(),
        hi: ir.vars().iter().map(|v| v.hi).collect(),
        rows: ir
            .rows()
            .iter()
            .map(|r| {
                let terms: Vec<(usize, f64)> = r.terms.iter().map(|(v, c)| (v.0, *c)).collect();
                let sense = match r.sense {
                    Sense::Le => RowSense::Le,
                    Sense::Ge => RowSense::Ge,
                    Sense::Eq => RowSense::Eq,
                };
                (terms, sense, r.rhs)
            })
            .collect(),
    }
}

/// Solve a pure-MILP model (no cone rows, no quadratic objective) with the
/// built-in solver. Objective handling is done in minimization form
/// internally and flipped back on return.
pub fn solve_builtin(ir: &ModelIR, opts: &BuiltinOpts) -> Result<Solution, MilpError> {
    if !ir.cones().is_empty() {
        return Err(MilpError::Builtin(
            "cone rows present; outer-approximate before calling the built-in solver".into(),
        ));
    }
    if !ir.quad_obj().is_empty() {
        return Err(MilpError::Builtin(
            "quadratic objective present; linearize before calling the built-in solver".into(),
        ));
    }
    let stats = ir.stats();
    let branch_ints = ir.n_branching_ints();
    if branch_ints > opts.max_branch_ints {
        return Err(MilpError::SizeEnvelope {
            what: "branching integers",
            found: branch_ints,
            cap: opts.max_branch_ints,
        });
    }
    if stats.n_continuous > opts.max_continuous {
        return Err(MilpError::SizeEnvelope {
            what: "continuous variables",
            found: stats.n_continuous,
            cap: opts.max_continuous,
        });
    }

    let start = Instant::now();
    let base = to_dense_lp(ir);
    let (_, obj_offset) = ir.objective();
    let flip = match ir.obj_sense() {
        ObjSense::Maximize => -1.0,
        ObjSense::Minimize => 1.0,
    };
    let int_vars: Vec<usize> = ir
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| matches!(v.kind, VarKind::Binary | VarKind::Integer))
        .map(|(i, _)| i)
        .collect();

    let mut heap = BinaryHeap::new();
    heap.push(Node { bound: f64::NEG_INFINITY, overrides: Vec::new() });

    let mut incumbent: Option<(f64, Vec<f64>)> = None; // (min-form objective, x)
    let mut best_open_bound = f64::NEG_INFINITY;
    let mut nodes = 0usize;
    let mut hit_limit = false;
    let mut root_unbounded = false;

    while let Some(node) = heap.pop() {
        if nodes >= opts.node_limit || start.elapsed().as_secs_f64() > opts.time_limit_s {
            hit_limit = true;
            // Everything still open bounds the optimum.
            best_open_bound = node.bound;
            break;
        }
        if let Some((inc, _)) = &incumbent {
            if node.bound >= *inc - opts.mip_rel_gap * inc.abs().max(1.0) {
                continue; // cannot improve
            }
        }
        nodes += 1;

        let mut lp = base.clone();
        for (j, lo, hi) in &node.overrides {
            lp.lo[*j] = lp.lo[*j].max(*lo);
            lp.hi[*j] = lp.hi[*j].min(*hi);
            if lp.lo[*j] > lp.hi[*j] {
                // Empty box; prune without an LP solve.
                lp.rows.clear();
                lp.rows.push((vec![], RowSense::Ge, 1.0)); // 0 >= 1
            }
        }
        let rel = solve_lp(&lp, opts.lp_iter_limit)?;
        match rel.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if node.overrides.is_empty() {
                    root_unbounded = true;
                    break;
                }
                // A child relaxation unbounded with a feasible mixed-integer
                // restriction means the whole problem is unbounded as well.
                root_unbounded = true;
                break;
            }
            LpStatus::IterLimit => {
                return Err(MilpError::Builtin("simplex iteration limit reached".into()))
            }
            LpStatus::Optimal => {}
        }
        let bound = rel.objective;
        if let Some((inc, _)) = &incumbent {
            if bound >= *inc - opts.mip_rel_gap * inc.abs().max(1.0) {
                continue;
            }
        }

        // Most fractional branching variable.
        let mut branch: Option<(usize, f64, f64)> = None; // (var, value, frac distance)
        for &j in &int_vars {
            let v = rel.x[j];
            let frac = (v - v.round()).abs();
            if frac > opts.int_tol {
                let score = (v - v.floor() - 0.5).abs(); // smaller = more fractional
                match branch {
                    Some((_, _, s)) if s <= score => {}
                    _ => branch = Some((j, v, score)),
                }
            }
        }

        match branch {
            None => {
                // Integral point: candidate incumbent.
                let better = match &incumbent {
                    Some((inc, _)) => bound < *inc - 1e-12,
                    None => true,
                };
                if better {
                    let mut x = rel.x.clone();
                    for &j in &int_vars {
                        x[j] = x[j].round();
                    }
                    incumbent = Some((bound, x));
                }
            }
            Some((j, v, _)) => {
                let mut down = node.overrides.clone();
                down.push((j, f64::NEG_INFINITY, v.floor()));
                let mut up = node.overrides;
                up.push((j, v.ceil(), f64::INFINITY));
                heap.push(Node { bound, overrides: down });
                heap.push(Node { bound, overrides: up });
            }
        }
    }

    let wall = start.elapsed().as_secs_f64();
    if root_unbounded {
        return Ok(Solution {
            status: SolStatus::Unbounded,
            objective: match ir.obj_sense() {
                ObjSense::Maximize => f64::INFINITY,
                ObjSense::Minimize => f64::NEG_INFINITY,
            },
            assignment: Vec::new(),
            wall_time_s: wall,
            backend: "builtin".into(),
            gap: None,
        });
    }

    match incumbent {
        Some((obj_min, x)) => {
            let gap = if hit_limit {
                let denom = obj_min.abs().max(1.0);
                Some(((obj_min - best_open_bound) / denom).max(0.0))
            } else {
                Some(0.0)
            };
            Ok(Solution {
                status: if hit_limit { SolStatus::Limit } else { SolStatus::Optimal },
                objective: flip * obj_min + obj_offset,
                assignment: x,
                wall_time_s: wall,
                backend: "builtin".into(),
                gap,
            })
        }
        None => Ok(Solution {
            status: if hit_limit { SolStatus::Limit } else { SolStatus::Infeasible },
            objective: f64::NAN,
            assignment: Vec::new(),
            wall_time_s: wall,
            backend: "builtin".into(),
            gap: None,
        }),
    }
}
