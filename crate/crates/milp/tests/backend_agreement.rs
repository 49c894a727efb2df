//! Cross-backend agreement: the built-in simplex/branch-and-bound against an
//! external solver (HiGHS via the scipy shim) on the same IR.

use std::path::PathBuf;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rep2h_milp::branch_bound::{solve_builtin, BuiltinOpts};
use rep2h_milp::external::solve_external;
use rep2h_milp::{ExternalSolverCfg, LinExpr, ModelIR, ObjSense, Sense, SolStatus, VarKind};

fn shim_cfg() -> ExternalSolverCfg {
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../tools/lp_solve_scipy.py");
    ExternalSolverCfg::python_shim(script)
}

fn shim_available() -> bool {
    std::process::Command::new("python3")
        .args(["-c", "import scipy.optimize"])
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn random_lp(rng: &mut ChaCha8Rng, n: usize, m: usize, integers: usize) -> ModelIR {
    let mut ir = ModelIR::new(ObjSense::Maximize);
    let mut vars = Vec::new();
    for i in 0..n {
        let lo = rng.gen_range(-3.0..0.0f64).round();
        let hi = lo + rng.gen_range(1.0..8.0f64).round();
        let kind = if i < integers { VarKind::Integer } else { VarKind::Continuous };
        let v = ir.add_var(format!("x{i}"), lo, hi, kind).unwrap();
        ir.obj_add_coef(v, rng.gen_range(-5.0..5.0));
        vars.push(v);
    }
    for k in 0..m {
        let mut expr = LinExpr::new();
        for &v in &vars {
            if rng.gen_bool(0.7) {
                expr = expr.add(v, rng.gen_range(-4.0..4.0));
            }
        }
        if expr.terms.is_empty() {
            expr = expr.add(vars[0], 1.0);
        }
        let sense = match rng.gen_range(0..3) {
            0 => Sense::Le,
            1 => Sense::Ge,
            _ => Sense::Eq,
        };
        // Keep the rhs around the value at the box midpoint so feasibility
        // is likely but not guaranteed.
        let mid: f64 = expr
            .terms
            .iter()
            .map(|(v, c)| c * (ir.var(*v).lo + ir.var(*v).hi) / 2.0)
            .sum();
        let rhs = mid + rng.gen_range(-2.0..4.0);
        ir.add_row(format!("r{k}"), expr, sense, rhs).unwrap();
    }
    ir
}

#[test]
fn agreement_on_random_instances() {
    if !shim_available() {
        eprintln!("skipping: python3/scipy not available");
        return;
    }
    let cfg = shim_cfg();
    let builtin = BuiltinOpts { mip_rel_gap: 1e-9, ..BuiltinOpts::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut compared = 0;
    for case in 0..24 {
        let n = rng.gen_range(2..7);
        let m = rng.gen_range(1..6);
        let ints = if case % 2 == 0 { rng.gen_range(0..=n.min(3)) } else { 0 };
        let ir = random_lp(&mut rng, n, m, ints);
        let a = solve_builtin(&ir, &builtin).unwrap();
        let b = solve_external(&ir, &cfg).unwrap();
        match (a.status, b.status) {
            (SolStatus::Optimal, SolStatus::Optimal) => {
                let denom = a.objective.abs().max(1.0);
                let tol = if ints == 0 { 1e-8 } else { 1e-6 };
                assert!(
                    (a.objective - b.objective).abs() / denom <= tol,
                    "case {case}: builtin {} vs external {}",
                    a.objective,
                    b.objective
                );
                compared += 1;
            }
            (SolStatus::Infeasible, SolStatus::Infeasible) => {}
            (SolStatus::Unbounded, SolStatus::Unbounded) => {}
            (sa, sb) => panic!("case {case}: status disagreement {sa} vs {sb}"),
        }
    }
    assert!(compared >= 8, "too few optimal instances compared: {compared}");
}

#[test]
fn external_solves_trivial_lp() {
    if !shim_available() {
        eprintln!("skipping: python3/scipy not available");
        return;
    }
    let mut ir = ModelIR::new(ObjSense::Maximize);
    let x = ir.add_var("x", 0.0, f64::INFINITY, VarKind::Continuous).unwrap();
    ir.obj_add_coef(x, 1.0);
    ir.add_row("cap", LinExpr::var(x), Sense::Le, 3.0).unwrap();
    let s = solve_external(&ir, &shim_cfg()).unwrap();
    assert_eq!(s.status, SolStatus::Optimal);
    assert!((s.objective - 3.0).abs() < 1e-9);
    assert!((s.value(x) - 3.0).abs() < 1e-9);
}

#[test]
fn external_reports_infeasible() {
    if !shim_available() {
        eprintln!("skipping: python3/scipy not available");
        return;
    }
    let mut ir = ModelIR::new(ObjSense::Minimize);
    let x = ir.add_var("x", 0.0, 1.0, VarKind::Continuous).unwrap();
    ir.add_row("lo", LinExpr::var(x), Sense::Ge, 2.0).unwrap();
    let s = solve_external(&ir, &shim_cfg()).unwrap();
    assert_eq!(s.status, SolStatus::Infeasible);
}

#[test]
fn concurrent_external_solves_do_not_collide() {
    if !shim_available() {
        eprintln!("skipping: python3/scipy not available");
        return;
    }
    let cfg = shim_cfg();
    std::thread::scope(|scope| {
        for k in 0..4u32 {
            let cfg = cfg.clone();
            scope.spawn(move || {
                let mut ir = ModelIR::new(ObjSense::Maximize);
                let x = ir.add_var("x", 0.0, k as f64 + 1.0, VarKind::Continuous).unwrap();
                ir.obj_add_coef(x, 1.0);
                let s = solve_external(&ir, &cfg).unwrap();
                assert!((s.objective - (k as f64 + 1.0)).abs() < 1e-9);
            });
        }
    });
}
