//! Polyhedral outer approximation of second-order cone rows.
//!
//! A cone `||a(x)||_2 <= b(x)` admits the valid inequality `u . a(x) <= b(x)`
//! for every unit direction `u` (Cauchy-Schwarz), so any finite direction set
//! yields a relaxation that never cuts off a true cone point. With a
//! direction set of covering radius `delta` the relaxation permits at most
//! `||a|| <= b / cos(delta)`, so the relative violation of any admitted point
//! is bounded by `1/cos(delta) - 1`.
//!
//! Cones with 1, 2, or 3 arguments are supported, which covers apparent-power
//! disks and the DistFlow relaxation. Separation cuts at an incumbent point
//! drive the violation to solver tolerance in a refinement loop (see
//! [`crate::backend`]).

use crate::ir::{ConeId, ConeRow, LinExpr, ModelIR, RowId, Sense};
use crate::MilpError;

/// Unit directions on the circle, including antipodal pairs when `n` is even.
pub fn directions_2d(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            [th.cos(), th.sin()]
        })
        .collect()
}

/// Unit directions on the sphere: `n_phi` polar rings (poles included) with
/// `n_theta` azimuthal samples each. Poles are emitted once.
pub fn directions_3d(n_theta: usize, n_phi: usize) -> Vec<[f64; 3]> {
    let mut dirs = Vec::new();
    for j in 0..n_phi {
        let phi = std::f64::consts::PI * j as f64 / (n_phi - 1) as f64;
        let (sp, cp) = (phi.sin(), phi.cos());
        if sp.abs() < 1e-12 {
            dirs.push([0.0, 0.0, cp.signum()]);
            continue;
        }
        for i in 0..n_theta {
            let th = 2.0 * std::f64::consts::PI * i as f64 / n_theta as f64;
            dirs.push([sp * th.cos(), sp * th.sin(), cp]);
        }
    }
    dirs
}

/// Worst-case relative violation `1/cos(delta) - 1` for the emitted grids.
pub fn violation_bound_2d(n: usize) -> f64 {
    1.0 / (std::f64::consts::PI / n as f64).cos() - 1.0
}

pub fn violation_bound_3d(n_theta: usize, n_phi: usize) -> f64 {
    let dphi = std::f64::consts::PI / (n_phi - 1) as f64 / 2.0;
    let dth = std::f64::consts::PI / n_theta as f64;
    let delta = (dphi * dphi + dth * dth).sqrt();
    if delta >= std::f64::consts::FRAC_PI_2 {
        f64::INFINITY
    } else {
        1.0 / delta.cos() - 1.0
    }
}

fn plan_directions(dim: usize, tol: f64) -> Result<Vec<Vec<f64>>, MilpError> {
    if tol <= 0.0 {
        return Err(MilpError::BadCone(format!("tolerance must be positive, got {tol}")));
    }
    match dim {
        1 => Ok(vec![vec![1.0], vec![-1.0]]),
        2 => {
            let mut n = 8usize;
            while violation_bound_2d(n) > tol {
                n *= 2;
                if n > 1 << 20 {
                    return Err(MilpError::BadCone(format!("tolerance {tol} needs too many cuts")));
                }
            }
            Ok(directions_2d(n).into_iter().map(|d| d.to_vec()).collect())
        }
        3 => {
            let mut n = 8usize;
            while violation_bound_3d(n, n / 2 + 1) > tol {
                n *= 2;
                if n > 1 << 12 {
                    return Err(MilpError::BadCone(format!("tolerance {tol} needs too many cuts")));
                }
            }
            Ok(directions_3d(n, n / 2 + 1).into_iter().map(|d| d.to_vec()).collect())
        }
        d => Err(MilpError::BadCone(format!("unsupported cone dimension {d} (max 3)"))),
    }
}

fn cut_expr(cone: &ConeRow, dir: &[f64]) -> (LinExpr, f64) {
    // u.a(x) - b(x) <= 0, constants folded to the rhs.
    let mut expr = LinExpr::new();
    for (u, a) in dir.iter().zip(&cone.args) {
        expr = expr.plus(&a.clone().scaled(*u));
    }
    expr = expr.plus(&cone.bound.clone().scaled(-1.0));
    let rhs = -expr.constant;
    expr.constant = 0.0;
    (expr, rhs)
}

/// Add static tangent cuts for a registered cone so that any point admitted
/// by the cuts violates the true cone by at most `tol` (relative).
pub fn cone_outer_approx(
    ir: &mut ModelIR,
    cone_id: ConeId,
    tol: f64,
) -> Result<Vec<RowId>, MilpError> {
    let cone = ir.cone(cone_id).clone();
    let dirs = plan_directions(cone.args.len(), tol)?;
    let mut rows = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let (expr, rhs) = cut_expr(&cone, &dir);
        let name = format!("{}_oa{}", cone.name, rows.len());
        rows.push(ir.add_row(name, expr, Sense::Le, rhs)?);
    }
    Ok(rows)
}

/// Separating direction at `point` if the cone is violated by more than
/// `tol` (absolute on the norm residual). Returns the unit direction.
pub fn separate(cone: &ConeRow, point: &[f64], tol: f64) -> Option<Vec<f64>> {
    let a: Vec<f64> = cone.args.iter().map(|e| e.eval(point)).collect();
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b = cone.bound.eval(point);
    if norm - b <= tol || norm <= 0.0 {
        return None;
    }
    Some(a.iter().map(|v| v / norm).collect())
}

/// Add one separation cut at `point` if violated; returns the new row.
pub fn add_separation_cut(
    ir: &mut ModelIR,
    cone_id: ConeId,
    point: &[f64],
    tol: f64,
) -> Result<Option<RowId>, MilpError> {
    let cone = ir.cone(cone_id).clone();
    match separate(&cone, point, tol) {
        None => Ok(None),
        Some(dir) => {
            let (expr, rhs) = cut_expr(&cone, &dir);
            let name = format!("{}_sep{}", cone.name, ir.rows().len());
            Ok(Some(ir.add_row(name, expr, Sense::Le, rhs)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{ModelIR, ObjSense, VarKind};

    fn disk_ir() -> (ModelIR, ConeId) {
        let mut ir = ModelIR::new(ObjSense::Maximize);
        let p = ir.add_var("p", -10.0, 10.0, VarKind::Continuous).unwrap();
        let q = ir.add_var("q", -10.0, 10.0, VarKind::Continuous).unwrap();
        let c = ir
            .add_cone(
                "disk",
                vec![LinExpr::var(p), LinExpr::var(q)],
                LinExpr::constant(5.0),
            )
            .unwrap();
        (ir, c)
    }

    #[test]
    fn boundary_point_violates_no_cut() {
        let (mut ir, c) = disk_ir();
        let rows = cone_outer_approx(&mut ir, c, 1e-3).unwrap();
        // (3,4) on the boundary of the radius-5 disk.
        let x = vec![3.0, 4.0];
        for r in rows {
            assert!(ir.row(r).violation(&x) <= 1e-12, "cut {} cuts a cone point", r.index());
        }
    }

    #[test]
    fn violated_point_separates() {
        let (ir, c) = disk_ir();
        let x = vec![4.0, 4.0]; // norm 5.66 > 5, ~13% violation
        let dir = separate(ir.cone(c), &x, 0.05 * 5.0).unwrap();
        // The cut must cut the point off: u.a > b.
        let ua: f64 = dir[0] * 4.0 + dir[1] * 4.0;
        assert!(ua > 5.0);
    }

    #[test]
    fn bound_formula_is_monotone() {
        assert!(violation_bound_2d(64) < violation_bound_2d(16));
        assert!(violation_bound_3d(32, 17) < violation_bound_3d(8, 5));
    }
}
