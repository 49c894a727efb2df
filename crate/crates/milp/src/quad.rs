//! Exact linearization of diagonal quadratic objective terms so that both
//! backends stay pure LP/MILP.
//!
//! - Binary `b`: `b^2 = b`.
//! - Bounded integer `v` in `[lo, hi]`: shift to `w = v - lo`, expand
//!   `w = sum 2^i b_i`, and write `w^2` with AND-linearized bit products.
//!   Exact on the whole integer lattice.
//! - Bounded continuous `v`: piecewise-linear square over the bound interval
//!   with a configurable breakpoint count (exact at breakpoints, chord error
//!   `width^2/4` per segment elsewhere).

use crate::ir::{LinExpr, ModelIR, Sense, VarKind};
use crate::pwl::{add_pwl_1d, PwlCurve};
use crate::MilpError;

/// Rewrite every `coef * v^2` objective term into linear form. Clears the
/// quadratic term list. `square_breaks` controls the PWL breakpoint count
/// for continuous variables (minimum 3).
pub fn linearize_quadratic_objective(
    ir: &mut ModelIR,
    square_breaks: usize,
) -> Result<(), MilpError> {
    let terms = std::mem::take(&mut ir.quad_obj);
    for (k, (v, coef)) in terms.into_iter().enumerate() {
        if coef == 0.0 {
            continue;
        }
        let var = ir.var(v).clone();
        if !var.lo.is_finite() || !var.hi.is_finite() {
            return Err(MilpError::Quad(var.name, "requires finite bounds".into()));
        }
        match var.kind {
            VarKind::Binary => {
                ir.obj_add_coef(v, coef);
            }
            VarKind::Integer => {
                let lo = var.lo.round();
                let span = (var.hi - var.lo).round();
                if span < 0.5 {
                    // Fixed integer: v^2 is a constant.
                    ir.obj_add_offset(coef * lo * lo);
                    continue;
                }
                let nbits = (span as u64 + 1).next_power_of_two().trailing_zeros().max(1) as usize;
                let mut bits = Vec::with_capacity(nbits);
                for i in 0..nbits {
                    bits.push(ir.add_binary(format!("qsq{k}_{}_b{i}", var.name))?);
                }
                // v = lo + sum 2^i b_i, with the expansion capped at span.
                let mut link = LinExpr::term(v, -1.0).offset(lo);
                let mut cap = LinExpr::new();
                for (i, b) in bits.iter().enumerate() {
                    let w = (1u64 << i) as f64;
                    link = link.add(*b, w);
                    cap = cap.add(*b, w);
                }
                ir.add_row(format!("qsq{k}_{}_link", var.name), link, Sense::Eq, 0.0)?;
                ir.add_row(format!("qsq{k}_{}_cap", var.name), cap, Sense::Le, span)?;
                // v^2 = lo^2 + 2 lo w + w^2; w^2 = sum 4^i b_i + 2 sum_{i<j} 2^{i+j} z_ij.
                ir.obj_add_offset(coef * lo * lo);
                for (i, b) in bits.iter().enumerate() {
                    let w = (1u64 << i) as f64;
                    ir.obj_add_coef(*b, coef * (2.0 * lo * w + w * w));
                }
                for i in 0..nbits {
                    for j in i + 1..nbits {
                        let z = ir.add_binary(format!("qsq{k}_{}_z{i}_{j}", var.name))?;
                        let (bi, bj) = (bits[i], bits[j]);
                        ir.add_row(
                            format!("qsq{k}_{}_and{i}_{j}_a", var.name),
                            LinExpr::term(z, 1.0).add(bi, -1.0),
                            Sense::Le,
                            0.0,
                        )?;
                        ir.add_row(
                            format!("qsq{k}_{}_and{i}_{j}_b", var.name),
                            LinExpr::term(z, 1.0).add(bj, -1.0),
                            Sense::Le,
                            0.0,
                        )?;
                        ir.add_row(
                            format!("qsq{k}_{}_and{i}_{j}_c", var.name),
                            LinExpr::term(z, 1.0).add(bi, -1.0).add(bj, -1.0),
                            Sense::Ge,
                            -1.0,
                        )?;
                        let w = (1u64 << (i + j + 1)) as f64;
                        ir.obj_add_coef(z, coef * w);
                    }
                }
            }
            VarKind::Continuous => {
                let n = square_breaks.max(3);
                let (lo, hi) = (var.lo, var.hi);
                if hi - lo <= 0.0 {
                    ir.obj_add_offset(coef * lo * lo);
                    continue;
                }
                let xs: Vec<f64> =
                    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
                let curve = PwlCurve::from_fn(xs, |x| x * x);
                let bound = lo.abs().max(hi.abs());
                let sq = ir.add_var(
                    format!("qsq{k}_{}_sq", var.name),
                    0.0,
                    bound * bound,
                    VarKind::Continuous,
                )?;
                add_pwl_1d(ir, &format!("qsq{k}_{}", var.name), v, sq, &curve)?;
                ir.obj_add_coef(sq, coef);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch_bound::{solve_builtin, BuiltinOpts};
    use crate::ir::{ModelIR, ObjSense, SolStatus};

    #[test]
    fn integer_square_exact_on_lattice() {
        // min (v - 3)^2 = v^2 - 6v + 9 over v in [0, 6] integer -> v = 3, obj 0.
        let mut ir = ModelIR::new(ObjSense::Minimize);
        let v = ir.add_var("v", 0.0, 6.0, VarKind::Integer).unwrap();
        ir.obj_add_quad(v, 1.0);
        ir.obj_add_coef(v, -6.0);
        ir.obj_add_offset(9.0);
        linearize_quadratic_objective(&mut ir, 5).unwrap();
        assert!(ir.quad_obj().is_empty());
        let s = solve_builtin(&ir, &BuiltinOpts::default()).unwrap();
        assert_eq!(s.status, SolStatus::Optimal);
        assert!((s.value(v) - 3.0).abs() < 1e-9);
        assert!(s.objective.abs() < 1e-9);
    }

    #[test]
    fn integer_square_with_shifted_bounds() {
        // min v^2 over v in [2, 5] -> 4 at v = 2.
        let mut ir = ModelIR::new(ObjSense::Minimize);
        let v = ir.add_var("v", 2.0, 5.0, VarKind::Integer).unwrap();
        ir.obj_add_quad(v, 1.0);
        linearize_quadratic_objective(&mut ir, 5).unwrap();
        let s = solve_builtin(&ir, &BuiltinOpts::default()).unwrap();
        assert!((s.objective - 4.0).abs() < 1e-9);
        assert!((s.value(v) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn binary_square_is_linear() {
        let mut ir = ModelIR::new(ObjSense::Minimize);
        let b = ir.add_binary("b").unwrap();
        ir.obj_add_quad(b, 2.0);
        ir.obj_add_coef(b, -3.0); // total: 2b^2 - 3b = -b at b=1
        linearize_quadratic_objective(&mut ir, 5).unwrap();
        let s = solve_builtin(&ir, &BuiltinOpts::default()).unwrap();
        assert!((s.objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn continuous_square_exact_at_breakpoints() {
        // min (w - 2)^2, w in [0, 4], breakpoints land on integers.
        let mut ir = ModelIR::new(ObjSense::Minimize);
        let w = ir.add_var("w", 0.0, 4.0, VarKind::Continuous).unwrap();
        ir.obj_add_quad(w, 1.0);
        ir.obj_add_coef(w, -4.0);
        ir.obj_add_offset(4.0);
        linearize_quadratic_objective(&mut ir, 5).unwrap();
        let s = solve_builtin(&ir, &BuiltinOpts::default()).unwrap();
        assert_eq!(s.status, SolStatus::Optimal);
        assert!(s.objective.abs() < 1e-9, "objective {}", s.objective);
        assert!((s.value(w) - 2.0).abs() < 1e-8);
    }

    #[test]
    fn infinite_bounds_rejected() {
        let mut ir = ModelIR::new(ObjSense::Minimize);
        let v = ir.add_var("v", 0.0, f64::INFINITY, VarKind::Continuous).unwrap();
        ir.obj_add_quad(v, 1.0);
        assert!(linearize_quadratic_objective(&mut ir, 5).is_err());
    }
}
