//! Solver-agnostic optimization model: variables, linear rows, second-order
//! cone rows, and a linear (plus optional diagonal-quadratic) objective.
//!
//! A [`ModelIR`] is built by a single writer, then [`ModelIR::seal`]ed and
//! handed to a backend. Sealed models are immutable and safe to share across
//! threads.

use std::collections::HashMap;
use std::fmt;

use crate::MilpError;

/// Handle to a registered variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Handle to a registered linear row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowId(pub(crate) usize);

impl RowId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Handle to a registered second-order cone row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConeId(pub(crate) usize);

impl ConeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sense::Le => write!(f, "<="),
            Sense::Ge => write!(f, ">="),
            Sense::Eq => write!(f, "="),
        }
    }
}

/// Sparse affine expression `sum(coef * var) + constant`.
#[derive(Debug, Clone, Default)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(v: VarId) -> Self {
        Self { terms: vec![(v, 1.0)], constant: 0.0 }
    }

    pub fn term(v: VarId, coef: f64) -> Self {
        Self { terms: vec![(v, coef)], constant: 0.0 }
    }

    pub fn add(mut self, v: VarId, coef: f64) -> Self {
        self.terms.push((v, coef));
        self
    }

    pub fn offset(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn plus(mut self, other: &LinExpr) -> Self {
        self.terms.extend_from_slice(&other.terms);
        self.constant += other.constant;
        self
    }

    pub fn scaled(mut self, s: f64) -> Self {
        for (_, c) in &mut self.terms {
            *c *= s;
        }
        self.constant *= s;
        self
    }

    /// Merge duplicate variable terms and drop exact zeros.
    pub fn compact(mut self) -> Self {
        self.terms.sort_by_key(|(v, _)| *v);
        let mut out: Vec<(VarId, f64)> = Vec::with_capacity(self.terms.len());
        for (v, c) in self.terms {
            match out.last_mut() {
                Some((lv, lc)) if *lv == v => *lc += c,
                _ => out.push((v, c)),
            }
        }
        out.retain(|(_, c)| *c != 0.0);
        self.terms = out;
        self
    }

    pub fn eval(&self, assignment: &[f64]) -> f64 {
        self.terms.iter().map(|(v, c)| c * assignment[v.0]).sum::<f64>() + self.constant
    }
}

/// Linear row `terms (sense) rhs`. Constants from the source expression are
/// folded into the rhs at registration.
#[derive(Debug, Clone)]
pub struct LinRow {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinRow {
    /// Signed violation of the row at `assignment`: positive means violated.
    pub fn violation(&self, assignment: &[f64]) -> f64 {
        let lhs: f64 = self.terms.iter().map(|(v, c)| c * assignment[v.0]).sum();
        match self.sense {
            Sense::Le => lhs - self.rhs,
            Sense::Ge => self.rhs - lhs,
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Second-order cone row `|| args ||_2 <= bound`.
#[derive(Debug, Clone)]
pub struct ConeRow {
    pub name: String,
    pub args: Vec<LinExpr>,
    pub bound: LinExpr,
}

impl ConeRow {
    /// `||args(x)|| - bound(x)`; positive means violated.
    pub fn violation(&self, assignment: &[f64]) -> f64 {
        let norm = self
            .args
            .iter()
            .map(|a| {
                let v = a.eval(assignment);
                v * v
            })
            .sum::<f64>()
            .sqrt();
        norm - self.bound.eval(assignment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjSense {
    Maximize,
    Minimize,
}

/// Every big-M constant is recorded with the context that derived it so the
/// full list can be audited after assembly.
#[derive(Debug, Clone)]
pub struct BigMEntry {
    pub context: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unbounded,
    Limit,
}

impl fmt::Display for SolStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolStatus::Optimal => "optimal",
            SolStatus::Feasible => "feasible",
            SolStatus::Infeasible => "infeasible",
            SolStatus::Unbounded => "unbounded",
            SolStatus::Limit => "limit",
        };
        write!(f, "{s}")
    }
}

/// Result of a solve. `assignment` is indexed by `VarId` and covers every
/// variable when the status carries a point.
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolStatus,
    pub objective: f64,
    pub assignment: Vec<f64>,
    pub wall_time_s: f64,
    pub backend: String,
    /// Relative MIP gap at termination, when known.
    pub gap: Option<f64>,
}

impl Solution {
    pub fn value(&self, v: VarId) -> f64 {
        self.assignment[v.0]
    }

    pub fn has_point(&self) -> bool {
        matches!(self.status, SolStatus::Optimal | SolStatus::Feasible | SolStatus::Limit)
            && !self.assignment.is_empty()
    }
}

/// Aggregate counts used for model-size reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IrStats {
    pub n_vars: usize,
    pub n_continuous: usize,
    pub n_binary: usize,
    pub n_integer: usize,
    pub n_rows: usize,
    pub n_cones: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ModelIR {
    pub(crate) vars: Vec<Variable>,
    pub(crate) rows: Vec<LinRow>,
    pub(crate) cones: Vec<ConeRow>,
    pub(crate) obj_sense: Option<ObjSense>,
    /// Dense objective coefficients, indexed by VarId.
    pub(crate) obj: Vec<f64>,
    pub(crate) obj_offset: f64,
    /// Diagonal quadratic objective terms `coef * var^2`; must be linearized
    /// (see [`crate::quad`]) before either backend can solve.
    pub(crate) quad_obj: Vec<(VarId, f64)>,
    pub(crate) name_index: HashMap<String, VarId>,
    pub(crate) row_names: HashMap<String, RowId>,
    pub(crate) big_m_audit: Vec<BigMEntry>,
    sealed: bool,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl ModelIR {
    pub fn new(sense: ObjSense) -> Self {
        Self { obj_sense: Some(sense), ..Self::default() }
    }

    fn check_mutable(&self) -> Result<(), MilpError> {
        if self.sealed {
            return Err(MilpError::Sealed);
        }
        Ok(())
    }

    /// Register a variable. Names must be unique and LP-file safe
    /// (`[A-Za-z_][A-Za-z0-9_]*`).
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lo: f64,
        hi: f64,
        kind: VarKind,
    ) -> Result<VarId, MilpError> {
        self.check_mutable()?;
        let name = name.into();
        if !valid_name(&name) {
            return Err(MilpError::BadName(name));
        }
        if self.name_index.contains_key(&name) {
            return Err(MilpError::DuplicateName(name));
        }
        if lo > hi {
            return Err(MilpError::BadBounds { name, lo, hi });
        }
        let id = VarId(self.vars.len());
        self.name_index.insert(name.clone(), id);
        self.vars.push(Variable { name, lo, hi, kind });
        self.obj.push(0.0);
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, MilpError> {
        self.add_var(name, 0.0, 1.0, VarKind::Binary)
    }

    /// Register a linear row; the expression constant folds into the rhs.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        expr: LinExpr,
        sense: Sense,
        rhs: f64,
    ) -> Result<RowId, MilpError> {
        self.check_mutable()?;
        let name = name.into();
        if !valid_name(&name) {
            return Err(MilpError::BadName(name));
        }
        if self.row_names.contains_key(&name) {
            return Err(MilpError::DuplicateName(name));
        }
        let expr = expr.compact();
        for (v, _) in &expr.terms {
            if v.0 >= self.vars.len() {
                return Err(MilpError::UnknownVar(v.0));
            }
        }
        let id = RowId(self.rows.len());
        self.row_names.insert(name.clone(), id);
        self.rows.push(LinRow { name, terms: expr.terms, sense, rhs: rhs - expr.constant });
        Ok(id)
    }

    /// Register a second-order cone row `||args|| <= bound`.
    pub fn add_cone(
        &mut self,
        name: impl Into<String>,
        args: Vec<LinExpr>,
        bound: LinExpr,
    ) -> Result<ConeId, MilpError> {
        self.check_mutable()?;
        let name = name.into();
        if !valid_name(&name) {
            return Err(MilpError::BadName(name));
        }
        if args.is_empty() {
            return Err(MilpError::EmptyCone(name));
        }
        for e in args.iter().chain(std::iter::once(&bound)) {
            for (v, _) in &e.terms {
                if v.0 >= self.vars.len() {
                    return Err(MilpError::UnknownVar(v.0));
                }
            }
        }
        let id = ConeId(self.cones.len());
        self.cones.push(ConeRow {
            name,
            args: args.into_iter().map(LinExpr::compact).collect(),
            bound: bound.compact(),
        });
        Ok(id)
    }

    pub fn obj_add_coef(&mut self, v: VarId, coef: f64) {
        self.obj[v.0] += coef;
    }

    pub fn obj_add_expr(&mut self, expr: &LinExpr) {
        for (v, c) in &expr.terms {
            self.obj[v.0] += c;
        }
        self.obj_offset += expr.constant;
    }

    pub fn obj_add_offset(&mut self, c: f64) {
        self.obj_offset += c;
    }

    /// Add a diagonal quadratic objective term `coef * var^2`.
    pub fn obj_add_quad(&mut self, v: VarId, coef: f64) {
        self.quad_obj.push((v, coef));
    }

    pub fn record_big_m(&mut self, context: impl Into<String>, value: f64) {
        self.big_m_audit.push(BigMEntry { context: context.into(), value });
    }

    pub fn seal(&mut self) {
        self.sealed = true;
    }

    pub fn is_sealed(&self) -> bool {
        self.sealed
    }

    /// Clone into an unsealed copy for backend-side rewriting (cuts,
    /// quadratic linearization, node bounds).
    pub fn to_unsealed(&self) -> ModelIR {
        let mut ir = self.clone();
        ir.sealed = false;
        ir
    }

    pub fn obj_sense(&self) -> ObjSense {
        self.obj_sense.unwrap_or(ObjSense::Minimize)
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn var_mut_bounds(&mut self, id: VarId, lo: f64, hi: f64) {
        self.vars[id.0].lo = lo;
        self.vars[id.0].hi = hi;
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.name_index.get(name).copied()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn rows(&self) -> &[LinRow] {
        &self.rows
    }

    pub fn row(&self, id: RowId) -> &LinRow {
        &self.rows[id.0]
    }

    pub fn cones(&self) -> &[ConeRow] {
        &self.cones
    }

    pub fn cone(&self, id: ConeId) -> &ConeRow {
        &self.cones[id.0]
    }

    pub fn objective(&self) -> (&[f64], f64) {
        (&self.obj, self.obj_offset)
    }

    pub fn quad_obj(&self) -> &[(VarId, f64)] {
        &self.quad_obj
    }

    pub fn big_m_audit(&self) -> &[BigMEntry] {
        &self.big_m_audit
    }

    pub fn eval_objective(&self, assignment: &[f64]) -> f64 {
        let lin: f64 = self.obj.iter().zip(assignment).map(|(c, x)| c * x).sum();
        let quad: f64 =
            self.quad_obj.iter().map(|(v, c)| c * assignment[v.0] * assignment[v.0]).sum();
        lin + quad + self.obj_offset
    }

    pub fn stats(&self) -> IrStats {
        let mut n_binary = 0;
        let mut n_integer = 0;
        for v in &self.vars {
            match v.kind {
                VarKind::Binary => n_binary += 1,
                VarKind::Integer => n_integer += 1,
                VarKind::Continuous => {}
            }
        }
        IrStats {
            n_vars: self.vars.len(),
            n_continuous: self.vars.len() - n_binary - n_integer,
            n_binary,
            n_integer,
            n_rows: self.rows.len(),
            n_cones: self.cones.len(),
        }
    }

    /// Number of integrality-constrained variables that are not fixed by
    /// their bounds; this is what the built-in solver branches over.
    pub fn n_branching_ints(&self) -> usize {
        self.vars
            .iter()
            .filter(|v| {
                matches!(v.kind, VarKind::Binary | VarKind::Integer) && v.hi - v.lo > 1e-9
            })
            .count()
    }

    /// Max absolute violation over all linear rows.
    pub fn max_row_violation(&self, assignment: &[f64]) -> f64 {
        self.rows.iter().map(|r| r.violation(assignment).max(0.0)).fold(0.0, f64::max)
    }

    /// Max bound violation over all variables.
    pub fn max_bound_violation(&self, assignment: &[f64]) -> f64 {
        self.vars
            .iter()
            .zip(assignment)
            .map(|(v, &x)| (v.lo - x).max(x - v.hi).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Max deviation from integrality over integer/binary variables.
    pub fn max_integrality_violation(&self, assignment: &[f64]) -> f64 {
        self.vars
            .iter()
            .zip(assignment)
            .filter(|(v, _)| matches!(v.kind, VarKind::Binary | VarKind::Integer))
            .map(|(_, &x)| (x - x.round()).abs())
            .fold(0.0, f64::max)
    }

    /// Interval of an affine expression under current variable bounds.
    /// Used to derive big-M constants; errors if any bound involved is
    /// infinite.
    pub fn expr_range(&self, expr: &LinExpr, context: &str) -> Result<(f64, f64), MilpError> {
        let mut lo = expr.constant;
        let mut hi = expr.constant;
        for (v, c) in &expr.terms {
            let var = &self.vars[v.0];
            let (a, b) = if *c >= 0.0 {
                (c * var.lo, c * var.hi)
            } else {
                (c * var.hi, c * var.lo)
            };
            if !a.is_finite() || !b.is_finite() {
                return Err(MilpError::UnboundedBigM {
                    context: context.to_string(),
                    var: var.name.clone(),
                });
            }
            lo += a;
            hi += b;
        }
        Ok((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_validated() {
        let mut ir = ModelIR::new(ObjSense::Maximize);
        assert!(ir.add_var("x", 0.0, 1.0, VarKind::Continuous).is_ok());
        assert!(ir.add_var("x", 0.0, 1.0, VarKind::Continuous).is_err());
        assert!(ir.add_var("2bad", 0.0, 1.0, VarKind::Continuous).is_err());
        assert!(ir.add_var("has space", 0.0, 1.0, VarKind::Continuous).is_err());
    }

    #[test]
    fn row_constant_folds_into_rhs() {
        let mut ir = ModelIR::new(ObjSense::Minimize);
        let x = ir.add_var("x", 0.0, 10.0, VarKind::Continuous).unwrap();
        let r = ir
            .add_row("r", LinExpr::var(x).offset(3.0), Sense::Le, 5.0)
            .unwrap();
        assert_eq!(ir.row(r).rhs, 2.0);
    }

    #[test]
    fn expr_range_uses_bounds() {
        let mut ir = ModelIR::new(ObjSense::Minimize);
        let x = ir.add_var("x", -1.0, 2.0, VarKind::Continuous).unwrap();
        let y = ir.add_var("y", 0.0, 3.0, VarKind::Continuous).unwrap();
        let e = LinExpr::term(x, 2.0).add(y, -1.0).offset(1.0);
        let (lo, hi) = ir.expr_range(&e, "test").unwrap();
        assert_eq!(lo, 2.0 * -1.0 - 3.0 + 1.0);
        assert_eq!(hi, 2.0 * 2.0 - 0.0 + 1.0);
    }

    #[test]
    fn sealed_rejects_writes() {
        let mut ir = ModelIR::new(ObjSense::Minimize);
        ir.seal();
        assert!(matches!(
            ir.add_var("x", 0.0, 1.0, VarKind::Continuous),
            Err(MilpError::Sealed)
        ));
    }
}
