//! Piecewise-linear embeddings using the convex-combination (lambda)
//! formulation with one adjacency binary per segment (1-D) or per grid cell
//! (2-D). Output values are exact at every breakpoint.
//!
//! Several output variables can share one lambda system when they are
//! functions of the same argument(s); this keeps the binary count of large
//! assemblies down without losing breakpoint exactness.

use crate::ir::{LinExpr, ModelIR, RowId, VarId, VarKind};
use crate::MilpError;

/// A sampled 1-D curve: `y = f(x)` tabulated at strictly increasing
/// breakpoints.
#[derive(Debug, Clone)]
pub struct PwlCurve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PwlCurve {
    pub fn from_fn(x: Vec<f64>, f: impl Fn(f64) -> f64) -> Self {
        let y = x.iter().map(|&v| f(v)).collect();
        Self { x, y }
    }

    /// Linear interpolation; clamps outside the breakpoint range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.y[0];
        }
        if x >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let k = self.x.partition_point(|&b| b <= x).min(n - 1);
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        let t = (x - x0) / (x1 - x0);
        self.y[k - 1] * (1.0 - t) + self.y[k] * t
    }

    /// Max |f - interpolant| over a dense validation grid, together with the
    /// worst sample point.
    pub fn max_error(&self, f: impl Fn(f64) -> f64, samples: usize) -> (f64, f64) {
        let (a, b) = (self.x[0], *self.x.last().unwrap());
        let mut worst = (0.0, a);
        for i in 0..=samples {
            let x = a + (b - a) * i as f64 / samples as f64;
            let e = (f(x) - self.eval(x)).abs();
            if e > worst.0 {
                worst = (e, x);
            }
        }
        worst
    }
}

/// A sampled 2-D surface `y = f(x, t)` on a rectangular grid.
#[derive(Debug, Clone)]
pub struct PwlSurface {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    /// Row-major `values[i * t.len() + j] = f(x[i], t[j])`.
    pub values: Vec<f64>,
}

impl PwlSurface {
    pub fn from_fn(x: Vec<f64>, t: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(x.len() * t.len());
        for &xi in &x {
            for &tj in &t {
                values.push(f(xi, tj));
            }
        }
        Self { x, t, values }
    }

    pub fn value_at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.t.len() + j]
    }

    /// Bilinear interpolation on the cell containing (x, t); clamps outside.
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let clamp = |v: f64, lo: f64, hi: f64| v.max(lo).min(hi);
        let x = clamp(x, self.x[0], *self.x.last().unwrap());
        let t = clamp(t, self.t[0], *self.t.last().unwrap());
        let i = self.x.partition_point(|&b| b <= x).clamp(1, self.x.len() - 1);
        let j = self.t.partition_point(|&b| b <= t).clamp(1, self.t.len() - 1);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let (t0, t1) = (self.t[j - 1], self.t[j]);
        let u = (x - x0) / (x1 - x0);
        let w = (t - t0) / (t1 - t0);
        let f00 = self.value_at(i - 1, j - 1);
        let f01 = self.value_at(i - 1, j);
        let f10 = self.value_at(i, j - 1);
        let f11 = self.value_at(i, j);
        f00 * (1.0 - u) * (1.0 - w) + f01 * (1.0 - u) * w + f10 * u * (1.0 - w) + f11 * u * w
    }

    /// Max |f - interpolant| over a dense grid scan; returns the error, the
    /// worst sample, and the cell that contains it.
    pub fn max_error(
        &self,
        f: impl Fn(f64, f64) -> f64,
        nx: usize,
        nt: usize,
    ) -> SurfaceError {
        let (xa, xb) = (self.x[0], *self.x.last().unwrap());
        let (ta, tb) = (self.t[0], *self.t.last().unwrap());
        let mut worst = SurfaceError::default();
        for i in 0..=nx {
            let x = xa + (xb - xa) * i as f64 / nx as f64;
            for j in 0..=nt {
                let t = ta + (tb - ta) * j as f64 / nt as f64;
                let e = (f(x, t) - self.eval(x, t)).abs();
                if e > worst.error {
                    let ci = self.x.partition_point(|&b| b <= x).clamp(1, self.x.len() - 1) - 1;
                    let cj = self.t.partition_point(|&b| b <= t).clamp(1, self.t.len() - 1) - 1;
                    worst = SurfaceError { error: e, at: (x, t), cell: (ci, cj) };
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SurfaceError {
    pub error: f64,
    pub at: (f64, f64),
    pub cell: (usize, usize),
}

/// Handles to the variables created by a PWL embedding.
#[derive(Debug, Clone)]
pub struct PwlHandle {
    pub lambdas: Vec<VarId>,
    pub cells: Vec<VarId>,
    pub rows: Vec<RowId>,
}

fn check_breakpoints(xs: &[f64]) -> Result<(), MilpError> {
    if xs.len() < 2 {
        return Err(MilpError::BadPwl(format!("need at least 2 breakpoints, got {}", xs.len())));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MilpError::BadPwl("breakpoints must be strictly increasing".into()));
    }
    Ok(())
}

/// Embed `y_k = curve_k(x)` for one shared `x` over shared breakpoints.
/// All curves must be tabulated on identical x-breakpoints.
pub fn add_pwl_1d_multi(
    ir: &mut ModelIR,
    prefix: &str,
    x: VarId,
    outputs: &[(VarId, &PwlCurve)],
) -> Result<PwlHandle, MilpError> {
    let (first, rest) = outputs
        .split_first()
        .ok_or_else(|| MilpError::BadPwl("no outputs".into()))?;
    let xs = &first.1.x;
    check_breakpoints(xs)?;
    for (_, c) in rest {
        if c.x != *xs {
            return Err(MilpError::BadPwl("outputs tabulated on different breakpoints".into()));
        }
    }
    let n = xs.len();
    let mut lambdas = Vec::with_capacity(n);
    for k in 0..n {
        lambdas.push(ir.add_var(format!("{prefix}_lam{k}"), 0.0, 1.0, VarKind::Continuous)?);
    }
    let mut cells = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        cells.push(ir.add_binary(format!("{prefix}_seg{k}"))?);
    }
    let mut rows = Vec::new();

    let mut sum = LinExpr::new();
    for &l in &lambdas {
        sum = sum.add(l, 1.0);
    }
    rows.push(ir.add_row(format!("{prefix}_lamsum"), sum, crate::ir::Sense::Eq, 1.0)?);

    let mut xdef = LinExpr::term(x, -1.0);
    for (l, &xv) in lambdas.iter().zip(xs) {
        xdef = xdef.add(*l, xv);
    }
    rows.push(ir.add_row(format!("{prefix}_xdef"), xdef, crate::ir::Sense::Eq, 0.0)?);

    for (oi, (yvar, curve)) in outputs.iter().enumerate() {
        let mut ydef = LinExpr::term(*yvar, -1.0);
        for (l, &yv) in lambdas.iter().zip(&curve.y) {
            ydef = ydef.add(*l, yv);
        }
        rows.push(ir.add_row(format!("{prefix}_ydef{oi}"), ydef, crate::ir::Sense::Eq, 0.0)?);
    }

    // Adjacency: lambda_k may be nonzero only when an incident segment is
    // selected; exactly one segment active.
    let mut segsum = LinExpr::new();
    for &z in &cells {
        segsum = segsum.add(z, 1.0);
    }
    rows.push(ir.add_row(format!("{prefix}_segsum"), segsum, crate::ir::Sense::Eq, 1.0)?);
    for k in 0..n {
        let mut adj = LinExpr::term(lambdas[k], 1.0);
        if k > 0 {
            adj = adj.add(cells[k - 1], -1.0);
        }
        if k < n - 1 {
            adj = adj.add(cells[k], -1.0);
        }
        rows.push(ir.add_row(format!("{prefix}_adj{k}"), adj, crate::ir::Sense::Le, 0.0)?);
    }
    Ok(PwlHandle { lambdas, cells, rows })
}

/// Embed `y = curve(x)`.
pub fn add_pwl_1d(
    ir: &mut ModelIR,
    prefix: &str,
    x: VarId,
    y: VarId,
    curve: &PwlCurve,
) -> Result<PwlHandle, MilpError> {
    add_pwl_1d_multi(ir, prefix, x, &[(y, curve)])
}

/// Embed `y_k = surface_k(x, t)` for shared `(x, t)` over a shared
/// rectangular grid, with one adjacency binary per grid cell.
pub fn add_pwl_2d_multi(
    ir: &mut ModelIR,
    prefix: &str,
    x: VarId,
    t: VarId,
    outputs: &[(VarId, &PwlSurface)],
) -> Result<PwlHandle, MilpError> {
    let (first, rest) = outputs
        .split_first()
        .ok_or_else(|| MilpError::BadPwl("no outputs".into()))?;
    let (xs, ts) = (&first.1.x, &first.1.t);
    check_breakpoints(xs)?;
    check_breakpoints(ts)?;
    for (_, s) in rest {
        if s.x != *xs || s.t != *ts {
            return Err(MilpError::BadPwl("outputs tabulated on different grids".into()));
        }
    }
    let (nx, nt) = (xs.len(), ts.len());
    let mut lambdas = Vec::with_capacity(nx * nt);
    for i in 0..nx {
        for j in 0..nt {
            lambdas.push(ir.add_var(
                format!("{prefix}_lam{i}_{j}"),
                0.0,
                1.0,
                VarKind::Continuous,
            )?);
        }
    }
    let mut cells = Vec::with_capacity((nx - 1) * (nt - 1));
    for i in 0..nx - 1 {
        for j in 0..nt - 1 {
            cells.push(ir.add_binary(format!("{prefix}_cell{i}_{j}"))?);
        }
    }
    let lam = |i: usize, j: usize| lambdas[i * nt + j];
    let cell = |i: usize, j: usize| cells[i * (nt - 1) + j];
    let mut rows = Vec::new();

    let mut sum = LinExpr::new();
    for &l in &lambdas {
        sum = sum.add(l, 1.0);
    }
    rows.push(ir.add_row(format!("{prefix}_lamsum"), sum, crate::ir::Sense::Eq, 1.0)?);

    let mut xdef = LinExpr::term(x, -1.0);
    let mut tdef = LinExpr::term(t, -1.0);
    for i in 0..nx {
        for j in 0..nt {
            xdef = xdef.add(lam(i, j), xs[i]);
            tdef = tdef.add(lam(i, j), ts[j]);
        }
    }
    rows.push(ir.add_row(format!("{prefix}_xdef"), xdef, crate::ir::Sense::Eq, 0.0)?);
    rows.push(ir.add_row(format!("{prefix}_tdef"), tdef, crate::ir::Sense::Eq, 0.0)?);

    for (oi, (yvar, surf)) in outputs.iter().enumerate() {
        let mut ydef = LinExpr::term(*yvar, -1.0);
        for i in 0..nx {
            for j in 0..nt {
                ydef = ydef.add(lam(i, j), surf.value_at(i, j));
            }
        }
        rows.push(ir.add_row(format!("{prefix}_ydef{oi}"), ydef, crate::ir::Sense::Eq, 0.0)?);
    }

    let mut cellsum = LinExpr::new();
    for &z in &cells {
        cellsum = cellsum.add(z, 1.0);
    }
    rows.push(ir.add_row(format!("{prefix}_cellsum"), cellsum, crate::ir::Sense::Eq, 1.0)?);

    // Each grid point is incident to at most 4 cells.
    for i in 0..nx {
        for j in 0..nt {
            let mut adj = LinExpr::term(lam(i, j), 1.0);
            for ci in i.saturating_sub(1)..=i.min(nx - 2) {
                for cj in j.saturating_sub(1)..=j.min(nt - 2) {
                    adj = adj.add(cell(ci, cj), -1.0);
                }
            }
            rows.push(ir.add_row(
                format!("{prefix}_adj{i}_{j}"),
                adj,
                crate::ir::Sense::Le,
                0.0,
            )?);
        }
    }
    Ok(PwlHandle { lambdas, cells, rows })
}

/// Embed `y = surface(x, t)`.
pub fn add_pwl_2d(
    ir: &mut ModelIR,
    prefix: &str,
    x: VarId,
    t: VarId,
    y: VarId,
    surface: &PwlSurface,
) -> Result<PwlHandle, MilpError> {
    add_pwl_2d_multi(ir, prefix, x, t, &[(y, surface)])
}
