//! Subprocess bridge to an external MILP solver.
//!
//! The model is written in LP text format (see [`crate::lpfile`]), the solver
//! is invoked with templated arguments, and its solution file is parsed. The
//! accepted solution-file grammar is the HiGHS plain-text style:
//!
//! ```text
//! Model status
//! Optimal
//!
//! # Primal solution values
//! Feasible
//! Objective 123.456
//! # Columns 3
//! x 1
//! y 0.5
//! z 0
//! # Rows 2
//! ...
//! ```
//!
//! Only the status word, the `Objective` line, and the `# Columns` block are
//! consumed; everything else is ignored. The solver command and arguments
//! come from [`ExternalSolverCfg`]; the `REP2H_SOLVER_PATH` and
//! `REP2H_SOLVER_ARGS` environment variables override them, so a deployment
//! can point at `highs`, a wrapper script, or any compatible CLI without
//! touching config files. Argument templates expand `{model}`, `{solution}`,
//! `{gap}`, and `{time_limit}`.
//!
//! Each invocation runs in its own temporary directory, so concurrent solves
//! never collide.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use crate::ir::{ModelIR, SolStatus, Solution};
use crate::lpfile::write_lp;
use crate::MilpError;

pub const SOLVER_PATH_ENV: &str = "REP2H_SOLVER_PATH";
pub const SOLVER_ARGS_ENV: &str = "REP2H_SOLVER_ARGS";

#[derive(Debug, Clone)]
pub struct ExternalSolverCfg {
    pub command: PathBuf,
    /// Argument template; `{model}`, `{solution}`, `{gap}`, `{time_limit}`
    /// are substituted per call.
    pub args: Vec<String>,
    pub mip_rel_gap: f64,
    pub time_limit_s: f64,
}

impl Default for ExternalSolverCfg {
    fn default() -> Self {
        Self {
            command: PathBuf::from("highs"),
            args: vec![
                "{model}".into(),
                "--solution_file".into(),
                "{solution}".into(),
            ],
            mip_rel_gap: 1e-6,
            time_limit_s: 600.0,
        }
    }
}

impl ExternalSolverCfg {
    /// Configuration for a Python CLI shim speaking the same contract
    /// (e.g. `tools/lp_solve_scipy.py`, which solves via scipy's HiGHS).
    pub fn python_shim(script: impl Into<PathBuf>) -> Self {
        Self {
            command: PathBuf::from("python3"),
            args: vec![
                script.into().to_string_lossy().into_owned(),
                "{model}".into(),
                "--solution_file".into(),
                "{solution}".into(),
                "--mip-gap".into(),
                "{gap}".into(),
            ],
            ..Self::default()
        }
    }

    /// Apply `REP2H_SOLVER_PATH` / `REP2H_SOLVER_ARGS` overrides.
    pub fn with_env_overrides(mut self) -> Self {
        if let Ok(p) = std::env::var(SOLVER_PATH_ENV) {
            if !p.trim().is_empty() {
                self.command = PathBuf::from(p);
            }
        }
        if let Ok(a) = std::env::var(SOLVER_ARGS_ENV) {
            if !a.trim().is_empty() {
                self.args = a.split_whitespace().map(str::to_string).collect();
            }
        }
        self
    }
}

/// Parsed contents of a solution file.
#[derive(Debug, Clone)]
pub struct ParsedSolutionFile {
    pub status: SolStatus,
    pub objective: Option<f64>,
    pub values: Vec<(String, f64)>,
}

/// Parse a HiGHS-style plain-text solution file.
pub fn parse_solution_file(text: &str) -> Result<ParsedSolutionFile, MilpError> {
    let mut status: Option<SolStatus> = None;
    let mut objective = None;
    let mut values = Vec::new();
    let mut lines = text.lines().peekable();
    let mut expect_status = false;
    let mut in_columns: Option<usize> = None;

    while let Some(raw) = lines.next() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.eq_ignore_ascii_case("model status") {
            expect_status = true;
            continue;
        }
        if expect_status {
            expect_status = false;
            let lower = line.to_ascii_lowercase();
            status = Some(if lower.contains("optimal") {
                SolStatus::Optimal
            } else if lower.contains("infeasible") {
                SolStatus::Infeasible
            } else if lower.contains("unbounded") {
                SolStatus::Unbounded
            } else if lower.contains("limit") || lower.contains("interrupt") {
                SolStatus::Limit
            } else if lower.contains("feasible") {
                SolStatus::Feasible
            } else {
                return Err(MilpError::External(format!("unknown model status {line:?}")));
            });
            continue;
        }
        if let Some(rest) = line.strip_prefix("Objective") {
            objective = Some(rest.trim().parse::<f64>().map_err(|_| {
                MilpError::External(format!("unparsable objective line {line:?}"))
            })?);
            continue;
        }
        if let Some(rest) = line.strip_prefix("# Columns") {
            let n: usize = rest.trim().parse().map_err(|_| {
                MilpError::External(format!("unparsable column count {line:?}"))
            })?;
            in_columns = Some(n);
            continue;
        }
        if let Some(remaining) = in_columns {
            if remaining == 0 || line.starts_with('#') {
                in_columns = None;
                continue;
            }
            let mut it = line.split_whitespace();
            let name = it.next().unwrap_or_default();
            let val: f64 = it
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| MilpError::External(format!("bad column line {line:?}")))?;
            values.push((name.to_string(), val));
            in_columns = Some(remaining - 1);
        }
    }
    let status =
        status.ok_or_else(|| MilpError::External("solution file has no model status".into()))?;
    Ok(ParsedSolutionFile { status, objective, values })
}

/// Write the model as LP text, run the configured solver, and parse its
/// solution. The returned objective is recomputed from the assignment (plus
/// the IR objective offset) and cross-checked against the solver's report.
pub fn solve_external(ir: &ModelIR, cfg: &ExternalSolverCfg) -> Result<Solution, MilpError> {
    let start = Instant::now();
    let lp_text = write_lp(ir)?;
    let dir = tempfile::Builder::new()
        .prefix("rep2h-solve-")
        .tempdir()
        .map_err(|e| MilpError::External(format!("tempdir: {e}")))?;
    let model_path = dir.path().join("model.lp");
    let solution_path = dir.path().join("model.sol");
    std::fs::write(&model_path, &lp_text)?;

    let args: Vec<String> = cfg
        .args
        .iter()
        .map(|a| {
            a.replace("{model}", &model_path.to_string_lossy())
                .replace("{solution}", &solution_path.to_string_lossy())
                .replace("{gap}", &format!("{}", cfg.mip_rel_gap))
                .replace("{time_limit}", &format!("{}", cfg.time_limit_s))
        })
        .collect();

    let output = Command::new(&cfg.command).args(&args).output().map_err(|e| {
        MilpError::External(format!("failed to launch {:?}: {e}", cfg.command))
    })?;
    if !output.status.success() {
        return Err(MilpError::External(format!(
            "{:?} exited with {}; stdout: {} stderr: {}",
            cfg.command,
            output.status,
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        )));
    }
    let sol_text = std::fs::read_to_string(&solution_path).map_err(|e| {
        MilpError::External(format!(
            "no solution file at {:?}: {e}; solver stdout: {}",
            solution_path,
            String::from_utf8_lossy(&output.stdout)
        ))
    })?;
    let parsed = parse_solution_file(&sol_text)?;

    let mut solution = Solution {
        status: parsed.status,
        objective: f64::NAN,
        assignment: Vec::new(),
        wall_time_s: start.elapsed().as_secs_f64(),
        backend: "external".into(),
        gap: None,
    };
    if matches!(parsed.status, SolStatus::Infeasible | SolStatus::Unbounded) {
        return Ok(solution);
    }

    let mut assignment = vec![0.0; ir.n_vars()];
    let mut seen = vec![false; ir.n_vars()];
    for (name, val) in &parsed.values {
        match ir.lookup(name) {
            Some(v) => {
                assignment[v.index()] = *val;
                seen[v.index()] = true;
            }
            None => {
                return Err(MilpError::External(format!(
                    "solution names unknown variable {name:?}"
                )))
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(MilpError::External(format!(
            "solution file is missing variable {:?}",
            ir.vars()[missing].name
        )));
    }

    // Status mismatch guard: a claimed-feasible point must satisfy the rows.
    let row_viol = ir.max_row_violation(&assignment);
    let bound_viol = ir.max_bound_violation(&assignment);
    let scale = assignment.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    if row_viol > 1e-5 * scale || bound_viol > 1e-5 * scale {
        return Err(MilpError::External(format!(
            "solver reported {} but the point violates rows by {row_viol:.3e} \
             and bounds by {bound_viol:.3e}",
            parsed.status
        )));
    }

    let recomputed = ir.eval_objective(&assignment);
    if let Some(reported) = parsed.objective {
        let denom = reported.abs().max(1.0);
        if (recomputed - reported).abs() / denom > 1e-5 {
            return Err(MilpError::External(format!(
                "objective mismatch: solver reported {reported}, recomputed {recomputed}"
            )));
        }
    }
    solution.objective = recomputed;
    solution.assignment = assignment;
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_highs_style_file() {
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 7.5\n# Columns 2\nx 3\ny 4.5e-1\n# Rows 1\nr0 3.45\n";
        let p = parse_solution_file(text).unwrap();
        assert_eq!(p.status, SolStatus::Optimal);
        assert_eq!(p.objective, Some(7.5));
        assert_eq!(p.values.len(), 2);
        assert_eq!(p.values[1], ("y".to_string(), 0.45));
    }

    #[test]
    fn parses_infeasible() {
        let p = parse_solution_file("Model status\nInfeasible\n").unwrap();
        assert_eq!(p.status, SolStatus::Infeasible);
    }

    #[test]
    fn rejects_statusless_file() {
        assert!(parse_solution_file("Objective 3\n").is_err());
    }
}
