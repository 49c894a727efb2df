//! Mixed-integer linear / second-order-cone modeling layer with two
//! interchangeable solve backends.
//!
//! - [`ir`]: the solver-agnostic model representation ([`ModelIR`]).
//! - [`pwl`]: piecewise-linear embeddings (lambda formulation with adjacency
//!   binaries) for 1-D curves and 2-D surfaces.
//! - [`cone`]: polyhedral outer approximation of second-order cones (static
//!   tangent cuts plus separation for iterative refinement).
//! - [`quad`]: exact linearization of diagonal quadratic objective terms
//!   (binary expansion for bounded integers, PWL for bounded continuous).
//! - [`simplex`] / [`branch_bound`]: the built-in dense-tableau solver.
//! - [`lpfile`]: LP text format writer and internal reader.
//! - [`external`]: subprocess bridge to an external solver speaking the LP
//!   format, e.g. HiGHS.
//! - [`backend`]: the common solve entry point, including the cone
//!   outer-approximation refinement loop.

pub mod backend;
pub mod branch_bound;
pub mod cone;
pub mod external;
pub mod ir;
pub mod lpfile;
pub mod pwl;
pub mod quad;
pub mod simplex;

pub use backend::{solve, Backend, ConeReport, SolveOpts, SolveOutcome};
pub use external::ExternalSolverCfg;
pub use ir::{
    BigMEntry, ConeId, ConeRow, IrStats, LinExpr, LinRow, ModelIR, ObjSense, RowId, Sense,
    SolStatus, Solution, VarId, VarKind, Variable,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("model is sealed; no further modification allowed")]
    Sealed,
    #[error("invalid identifier {0:?}: must match [A-Za-z_][A-Za-z0-9_]*")]
    BadName(String),
    #[error("duplicate identifier {0:?}")]
    DuplicateName(String),
    #[error("variable {name}: lower bound {lo} exceeds upper bound {hi}")]
    BadBounds { name: String, lo: f64, hi: f64 },
    #[error("expression references unknown variable index {0}")]
    UnknownVar(usize),
    #[error("cone {0} has no arguments")]
    EmptyCone(String),
    #[error("big-M derivation for {context}: variable {var} has an infinite bound")]
    UnboundedBigM { context: String, var: String },
    #[error("piecewise-linear input: {0}")]
    BadPwl(String),
    #[error("cone outer approximation: {0}")]
    BadCone(String),
    #[error(
        "instance exceeds the built-in solver envelope ({found} {what}, cap {cap}); \
         use the external backend"
    )]
    SizeEnvelope { what: &'static str, found: usize, cap: usize },
    #[error("built-in solver: {0}")]
    Builtin(String),
    #[error("external solver: {0}")]
    External(String),
    #[error("LP format: {0}")]
    LpFormat(String),
    #[error("quadratic objective on {0}: {1}")]
    Quad(String, String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
