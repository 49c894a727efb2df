//! Independent numerical oracles used by the rep2h test suites.
//!
//! Everything here is deliberately self-contained (no dependency on the
//! production crates) so that oracle results cannot be contaminated by the
//! implementation they check.

pub mod sweep;

pub use sweep::{solve_radial_flow, RadialBranch, RadialNet, SweepSolution};
