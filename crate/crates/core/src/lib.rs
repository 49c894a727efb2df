//! Renewable power-to-hydrogen (ReP2H) planning engine.
//!
//! Physics and economics of a utility-scale hydrogen plant — alkaline
//! electrolyzers behind thyristor or IGBT rectifiers on a radial AC
//! collection grid — together with the two-stage stochastic investment
//! planner that sizes the electrolyzer fleet, the rectifier mix, and the
//! static var generator.
//!
//! Module map:
//! - [`elz`]: stack electrical/thermal/production models and their
//!   piecewise-linear surrogates.
//! - [`rectifier`]: TR and IGBT reactive-power characteristics and
//!   capability envelopes.
//! - [`grid`]: DistFlow branch-flow constraint blocks (second-order cone
//!   relaxation), OLTC, BES, renewable reactive capability, var
//!   compensation, and the post-solve physics verifier.
//! - [`scenario`]: typical-day clustering, price scenarios, uncertainty
//!   deviations, and weighted-IGDT weights.
//! - [`portfolio`]: objective/cost arithmetic, the extensive-form assembly,
//!   enumeration and solve drivers, the weighted-IGDT robust variant, and
//!   the progressive-hedging decomposition.
//! - [`config`]: the JSON system description all of the above is built from.

pub mod config;
pub mod elz;
pub mod grid;
pub mod portfolio;
pub mod rectifier;
pub mod scenario;
pub mod units;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("electrolyzer model: {0}")]
    Elz(String),
    #[error("rectifier model: {0}")]
    Rectifier(String),
    #[error("network model: {0}")]
    Grid(String),
    #[error("scenario engine: {0}")]
    Scenario(String),
    #[error("config: {0}")]
    Config(String),
    #[error("planner: {0}")]
    Planner(String),
    #[error("solver: {0}")]
    Milp(#[from] rep2h_milp::MilpError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
