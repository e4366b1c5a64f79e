//! Error type shared across the crate.
//!
//! Numerical anomalies are loud: anything that would silently degrade an
//! inequality check (non-finite density ratios, disconnected grid supports,
//! rejection loops that never accept) is an error, not a warning.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("grid mismatch: measures must share lo/hi/n")]
    GridMismatch,

    #[error("invalid grid measure: {0}")]
    InvalidGridMeasure(String),

    #[error("supports are disjoint (tv = 1), interpolation undefined")]
    DisjointSupports,

    #[error("non-finite density ratio at sample {index}")]
    NonFiniteDensityRatio { index: u64 },

    #[error("rejection sampler exceeded {rounds} rounds (acceptance too low for h)")]
    RejectionRoundsExceeded { rounds: u32 },

    #[error("proximal solve stalled at gradient norm {grad_norm:e} (tolerance {tol:e}) after {iters} iterations")]
    ProxNoConvergence { tol: f64, iters: u32, grad_norm: f64 },

    #[error("chain {chain} failed at step {step}: {source}")]
    ChainFailed {
        chain: usize,
        step: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("tv profile never reaches threshold {eps} within horizon {horizon}")]
    ThresholdNotReached { eps: f64, horizon: f64 },

    #[error("eigensolve failed: {0}")]
    EigensolveFailed(String),

    #[error("scenario parse error: {0}")]
    ScenarioParse(String),

    #[error("unknown scenario key: {0}")]
    UnknownKey(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
