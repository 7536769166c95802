//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by model construction, sampling, region building, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical or configuration parameter is out of its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A rejection sampler exceeded its retry budget.
    #[error("rejection sampling for hypothesis {hypothesis} exhausted {tries} tries")]
    RejectionExhausted { hypothesis: usize, tries: usize },

    /// The sample clouds are not covered by the requested grid extent.
    #[error("grid covers only {covered:.4} of samples, need >= {required}")]
    GridCoverage { covered: f64, required: f64 },

    /// Boundary refinement hit the sweep cap without reaching a fixpoint.
    #[error("refinement did not converge within {cap} sweeps")]
    NoConvergence { cap: usize },

    /// A log, region, or config file failed to parse.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// A versioned file carries an unsupported format tag.
    #[error("unsupported file version: expected {expected:?}, found {found:?}")]
    Version { expected: String, found: String },

    /// Configuration file or flag contents are invalid.
    #[error("config error: {0}")]
    Config(String),

    /// Inputs to an operation are structurally inconsistent.
    #[error("{0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
