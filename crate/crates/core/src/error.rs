use thiserror::Error;

/// Every failure the library reports. Numerical stages carry enough context
/// to diagnose the failure without rerunning.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypothesis violated ({regime} regime): {detail}")]
    Hypothesis {
        regime: &'static str,
        detail: String,
    },

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("quadrature did not reach tol {tol:e}: best {value} with err {err:e}")]
    Convergence { value: f64, err: f64, tol: f64 },

    #[error("spike configuration invalid: {0}")]
    Validity(String),

    #[error("window violated: {0}")]
    Window(String),

    #[error("ill-conditioned saddle system: {0}")]
    Conditioning(String),

    #[error("fixed point diverged after {iterations} iterations (increment {increment:e})")]
    Divergence { iterations: usize, increment: f64 },

    #[error("no convergence after {iterations} iterations (last increment {increment:e})")]
    NonConvergence { iterations: usize, increment: f64 },

    #[error("Newton left the box [{lo}, {hi}]: Lambda = {lambda:?}")]
    DomainEscape { lambda: Vec<f64>, lo: f64, hi: f64 },

    #[error("line search stagnated at gradient norm {grad_norm:e}")]
    Stagnation { grad_norm: f64 },

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("integration failed at r = {r}: {detail}")]
    Integration { r: f64, detail: String },

    #[error("no tower found: {0}")]
    NotFound(String),

    #[error("truncation inadequate: {0}")]
    Truncation(String),

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
