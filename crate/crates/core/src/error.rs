use thiserror::Error;

/// Errors produced by the channel, exponent, codec and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("output symbol {symbol} has zero probability under the input distribution")]
    ImpossibleOutput { symbol: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} did not converge after {iterations} iterations (gap {gap:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        gap: f64,
    },

    #[error("{what}: maximiser not bracketed, last bracket [{lo:e}, {hi:e}]")]
    LineSearch {
        what: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("search guard: {what} = {value:e} exceeds limit {limit:e}")]
    Guard {
        what: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("{count} sweep point(s) failed")]
    PointFailures { count: usize, code: i32 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } | Error::LineSearch { .. } => 3,
            Error::Io(_) | Error::Csv(_) => 4,
            Error::PointFailures { code, .. } => *code,
            _ => 2,
        }
    }
}
