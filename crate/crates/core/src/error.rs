use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum DgfcError {
    #[error("transition matrix is not stable (spectral radius {radius})")]
    Unstable { radius: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("filter covariance lost positive definiteness at t = {time}")]
    FilterBreakdown { time: usize },

    #[error("degenerate model: {0}")]
    Degenerate(String),

    #[error("identification failed: {0}")]
    Identification(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("sampler failure at iteration {iteration}: {message}")]
    Sampler { iteration: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("backtest aborted at origin {origin}: {source}")]
    Origin {
        origin: usize,
        #[source]
        source: Box<DgfcError>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DgfcError>;

impl DgfcError {
    /// Process exit code used by the command line tool.
    ///
    /// 2 for validation/input problems, 3 for numeric or sampler failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            DgfcError::Validation(_)
            | DgfcError::Parse { .. }
            | DgfcError::Contract(_)
            | DgfcError::Io(_) => 2,
            DgfcError::Origin { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}
