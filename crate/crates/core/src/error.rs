use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("matrix is not positive definite: pivot {pivot} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("singular linear system: pivot {pivot:e} below threshold {threshold:e}")]
    Singular { pivot: f64, threshold: f64 },

    #[error("moment fit failed: condition estimate {condition:e}, residual {residual:e}")]
    Fit { condition: f64, residual: f64 },

    #[error("moment order {0} is not supported (maximum is 3)")]
    UnsupportedOrder(usize),

    #[error("trial {index} failed: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate scenario (seed {seed}): {reason}")]
    DegenerateScenario { seed: u64, reason: String },

    #[error("relative error undefined: baseline capacity is zero but estimate is {0}")]
    UndefinedRelativeError(f64),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad caller input rather than runtime failure.
    pub fn is_parameter_error(&self) -> bool {
        match self {
            Error::Parameter(_) | Error::UnsupportedOrder(_) => true,
            Error::Trial { source, .. } => source.is_parameter_error(),
            _ => false,
        }
    }
}
