use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("window too short: need at least {need} indices, have {have}")]
    WindowTooShort { need: usize, have: usize },

    #[error("index {index} outside window [{lo}, {hi}]")]
    OutOfWindow { index: i64, lo: i64, hi: i64 },

    #[error("operation requires the orthonormal basis")]
    BasisMode,

    #[error("symbol support leaves the window; clipped indices {0:?}")]
    SupportOverflow(Vec<i64>),

    #[error("matrix does not commute with the operator: residual {0:.3e}")]
    NotInCommutant(f64),

    #[error("weight sequences overlap on {overlap} indices, need {required}")]
    InsufficientOverlap { overlap: usize, required: usize },

    #[error("eigenvalue clustering stayed ambiguous after {0} attempts")]
    AmbiguousClustering(usize),

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("structural failure: {0}")]
    Structure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
