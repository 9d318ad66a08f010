use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("player index {index} out of range for {n} players")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("matrix {0} is not positive definite")]
    NotPositiveDefinite(&'static str),
    #[error("matrix {0} is not positive semidefinite")]
    NotPositiveSemidefinite(&'static str),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("singular system (condition number {cond:.3e})")]
    SingularSystem { cond: f64 },
    #[error("no certificate found (best residual {best_residual:.3e})")]
    NotFound { best_residual: f64 },
    #[error("every certificate root lies on the positive-definite boundary")]
    CriticalPoint { roots: Vec<Vec<f64>> },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("inadmissible number of informed players: {0}")]
    Inadmissible(String),
    #[error("root not bracketed on ({lo}, {hi})")]
    RootNotBracketed { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
