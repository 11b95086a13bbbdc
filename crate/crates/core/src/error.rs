use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is singular to working precision (pivot {pivot} at column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    Asymmetric { asymmetry: f64 },

    #[error("matrix is not Hurwitz (spectral abscissa {abscissa})")]
    NotHurwitz { abscissa: f64 },

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not certified contractive at this resolution: worst measure {worst} at t={t}, x={x:?}")]
    NotContractive { worst: f64, t: f64, x: Vec<f64> },

    #[error("certification refused: {0}")]
    CertificationRefused(String),

    #[error("analytic certificate contradicted by sampling: analytic eta {analytic}, sampled {sampled}")]
    CertificateMismatch { analytic: f64, sampled: f64 },

    #[error("trajectory left the state box at t={t}: x={x:?}")]
    Escape { t: f64, x: Vec<f64> },

    #[error("period map did not converge within {iterations} periods (last step {last_step:e})")]
    OrbitNotConverged { iterations: usize, last_step: f64 },

    #[error("bound requires strict contraction (eta = {0})")]
    NonPositiveRate(f64),

    #[error("approximant orbit leaves the state box at t={t}: {x:?}")]
    KappaOutsideBox { t: f64, x: Vec<f64> },

    #[error("point outside the state box: {0:?}")]
    OutsideBox(Vec<f64>),

    #[error("period mismatch: {0} vs {1}")]
    PeriodMismatch(f64, f64),

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    /// True for errors caused by malformed input rather than the model itself.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NotSquare { .. }
                | Error::Asymmetric { .. }
                | Error::InvalidParameter(_)
                | Error::PeriodMismatch(..)
        )
    }
}
