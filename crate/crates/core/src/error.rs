use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Lipschitz constant required")]
    MissingLipschitz,

    #[error("constant viscous damping required for saddle guarantee")]
    NonConstantGamma,

    #[error("gamma schedule has no derivative; the explicit-damping reformulation needs it")]
    MissingGammaDerivative,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("divergence detected at iteration {0}")]
    Divergence(usize),

    #[error("excluded by hypothesis β≠1/c")]
    ExcludedCoincidence,

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("nonpositive distance at sample {0}")]
    NonPositiveDistance(usize),

    #[error("asymmetric matrix: entry ({0}, {1}) differs from its transpose")]
    Asymmetric(usize, usize),

    #[error("objective has no Hessian")]
    MissingHessian,

    #[error("pgm parse error at byte {offset}: {message}")]
    Pgm { offset: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
