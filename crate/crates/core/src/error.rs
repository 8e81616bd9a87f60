use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is numerically singular")]
    SingularMatrix,
    #[error("principal block is singular; conditioning on a zero-mass set")]
    SingularBlock,
    #[error("interpolation residual {residual:e} exceeds tolerance")]
    IllConditioned { residual: f64 },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("negative mass {0:e} beyond roundoff tolerance")]
    NegativeMass(f64),
    #[error("probability {0} outside [0, 1] beyond roundoff tolerance")]
    ProbabilityOutOfRange(f64),
    #[error("conditioning event has zero mass")]
    ZeroConditional,
    #[error("cannot condition on a zero-mass set")]
    ZeroMassCondition,
    #[error("model has no support")]
    ZeroMass,
    #[error("no proposal accepted within the round budget")]
    RoundBudgetExceeded,
    #[error("batch rejected: fan-out budget exhausted")]
    BatchRejected,
    #[error("likelihood ratio {ratio} exceeds proven bound {bound}")]
    RatioBoundViolated { ratio: f64, bound: f64 },
    #[error("ground set of size {n} exceeds the cap of {cap}")]
    GroundSetTooLarge { n: usize, cap: usize },
    #[error("support sets have mixed sizes")]
    MixedSizes,
    #[error("support mismatch: q puts mass where p has none")]
    SupportMismatch,
    #[error("parameters have the wrong parity: {0}")]
    BadParity(String),
    #[error("graph is not planar")]
    NotPlanar,
    #[error("graph has an odd number of vertices")]
    OddVertexCount,
    #[error("graph has no perfect matching")]
    NoPerfectMatching,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
