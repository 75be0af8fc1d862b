use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point is not a fixed point of the map (|F(x) - x| = {residual:.3e})")]
    NotAFixedPoint { residual: f64 },

    #[error("eigen decomposition residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    EigenResidual { residual: f64, tolerance: f64 },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("operator does not commute with exp(-i pi Jy) (commutator max-norm {norm:.3e})")]
    ParityViolation { norm: f64 },

    #[error("state is not normalized (norm {norm})")]
    Unnormalized { norm: f64 },

    #[error("only {usable} usable spacings, need at least {required}")]
    TooFewSpacings { usable: usize, required: usize },

    #[error("checkpoint version mismatch: file has version {found}, this build reads {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt file: {0}")]
    Corrupt(String),

    #[error("checkpoint was written for a different scan specification")]
    SpecMismatch,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(err: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(err.to_string())
    }
}
