use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("torus side length must be an even integer >= 2, got {0}")]
    OddSide(usize),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("degenerate stiffness ratio: kappa_O == kappa_D makes r infinite")]
    DegenerateRatio,

    #[error("duality requires kappa_O * kappa_D = 1 (rescale the field), got {0}")]
    Normalization(f64),

    #[error("configuration violates its space constraints: {0}")]
    Constraint(String),

    #[error("empty region")]
    EmptyRegion,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures that indicate a numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotPositiveDefinite { .. })
    }
}
