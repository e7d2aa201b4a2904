use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value in `{0}`")]
    NonFinite(&'static str),

    #[error("dimension mismatch in `{what}`: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("degenerate time grid: {0}")]
    DegenerateGrid(String),

    #[error("time {0} is not a grid point")]
    OffGrid(f64),

    #[error("quadrature failed to converge on [{a}, {b}]: {reason}")]
    Quadrature { a: f64, b: f64, reason: String },

    #[error("infinite second moment: {0}")]
    InfiniteSecondMoment(String),

    #[error("stochastic convolution is not integrable: {0}")]
    NotIntegrable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
