use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("unsupported damping regime: {0}")]
    UnsupportedRegime(String),

    #[error("degenerate packet width at t = {t}")]
    DegenerateWidth { t: f64 },

    #[error("eigenbasis is singular at t = {t} (a2 = {a2:e})")]
    SingularEigenbasis { t: f64, a2: f64 },

    #[error("numerical oracle failed: {0}")]
    OracleFailure(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::ParameterDomain(msg.into())
}
