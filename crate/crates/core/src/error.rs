use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),

    #[error("cannot parse surd from {0:?}")]
    ParseSurd(String),

    #[error("negative radicand {0}")]
    NegativeRadicand(String),

    #[error("dimension n = {0} is not supported here")]
    InvalidDimension(u32),

    #[error("quadratic form is degenerate (discriminant D = 0)")]
    DegenerateQuadratic,

    #[error("quadratic form is not positive definite: {0}")]
    NotConvex(String),

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: String },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("no built-in parameter row for n = {0}")]
    NoReferenceRow(u32),

    #[error("certificate is malformed: {0}")]
    MalformedCertificate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn out_of_range(what: &'static str, value: impl ToString) -> Error {
    Error::OutOfRange {
        what,
        value: value.to_string(),
    }
}
