use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("undefined variance: within- and between-imputation variance are both zero")]
    UndefinedVariance,

    #[error("replicate {rep} still degenerate after {attempts} redraws")]
    RedrawLimit { rep: u64, attempts: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
