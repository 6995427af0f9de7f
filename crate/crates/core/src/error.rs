use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    /// G(t) left the representable exponent range.
    #[error("overflow: G(t) exceeds {limit} at t = {t}")]
    Overflow { t: f64, limit: f64 },

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
