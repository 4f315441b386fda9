//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("degeneracy error: {0}")]
    Degeneracy(String),

    #[error("validation error: {invariant} (witness: {witness})")]
    Validation { invariant: String, witness: String },

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("evaluation error: {0}")]
    Eval(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
    pub fn singular(msg: impl Into<String>) -> Self {
        Error::Singularity(msg.into())
    }
    pub fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }
    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degeneracy(msg.into())
    }
    pub fn validation(invariant: impl Into<String>, witness: impl Into<String>) -> Self {
        Error::Validation {
            invariant: invariant.into(),
            witness: witness.into(),
        }
    }
    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
