use thiserror::Error;

/// Failures split by who is at fault: the caller (bad input) or the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HzError {
    #[error("{0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("flagged result refused in strict mode: {0}")]
    Strict(String),
}

impl HzError {
    pub fn pre(msg: impl Into<String>) -> Self {
        HzError::Precondition(msg.into())
    }

    pub fn inv(msg: impl Into<String>) -> Self {
        HzError::Invariant(msg.into())
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            HzError::Precondition(_) => 2,
            HzError::Strict(_) => 3,
            HzError::Invariant(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, HzError>;
