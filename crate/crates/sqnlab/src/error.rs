//! Harness error type with process exit-code mapping.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad experiment spec or config file; maps to exit code 2.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Failure while executing or writing an experiment; maps to exit code 3.
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::InvalidConfig(_) => 2,
            HarnessError::Runtime(_) => 3,
        }
    }
}

impl From<sqn::Error> for HarnessError {
    fn from(err: sqn::Error) -> Self {
        match err {
            sqn::Error::InvalidConfig(msg) => HarnessError::InvalidConfig(msg),
            sqn::Error::InvalidStepsize(msg) => HarnessError::InvalidConfig(msg),
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(err: std::io::Error) -> Self {
        HarnessError::Runtime(format!("I/O: {err}"))
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
