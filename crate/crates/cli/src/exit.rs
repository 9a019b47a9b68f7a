//! Exit codes: 0 success, 1 other failures, 2 bad arguments, 3 size cap,
//! 4 missing data.

use std::fmt;

use gffmax_core::Error;

pub const FAILURE: i32 = 1;
pub const USAGE: i32 = 2;
pub const SIZE_CAP: i32 = 3;
pub const MISSING_DATA: i32 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: USAGE, message: message.into() }
    }

    pub fn missing(message: impl Into<String>) -> Self {
        Self { code: MISSING_DATA, message: message.into() }
    }

    pub fn other(message: impl Into<String>) -> Self {
        Self { code: FAILURE, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::DenseCapExceeded { .. } | Error::BudgetExceeded { .. } => SIZE_CAP,
            Error::InvalidBox(_)
            | Error::LevelOutOfRange { .. }
            | Error::InvalidArgument(_)
            | Error::NonConsecutiveLevels { .. }
            | Error::ResumeMismatch { .. } => USAGE,
            _ => FAILURE,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::other(e.to_string())
    }
}
