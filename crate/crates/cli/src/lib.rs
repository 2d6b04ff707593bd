//! Command-line front end for `streamrisk`: oracle tables, closed-form
//! asymptotics and Monte-Carlo experiments written as CSV and SVG files.

pub mod commands;
pub mod config;
pub mod svg;
pub mod table;

use std::fmt;

/// A failure with its process exit code: 2 for usage or config problems,
/// 3 for failures while running.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Domain errors are caller mistakes; everything else happened at run time.
impl From<streamrisk::Error> for CliError {
    fn from(e: streamrisk::Error) -> Self {
        match e {
            streamrisk::Error::Domain(m) => Self::usage(m),
            other => Self::runtime(other.to_string()),
        }
    }
}
