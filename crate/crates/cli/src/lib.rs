//! Scenario runner behind the `circlesym` binary.
//!
//! Exit codes: 0 pass, 1 a check failed, 2 the request was refused (class
//! outside the cone, unsupported manifold), 64 bad flags, 65 malformed or
//! invalid config, 66 missing input file, 74 I/O error.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod curves;
mod modes;
pub mod scenarios;

pub use config::{CurveSpec, FlowConfig, Mode, Numerics, Scenario, ScenarioConfig};
pub use modes::run;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_REFUSED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{origin}: {message}")]
    Config { origin: String, message: String },
    #[error("{}: no such file", .0.display())]
    Missing(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config { .. } => EXIT_DATA,
            CliError::Missing(_) => EXIT_NO_INPUT,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Failed,
    Refused,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => EXIT_PASS,
            Status::Failed => EXIT_FAILED,
            Status::Refused => EXIT_REFUSED,
        }
    }
}

/// Outcome of one scenario: status, a one-line summary, and the files written.
#[derive(Clone, Debug)]
pub struct Report {
    pub status: Status,
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}
