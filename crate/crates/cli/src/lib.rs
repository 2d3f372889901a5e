//! Front end of the cornermass laboratory: run configs, the report envelope,
//! the command pipelines and the golden regression suite.

pub mod commands;
pub mod config;
pub mod envelope;
pub mod finite;
pub mod golden;
pub mod regress;

use cornermass::corner::CornerError;
use cornermass::extension::ExtensionError;
use cornermass::geometry::GeometryError;
use cornermass::harmonic::HarmonicError;
use cornermass::masses::MassError;
use thiserror::Error;

pub use commands::{run, Command, Outcome, RunOptions, Table};
pub use config::{ConfigError, RunConfig};
pub use envelope::{ReportEnvelope, SCHEMA_VERSION};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const VERDICT_FAIL: u8 = 1;
    pub const CONFIG_ERROR: u8 = 2;
    pub const NUMERICAL_FAILURE: u8 = 3;
}

/// Failures of a command run.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("non-finite value in report at {0}")]
    NonFinite(String),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => exit::CONFIG_ERROR,
            _ => exit::NUMERICAL_FAILURE,
        }
    }
}

macro_rules! numerical_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Numerical(e.to_string())
            }
        })*
    };
}

numerical_from!(HarmonicError, MassError, ExtensionError, CornerError, GeometryError);
