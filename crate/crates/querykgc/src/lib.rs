//! Command-line pipeline around `querykgc-core`: file loaders, the
//! `key=value` settings file, a rayon executor and the subcommands.

use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod exec;
pub mod io;

pub use config::Settings;
pub use exec::RayonExecutor;
pub use io::Layout;

/// A failed command. Usage problems and missing inputs exit with 2,
/// everything else with 1.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("missing {}; run `querykgc {command}` first", artifact.display())]
    Missing {
        artifact: PathBuf,
        command: &'static str,
    },
    #[error(transparent)]
    Internal(#[from] anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Missing { .. } => 2,
            Failure::Internal(_) => 1,
        }
    }
}

impl From<querykgc_core::Error> for Failure {
    fn from(e: querykgc_core::Error) -> Self {
        use querykgc_core::Error as E;
        match e {
            E::InvalidConfig(_) | E::InvalidArgument(_) | E::InvalidRatios(..) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Internal(other.into()),
        }
    }
}
