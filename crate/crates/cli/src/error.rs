use std::path::PathBuf;

use gsc_core::equilibrium::EquilibriumError;
use gsc_core::exposure::ExposureError;
use gsc_core::iotable::IoTableError;
use gsc_core::policy::PolicyError;
use gsc_core::survival::SurvivalError;
use thiserror::Error;

/// Failure of a subcommand, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<IoTableError> for CliError {
    fn from(e: IoTableError) -> Self {
        match e {
            IoTableError::NotProductive(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ExposureError> for CliError {
    fn from(e: ExposureError) -> Self {
        match e {
            ExposureError::Table(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SurvivalError> for CliError {
    fn from(e: SurvivalError) -> Self {
        match e {
            SurvivalError::Divergent { .. } | SurvivalError::NonPositiveValue(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PolicyError> for CliError {
    fn from(e: PolicyError) -> Self {
        match e {
            PolicyError::Survival(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<EquilibriumError> for CliError {
    fn from(e: EquilibriumError) -> Self {
        match e {
            EquilibriumError::NoConvergence { .. }
            | EquilibriumError::Disconnected(_)
            | EquilibriumError::NoDomesticChain(_) => CliError::Numerical(e.to_string()),
            EquilibriumError::Table(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}
