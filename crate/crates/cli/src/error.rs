use std::process::ExitCode;

use thiserror::Error;
use warpwatch_core::cases::CaseError;
use warpwatch_core::network::NetworkError;
use warpwatch_core::sweep::SweepError;
use warpwatch_core::testkit::TestkitError;
use warpwatch_core::trends::TrendsError;
use warpwatch_core::{DtwError, SeriesError};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad input files, unreadable paths.
    #[error("{0}")]
    Input(String),
    /// Inputs are well-formed but the computation cannot be carried out.
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Infeasible(_) => ExitCode::from(3),
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Input(m) => CliError::Input(format!("{what}: {m}")),
            CliError::Infeasible(m) => CliError::Infeasible(format!("{what}: {m}")),
        }
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::DegenerateRange(_) => CliError::Infeasible(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<DtwError> for CliError {
    fn from(e: DtwError) -> Self {
        match e {
            DtwError::Series(s) => s.into(),
            DtwError::BandInfeasible { .. } => CliError::Infeasible(e.to_string()),
            DtwError::EmptySeries => CliError::Input(e.to_string()),
        }
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        match e {
            NetworkError::Series(s) => s.into(),
            NetworkError::InsufficientHistory { .. } => CliError::Infeasible(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<TrendsError> for CliError {
    fn from(e: TrendsError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CaseError> for CliError {
    fn from(e: CaseError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<TestkitError> for CliError {
    fn from(e: TestkitError) -> Self {
        CliError::Input(e.to_string())
    }
}
