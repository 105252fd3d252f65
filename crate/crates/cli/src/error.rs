use coxcell_core::{AnalyticError, ConfigError, McError, QuadError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("quadrature did not converge: {0}")]
    NonConvergence(QuadError),
    #[error(transparent)]
    Analytic(AnalyticError),
    #[error(transparent)]
    MonteCarlo(McError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 0 success, 2 quadrature non-convergence, 3 configuration error,
    /// 1 anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::NonConvergence(_) => 2,
            CliError::Analytic(_)
            | CliError::MonteCarlo(_)
            | CliError::Io(_)
            | CliError::Csv(_)
            | CliError::Json(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::Quadrature(q @ QuadError::NonConvergence { .. }) => CliError::NonConvergence(q),
            AnalyticError::Config(c) => c.into(),
            e @ (AnalyticError::NoBaseStations(_)
            | AnalyticError::DegenerateConditioning { .. }
            | AnalyticError::DegenerateWeights
            | AnalyticError::BadDistance(_)) => CliError::Config(e.to_string()),
            other => CliError::Analytic(other),
        }
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::Config(c) => c.into(),
            e @ (McError::Window(_) | McError::NoTrials | McError::DegenerateWeights | McError::BadGrid) => {
                CliError::Config(e.to_string())
            }
            other => CliError::MonteCarlo(other),
        }
    }
}
