//! CLI error classes with distinct exit codes.

use alphaforge::dsl::DslError;
use alphaforge::fmb::FmbError;
use alphaforge::metrics::MetricsError;
use alphaforge::miner::{MinerError, TransportError};
use alphaforge::panel::PanelError;
use alphaforge::report::ReportError;
use alphaforge::signals::AliasError;

/// Failure classes; each maps to a stable exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Transport(_) => 5,
            CliError::Io(_) => 6,
        }
    }
}

impl From<PanelError> for CliError {
    fn from(err: PanelError) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<AliasError> for CliError {
    fn from(err: AliasError) -> Self {
        CliError::Config(err.to_string())
    }
}

impl From<DslError> for CliError {
    fn from(err: DslError) -> Self {
        CliError::Config(err.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(err: MetricsError) -> Self {
        match err {
            MetricsError::Panel(inner) => CliError::Data(inner.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<FmbError> for CliError {
    fn from(err: FmbError) -> Self {
        match err {
            FmbError::Panel(inner) => CliError::Data(inner.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<TransportError> for CliError {
    fn from(err: TransportError) -> Self {
        CliError::Transport(err.to_string())
    }
}

impl From<MinerError> for CliError {
    fn from(err: MinerError) -> Self {
        match err {
            MinerError::Transport(inner) => CliError::Transport(inner.to_string()),
            MinerError::Panel(inner) => CliError::Data(inner.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(err: ReportError) -> Self {
        match err {
            ReportError::InvalidSpec(detail) => CliError::Numeric(detail),
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}
