use std::fmt;
use std::path::Path;

use lexloop_core::learn::LearnError;
use lexloop_core::metric::MetricError;
use lexloop_core::{DomainError, ModelError};
use lexloop_service::ServiceError;

/// A failed command, classified by exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Exit 1: files, sockets, storage.
    Io(String),
    /// Exit 2: unreadable input or bad flag combinations.
    Validation(String),
    /// Exit 3.
    Infeasible(String),
    /// Exit 4.
    UnsupportedScale(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            Self::Validation(_) => 2,
            Self::Infeasible(_) => 3,
            Self::UnsupportedScale(_) => 4,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(m) | Self::Validation(m) => f.write_str(m),
            Self::Infeasible(m) => write!(f, "infeasible constraints: {m}"),
            Self::UnsupportedScale(m) => write!(f, "unsupported scale: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        match e {
            DomainError::TooLarge { .. } => Self::UnsupportedScale(e.to_string()),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Domain(d) => d.into(),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Domain(d) => d.into(),
            MetricError::Matrix(m) => Self::Validation(m),
            other => Self::UnsupportedScale(other.to_string()),
        }
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::Infeasible(report) => Self::Infeasible(report.to_string()),
            LearnError::Domain(d) => d.into(),
            LearnError::Model(m) => m.into(),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<ServiceError> for CliError {
    fn from(e: ServiceError) -> Self {
        match e {
            ServiceError::Infeasible(r) => Self::Infeasible(r.to_string()),
            ServiceError::UnsupportedScale(m) => Self::UnsupportedScale(m),
            ServiceError::Validation(m) => Self::Validation(m),
            other => Self::Io(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(
            CliError::from(DomainError::TooLarge { size: 9, limit: 1 }).exit_code(),
            4
        );
        assert_eq!(CliError::from(ModelError::EmptyForest).exit_code(), 2);
        assert_eq!(CliError::from(MetricError::Overflow).exit_code(), 4);
        assert_eq!(CliError::Io("x".into()).exit_code(), 1);
        assert_eq!(
            CliError::Infeasible("x".into()).to_string(),
            "infeasible constraints: x"
        );
    }
}
