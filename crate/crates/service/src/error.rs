use lexloop_core::learn::{FeasibilityReport, LearnError};
use lexloop_core::metric::MetricError;
use lexloop_core::{DomainError, ModelError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ServiceError {
    #[error("{0}")]
    Validation(String),
    #[error("no endpoint {0}")]
    NoRoute(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("session has no model version {0}")]
    UnknownVersion(u64),
    #[error("session is finalized")]
    Finalized,
    #[error("answer does not match the pending query")]
    PairMismatch,
    #[error("no query is pending")]
    NoPendingQuery,
    #[error("every pair of alternatives has already been asked")]
    Exhausted,
    #[error("infeasible constraints: {0}")]
    Infeasible(FeasibilityReport),
    #[error("feedback needs a learned model first")]
    NotReady,
    #[error("learning needs at least one answer or one feedback constraint")]
    NoData,
    #[error("{0}")]
    UnsupportedScale(String),
    #[error("storage failure: {0}")]
    Storage(String),
    #[error("corrupt event log {file}: {message}")]
    CorruptLog { file: String, message: String },
}

impl ServiceError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::Validation(_) => "validation",
            Self::NoRoute(_) => "not_found",
            Self::UnknownSession(_) => "unknown_session",
            Self::UnknownVersion(_) => "unknown_version",
            Self::Finalized => "finalized",
            Self::PairMismatch => "pair_mismatch",
            Self::NoPendingQuery => "no_pending_query",
            Self::Exhausted => "exhausted",
            Self::Infeasible(_) => "infeasible_constraints",
            Self::NotReady => "not_ready",
            Self::NoData => "no_data",
            Self::UnsupportedScale(_) => "unsupported_scale",
            Self::Storage(_) => "storage",
            Self::CorruptLog { .. } => "corrupt_log",
        }
    }
}

impl From<DomainError> for ServiceError {
    fn from(e: DomainError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<ModelError> for ServiceError {
    fn from(e: ModelError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<MetricError> for ServiceError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Domain(d) => d.into(),
            other => Self::UnsupportedScale(other.to_string()),
        }
    }
}

impl From<LearnError> for ServiceError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::Infeasible(report) => Self::Infeasible(report),
            LearnError::Exhausted => Self::Exhausted,
            LearnError::Domain(d) => d.into(),
            LearnError::Model(m) => m.into(),
            LearnError::Config(msg) => Self::Validation(msg),
        }
    }
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        Self::Storage(e.to_string())
    }
}
