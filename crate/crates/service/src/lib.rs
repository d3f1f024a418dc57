//! Elicitation sessions for learning preference trees: queries, answers,
//! feedback and versioned models, persisted as per-session event logs and
//! served over HTTP.

mod error;
pub mod http;
pub mod payload;
pub mod service;
pub mod session;
pub mod store;

pub use error::ServiceError;
pub use payload::{build_payload, ClusteringDoc, GraphDoc, ModelPayload, PayloadOptions};
pub use service::{AnswerAck, LearnRequest, ServiceConfig, SessionService};
pub use session::{AltDoc, Choice, Event, QueryDoc, Session, SessionView, Status};
