use std::collections::BTreeMap;

use lexloop_core::domain::{validate_alternative, AttributeSpec, ComparisonExample, ExampleSource, FeedbackConstraint};
use lexloop_core::learn::AskedPairs;
use lexloop_core::model::deserialize_model;
use lexloop_core::{Alternative, Domain, Model};
use serde::{Deserialize, Serialize};

use crate::payload::ModelPayload;

/// An alternative on the wire: attribute name to value name.
pub type AltDoc = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Eliciting,
    ModelReady,
    Finalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    First,
    Second,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryDoc {
    pub first: AltDoc,
    pub second: AltDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsweredDoc {
    pub better: AltDoc,
    pub worse: AltDoc,
}

/// One line of a session's log. State is the left fold of its events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Created {
        id: String,
        attributes: Vec<AttributeSpec>,
        seed: u64,
        at: u64,
    },
    QueryIssued {
        first: AltDoc,
        second: AltDoc,
        at: u64,
    },
    Answered {
        first: AltDoc,
        second: AltDoc,
        choice: Choice,
        at: u64,
    },
    FeedbackAccepted {
        constraints: Vec<FeedbackConstraint>,
        at: u64,
    },
    Learned {
        payload: Box<ModelPayload>,
        at: u64,
    },
    Finalized {
        at: u64,
    },
}

impl Event {
    pub fn at(&self) -> u64 {
        match self {
            Self::Created { at, .. }
            | Self::QueryIssued { at, .. }
            | Self::Answered { at, .. }
            | Self::FeedbackAccepted { at, .. }
            | Self::Learned { at, .. }
            | Self::Finalized { at } => *at,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub domain: Domain,
    pub seed: u64,
    pub status: Status,
    pub answered: Vec<ComparisonExample>,
    pub feedback: Vec<FeedbackConstraint>,
    pub pending: Option<(Alternative, Alternative)>,
    /// Every pair ever issued, skipped ones included.
    pub asked: AskedPairs,
    pub issued: u64,
    pub history: Vec<ModelPayload>,
    /// Parsed form of the latest history entry.
    pub latest_model: Option<Model>,
    pub created_ms: u64,
    pub updated_ms: u64,
}

/// Read-only summary returned by the session endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub status: Status,
    pub domain: Vec<AttributeSpec>,
    pub seed: u64,
    pub answered: Vec<AnsweredDoc>,
    pub feedback: Vec<FeedbackConstraint>,
    pub pending: Option<QueryDoc>,
    pub queries_issued: u64,
    pub versions: Vec<u64>,
    pub created_ms: u64,
    pub updated_ms: u64,
}

impl Session {
    pub fn parse_alternative(&self, doc: &AltDoc) -> Result<Alternative, String> {
        validate_alternative(&self.domain, doc.iter().map(|(k, v)| (k.as_str(), v.as_str()))).map_err(|e| e.to_string())
    }

    pub fn alt_doc(&self, alt: &Alternative) -> AltDoc {
        alt.to_map(&self.domain)
    }

    /// Starts a session from its creation event.
    pub fn from_event(event: &Event) -> Result<Self, String> {
        let Event::Created {
            id,
            attributes,
            seed,
            at,
        } = event
        else {
            return Err("log does not start with a creation event".into());
        };
        let domain = Domain::new(attributes.clone()).map_err(|e| e.to_string())?;
        Ok(Self {
            id: id.clone(),
            domain,
            seed: *seed,
            status: Status::Eliciting,
            answered: Vec::new(),
            feedback: Vec::new(),
            pending: None,
            asked: AskedPairs::new(),
            issued: 0,
            history: Vec::new(),
            latest_model: None,
            created_ms: *at,
            updated_ms: *at,
        })
    }

    /// Applies one event after the creation event.
    pub fn apply(&mut self, event: &Event) -> Result<(), String> {
        if self.status == Status::Finalized && !matches!(event, Event::Finalized { .. }) {
            return Err("event after finalization".into());
        }
        match event {
            Event::Created { .. } => return Err("duplicate creation event".into()),
            Event::QueryIssued { first, second, .. } => {
                let (a, b) = (self.parse_alternative(first)?, self.parse_alternative(second)?);
                if self.pending.is_some() {
                    return Err("query issued while another is pending".into());
                }
                self.asked.insert(&self.domain, &a, &b);
                self.issued += 1;
                self.pending = Some((a, b));
            }
            Event::Answered {
                first, second, choice, ..
            } => {
                let pair = (self.parse_alternative(first)?, self.parse_alternative(second)?);
                if self.pending.as_ref() != Some(&pair) {
                    return Err("answer does not match the pending query".into());
                }
                self.pending = None;
                let (a, b) = pair;
                let example = match choice {
                    Choice::First => Some((a, b)),
                    Choice::Second => Some((b, a)),
                    Choice::Skip => None,
                };
                if let Some((better, worse)) = example {
                    let e =
                        ComparisonExample::new(better, worse, ExampleSource::QueryAnswer).map_err(|e| e.to_string())?;
                    self.answered.push(e);
                }
            }
            Event::FeedbackAccepted { constraints, .. } => self.feedback.extend(constraints.iter().cloned()),
            Event::Learned { payload, .. } => {
                let expected = self.history.len() as u64 + 1;
                if payload.version != expected {
                    return Err(format!(
                        "model version {} where {expected} was expected",
                        payload.version
                    ));
                }
                let model = deserialize_model(&payload.model.to_string(), &self.domain).map_err(|e| e.to_string())?;
                self.latest_model = Some(model);
                self.history.push((**payload).clone());
                self.status = Status::ModelReady;
            }
            Event::Finalized { .. } => self.status = Status::Finalized,
        }
        self.updated_ms = self.updated_ms.max(event.at());
        Ok(())
    }

    /// Folds a whole log.
    pub fn replay(events: &[Event]) -> Result<Self, String> {
        let (first, rest) = events.split_first().ok_or("empty log")?;
        let mut session = Self::from_event(first)?;
        for (i, e) in rest.iter().enumerate() {
            session.apply(e).map_err(|m| format!("event {}: {m}", i + 2))?;
        }
        Ok(session)
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            status: self.status,
            domain: self.domain.attributes().to_vec(),
            seed: self.seed,
            answered: self
                .answered
                .iter()
                .map(|e| AnsweredDoc {
                    better: self.alt_doc(&e.better),
                    worse: self.alt_doc(&e.worse),
                })
                .collect(),
            feedback: self.feedback.clone(),
            pending: self.pending.as_ref().map(|(a, b)| QueryDoc {
                first: self.alt_doc(a),
                second: self.alt_doc(b),
            }),
            queries_issued: self.issued,
            versions: self.history.iter().map(|p| p.version).collect(),
            created_ms: self.created_ms,
            updated_ms: self.updated_ms,
        }
    }
}
