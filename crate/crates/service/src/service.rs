use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use lexloop_core::domain::{parse_domain_with, DomainLimits, FeedbackConstraint};
use lexloop_core::learn::{check_constraints, learn, select_query, FeasibilityReport, LearnConfig};
use lexloop_core::metric::Linkage;
use serde::{Deserialize, Serialize};

use crate::payload::{build_payload, ModelPayload, PayloadOptions, DEFAULT_GRAPH_DEPTH};
use crate::session::{AltDoc, Choice, Event, QueryDoc, Session, Status};
use crate::store::{self, EventLog};
use crate::ServiceError;

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    /// Seed for sessions created without one.
    pub default_seed: u64,
    pub graph_depth: usize,
    pub limits: DomainLimits,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: data_dir.into(),
            default_seed: 0,
            graph_depth: DEFAULT_GRAPH_DEPTH,
            limits: DomainLimits::default(),
        }
    }
}

/// Body of a learn request. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnRequest {
    pub config: LearnConfig,
    pub threshold: Option<f64>,
    pub linkage: Linkage,
    pub graph_depth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerAck {
    /// False for a skip.
    pub recorded: bool,
    pub answered: usize,
}

struct Slot {
    /// Held for the whole of a mutation; owns the log.
    writer: Mutex<EventLog>,
    /// Last committed state; readers never wait for a running mutation.
    state: RwLock<Arc<Session>>,
}

/// Sessions of the elicitation loop. Mutations of one session are
/// serialized; different sessions proceed independently.
pub struct SessionService {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

fn poisoned<T>(_: T) -> ServiceError {
    ServiceError::Storage("lock poisoned by an earlier panic".into())
}

impl SessionService {
    /// Opens `config.data_dir`, creating it if needed, and replays every
    /// session log found there.
    pub fn open(config: ServiceConfig) -> Result<Self, ServiceError> {
        let mut sessions = HashMap::new();
        for path in store::prepare_dir(&config.data_dir)? {
            store::repair_tail(&path)?;
            let events = store::read_log(&path)?;
            let session = Session::replay(&events).map_err(|message| ServiceError::CorruptLog {
                file: path.display().to_string(),
                message,
            })?;
            let slot = Slot {
                writer: Mutex::new(EventLog::open(&path)?),
                state: RwLock::new(Arc::new(session.clone())),
            };
            sessions.insert(session.id.clone(), Arc::new(slot));
        }
        tracing::info!(sessions = sessions.len(), dir = %config.data_dir.display(), "session store opened");
        Ok(Self {
            config,
            sessions: RwLock::new(sessions),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ServiceError> {
        self.sessions
            .read()
            .map_err(poisoned)?
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    /// Committed state of a session.
    pub fn session(&self, id: &str) -> Result<Arc<Session>, ServiceError> {
        let slot = self.slot(id)?;
        let state = slot.state.read().map_err(poisoned)?.clone();
        Ok(state)
    }

    pub fn list(&self) -> Result<Vec<String>, ServiceError> {
        let mut ids: Vec<String> = self.sessions.read().map_err(poisoned)?.keys().cloned().collect();
        ids.sort();
        Ok(ids)
    }

    /// Runs `f` with exclusive write access. `f` sees the committed state
    /// and returns the events to commit plus a result; the events are
    /// applied to a copy, logged, then published together.
    fn mutate<T>(
        &self,
        id: &str,
        f: impl FnOnce(&Session) -> Result<(Vec<Event>, T), ServiceError>,
    ) -> Result<T, ServiceError> {
        let slot = self.slot(id)?;
        let mut log = slot.writer.lock().map_err(poisoned)?;
        let current = slot.state.read().map_err(poisoned)?.clone();
        let (events, out) = f(&current)?;
        if events.is_empty() {
            return Ok(out);
        }
        let mut next = (*current).clone();
        for e in &events {
            next.apply(e).map_err(ServiceError::Validation)?;
        }
        for e in &events {
            log.append(e)?;
        }
        *slot.state.write().map_err(poisoned)? = Arc::new(next);
        Ok(out)
    }

    /// Creates a session from a domain document.
    pub fn create_session(&self, domain_document: &str, seed: Option<u64>) -> Result<String, ServiceError> {
        let domain = parse_domain_with(domain_document, self.config.limits)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let event = Event::Created {
            id: id.clone(),
            attributes: domain.attributes().to_vec(),
            seed: seed.unwrap_or(self.config.default_seed),
            at: now_ms(),
        };
        let session = Session::from_event(&event).map_err(ServiceError::Validation)?;
        let mut log = EventLog::create(&self.config.data_dir, &id)?;
        log.append(&event)?;
        let slot = Slot {
            writer: Mutex::new(log),
            state: RwLock::new(Arc::new(session)),
        };
        self.sessions
            .write()
            .map_err(poisoned)?
            .insert(id.clone(), Arc::new(slot));
        Ok(id)
    }

    /// The pending query, issuing a new one if none is pending.
    pub fn next_query(&self, id: &str) -> Result<QueryDoc, ServiceError> {
        self.mutate(id, |s| {
            if s.status == Status::Finalized {
                return Err(ServiceError::Finalized);
            }
            if let Some((a, b)) = &s.pending {
                return Ok((
                    Vec::new(),
                    QueryDoc {
                        first: s.alt_doc(a),
                        second: s.alt_doc(b),
                    },
                ));
            }
            let seed = s.seed.wrapping_add(s.issued);
            let (a, b) = select_query(&s.domain, &s.asked, s.latest_model.as_ref(), seed)?;
            let query = QueryDoc {
                first: s.alt_doc(&a),
                second: s.alt_doc(&b),
            };
            let event = Event::QueryIssued {
                first: query.first.clone(),
                second: query.second.clone(),
                at: now_ms(),
            };
            Ok((vec![event], query))
        })
    }

    /// Answers the pending query; `first`/`second` must repeat it as issued.
    pub fn submit_answer(
        &self,
        id: &str,
        first: &AltDoc,
        second: &AltDoc,
        choice: Choice,
    ) -> Result<AnswerAck, ServiceError> {
        self.mutate(id, |s| {
            if s.status == Status::Finalized {
                return Err(ServiceError::Finalized);
            }
            let pending = s.pending.as_ref().ok_or(ServiceError::NoPendingQuery)?;
            let pair = (
                s.parse_alternative(first).map_err(ServiceError::Validation)?,
                s.parse_alternative(second).map_err(ServiceError::Validation)?,
            );
            if &pair != pending {
                return Err(ServiceError::PairMismatch);
            }
            let recorded = choice != Choice::Skip;
            let ack = AnswerAck {
                recorded,
                answered: s.answered.len() + usize::from(recorded),
            };
            let event = Event::Answered {
                first: first.clone(),
                second: second.clone(),
                choice,
                at: now_ms(),
            };
            Ok((vec![event], ack))
        })
    }

    /// Learns with the session's feedback added to the request's constraints
    /// and stores the payload as the next version.
    pub fn learn_model(&self, id: &str, request: &LearnRequest) -> Result<ModelPayload, ServiceError> {
        self.mutate(id, |s| {
            if s.status == Status::Finalized {
                return Err(ServiceError::Finalized);
            }
            let mut config = request.config.clone();
            let mut constraints = s.feedback.clone();
            for c in &config.constraints {
                if !constraints.contains(c) {
                    constraints.push(c.clone());
                }
            }
            config.constraints = constraints;
            if s.answered.is_empty() && config.constraints.is_empty() {
                return Err(ServiceError::NoData);
            }
            let result = learn(&s.answered, &s.domain, &config)?;
            let options = PayloadOptions {
                threshold: request.threshold,
                linkage: request.linkage,
                graph_depth: request.graph_depth.unwrap_or(self.config.graph_depth),
            };
            let payload = build_payload(&s.domain, &result, &config, options, s.history.len() as u64 + 1)?;
            let event = Event::Learned {
                payload: Box::new(payload.clone()),
                at: now_ms(),
            };
            Ok((vec![event], payload))
        })
    }

    /// Accepts constraints that are jointly feasible with the accepted ones;
    /// otherwise rejects all of them.
    pub fn submit_feedback(
        &self,
        id: &str,
        constraints: &[FeedbackConstraint],
    ) -> Result<FeasibilityReport, ServiceError> {
        self.mutate(id, |s| {
            match s.status {
                Status::Finalized => return Err(ServiceError::Finalized),
                Status::Eliciting => return Err(ServiceError::NotReady),
                Status::ModelReady => {}
            }
            for c in constraints {
                c.resolve(&s.domain)?;
            }
            let fresh: Vec<FeedbackConstraint> =
                constraints
                    .iter()
                    .filter(|c| !s.feedback.contains(c))
                    .cloned()
                    .fold(Vec::new(), |mut acc, c| {
                        if !acc.contains(&c) {
                            acc.push(c);
                        }
                        acc
                    });
            let mut all = s.feedback.clone();
            all.extend(fresh.iter().cloned());
            let report = check_constraints(&all, &s.domain)?;
            if !report.is_feasible() {
                return Err(ServiceError::Infeasible(report));
            }
            let events = if fresh.is_empty() {
                Vec::new()
            } else {
                vec![Event::FeedbackAccepted {
                    constraints: fresh,
                    at: now_ms(),
                }]
            };
            Ok((events, report))
        })
    }

    /// A stored payload; the latest when `version` is `None`.
    pub fn get_model(&self, id: &str, version: Option<u64>) -> Result<ModelPayload, ServiceError> {
        let s = self.session(id)?;
        match version {
            None => s.history.last().cloned().ok_or(ServiceError::UnknownVersion(0)),
            Some(v) => s
                .history
                .iter()
                .find(|p| p.version == v)
                .cloned()
                .ok_or(ServiceError::UnknownVersion(v)),
        }
    }

    /// Idempotent.
    pub fn finalize(&self, id: &str) -> Result<Status, ServiceError> {
        self.mutate(id, |s| {
            let events = if s.status == Status::Finalized {
                Vec::new()
            } else {
                vec![Event::Finalized { at: now_ms() }]
            };
            Ok((events, Status::Finalized))
        })
    }
}
