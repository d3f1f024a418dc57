#![allow(dead_code)]

use lexloop_core::domain::{validate_alternative, FeedbackConstraint};
use lexloop_core::model::{LocalOrder, Ranking};
use lexloop_core::{compare, parse_domain, ComparisonOutcome, Domain, LpTree};
use lexloop_service::{AltDoc, Choice, QueryDoc, ServiceConfig, SessionService};

pub const CAR_EVALUATION: &str = include_str!("../../../../data/car_evaluation.json");
pub const CAR: &str = include_str!("../../../../data/car.json");

pub fn open(dir: &std::path::Path) -> SessionService {
    SessionService::open(ServiceConfig::new(dir)).unwrap()
}

/// The simulated user: attributes in reverse declaration order, each with
/// its last declared value preferred.
pub fn hidden_user(domain: &Domain) -> LpTree {
    LpTree::Uiup(
        (0..domain.len())
            .rev()
            .map(|a| LocalOrder {
                attribute: a,
                ranking: Ranking::new((0..domain.value_count(a) as u8).rev().collect()),
            })
            .collect(),
    )
}

pub fn alt(domain: &Domain, doc: &AltDoc) -> lexloop_core::Alternative {
    validate_alternative(domain, doc.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap()
}

pub fn choose(domain: &Domain, user: &LpTree, q: &QueryDoc) -> Choice {
    match compare(user, &alt(domain, &q.first), &alt(domain, &q.second)) {
        ComparisonOutcome::FirstPreferred => Choice::First,
        ComparisonOutcome::SecondPreferred => Choice::Second,
        ComparisonOutcome::Equivalent => Choice::Skip,
    }
}

/// Answers `n` queries as the simulated user.
pub fn answer_many(svc: &SessionService, id: &str, n: usize) {
    let domain = svc.session(id).unwrap().domain.clone();
    let user = hidden_user(&domain);
    for _ in 0..n {
        let q = svc.next_query(id).unwrap();
        svc.submit_answer(id, &q.first, &q.second, choose(&domain, &user, &q))
            .unwrap();
    }
}

pub fn car_evaluation() -> Domain {
    parse_domain(CAR_EVALUATION).unwrap()
}

pub fn fig4_feedback() -> Vec<FeedbackConstraint> {
    serde_json::from_str(include_str!("../../../../data/car_feedback.json")).unwrap()
}
