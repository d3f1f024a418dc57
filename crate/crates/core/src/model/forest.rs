use serde::{Deserialize, Serialize};

use super::{compare, ComparisonOutcome, LpForest, ModelError};
use crate::domain::{canonical_key, Alternative, Domain};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VotingRule {
    /// Each tree votes; equivalence abstains; an exact tie is equivalence.
    #[default]
    PairwiseMajority,
}

/// Tally of member-tree votes on one pair.
pub(crate) fn tally(forest: &LpForest, first: &Alternative, second: &Alternative) -> (usize, usize) {
    forest
        .trees()
        .iter()
        .fold((0, 0), |(f, s), t| match compare(t, first, second) {
            ComparisonOutcome::FirstPreferred => (f + 1, s),
            ComparisonOutcome::SecondPreferred => (f, s + 1),
            ComparisonOutcome::Equivalent => (f, s),
        })
}

pub fn forest_compare(
    forest: &LpForest,
    first: &Alternative,
    second: &Alternative,
    rule: VotingRule,
) -> ComparisonOutcome {
    match rule {
        VotingRule::PairwiseMajority => {
            let (f, s) = tally(forest, first, second);
            match f.cmp(&s) {
                std::cmp::Ordering::Greater => ComparisonOutcome::FirstPreferred,
                std::cmp::Ordering::Less => ComparisonOutcome::SecondPreferred,
                std::cmp::Ordering::Equal => ComparisonOutcome::Equivalent,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BordaEntry<S> {
    pub candidate: Alternative,
    pub score: S,
}

/// Borda count over an explicit candidate list. Per tree, a candidate scores
/// one point for every other candidate it beats and half a point per
/// equivalence. Sorted by descending score, ties by canonical key.
pub fn borda_rank<S: Scalar>(
    forest: &LpForest,
    candidates: &[Alternative],
    domain: &Domain,
) -> Result<Vec<BordaEntry<S>>, ModelError> {
    if candidates.len() < 2 {
        return Err(ModelError::Candidates("at least two candidates required".into()));
    }
    for (i, c) in candidates.iter().enumerate() {
        if candidates[..i].contains(c) {
            return Err(ModelError::Candidates(format!(
                "duplicate candidate {}",
                canonical_key(c, domain)
            )));
        }
    }
    // half-points, to stay integral
    let mut doubled = vec![0u128; candidates.len()];
    for tree in forest.trees() {
        for i in 0..candidates.len() {
            for j in i + 1..candidates.len() {
                match compare(tree, &candidates[i], &candidates[j]) {
                    ComparisonOutcome::FirstPreferred => doubled[i] += 2,
                    ComparisonOutcome::SecondPreferred => doubled[j] += 2,
                    ComparisonOutcome::Equivalent => {
                        doubled[i] += 1;
                        doubled[j] += 1;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        doubled[b]
            .cmp(&doubled[a])
            .then_with(|| canonical_key(&candidates[a], domain).cmp(&canonical_key(&candidates[b], domain)))
    });
    Ok(order
        .into_iter()
        .map(|i| BordaEntry {
            candidate: candidates[i].clone(),
            score: S::ratio(doubled[i], 2),
        })
        .collect())
}
