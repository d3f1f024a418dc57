use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LearnError;
use crate::domain::{Alternative, ComparisonExample, Domain};
use crate::model::{forest_tally, Model};

/// Pairs sampled per query when a forest can score disagreement.
pub const QUERY_CANDIDATES: usize = 32;
const ATTEMPTS_PER_CANDIDATE: usize = 64;

/// Unordered pairs of alternatives already put to the user.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AskedPairs {
    pairs: HashSet<(u64, u64)>,
}

fn key(domain: &Domain, a: &Alternative, b: &Alternative) -> (u64, u64) {
    let (x, y) = (domain.ordinal(a), domain.ordinal(b));
    (x.min(y), x.max(y))
}

impl AskedPairs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_examples(domain: &Domain, examples: &[ComparisonExample]) -> Self {
        let mut asked = Self::new();
        for e in examples {
            asked.insert(domain, &e.better, &e.worse);
        }
        asked
    }

    /// Returns false if the pair was already present.
    pub fn insert(&mut self, domain: &Domain, a: &Alternative, b: &Alternative) -> bool {
        self.pairs.insert(key(domain, a, b))
    }

    pub fn contains(&self, domain: &Domain, a: &Alternative, b: &Alternative) -> bool {
        self.pairs.contains(&key(domain, a, b))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Next pair to ask about: uniformly random among unasked pairs or, with a
/// forest of two or more trees, the candidate (out of
/// [`QUERY_CANDIDATES`]) whose vote split is most even. Deterministic in
/// `seed`.
pub fn select_query(
    domain: &Domain,
    asked: &AskedPairs,
    model: Option<&Model>,
    seed: u64,
) -> Result<(Alternative, Alternative), LearnError> {
    let n = domain.size() as u128;
    let total = n * (n - 1) / 2;
    if asked.len() as u128 >= total {
        return Err(LearnError::Exhausted);
    }
    let forest = match model {
        Some(Model::Forest(f)) if f.len() >= 2 => Some(f),
        _ => None,
    };
    let want = if forest.is_some() { QUERY_CANDIDATES } else { 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut candidates: Vec<(u64, u64)> = Vec::new();
    for _ in 0..want * ATTEMPTS_PER_CANDIDATE {
        if candidates.len() == want {
            break;
        }
        let a = rng.gen_range(0..domain.size());
        let b = rng.gen_range(0..domain.size());
        let k = (a.min(b), a.max(b));
        if a != b && !asked.pairs.contains(&k) && seen.insert(k) {
            candidates.push((a, b));
        }
    }
    if candidates.is_empty() {
        // Nearly exhausted: scan from a random start.
        let start = rng.gen_range(0..domain.size());
        'scan: for i in (start..domain.size()).chain(0..start) {
            for j in i + 1..domain.size() {
                if !asked.pairs.contains(&(i, j)) {
                    candidates.push((i, j));
                    if candidates.len() == want {
                        break 'scan;
                    }
                }
            }
        }
    }
    let alt = |o: u64| domain.alternative_at(o);
    let pick = match forest {
        None => candidates[0],
        Some(f) => {
            let mut best = candidates[0];
            let mut best_split = None;
            for &(a, b) in &candidates {
                let (x, y) = forest_tally(f, &alt(a), &alt(b));
                let split = x.min(y);
                if best_split.is_none_or(|s| split > s) {
                    best_split = Some(split);
                    best = (a, b);
                }
            }
            best
        }
    };
    Ok((alt(pick.0), alt(pick.1)))
}
