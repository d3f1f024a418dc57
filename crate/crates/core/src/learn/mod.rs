//! Greedy learning of trees and forests under hard feedback constraints.

mod constraints;
mod evaluate;
mod fit;
mod greedy;
mod query;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ComparisonExample, Domain, DomainError, FeedbackConstraint};
use crate::model::{LpForest, LpTree, Model, ModelError, TreeKind};
use crate::scalar::Scalar;

pub use constraints::{
    check_constraints, check_constraints_for, tree_satisfies, verify_constraints, Conflict, ConstraintReport,
    FeasibilityReport,
};
pub use evaluate::{evaluate, EvalStats, ExampleOutcome};
pub use query::{select_query, AskedPairs, QUERY_CANDIDATES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("invalid learner configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("infeasible constraints: {0}")]
    Infeasible(FeasibilityReport),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("every pair of alternatives has already been asked")]
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnConfig {
    pub kind: TreeKind,
    /// 1 learns a single tree.
    pub forest_size: usize,
    /// Bootstrap sample size per member, as a fraction of the examples.
    pub sample_fraction: f64,
    /// Member `i` draws its sample from `seed + i`.
    pub seed: u64,
    pub max_depth: Option<usize>,
    pub constraints: Vec<FeedbackConstraint>,
    /// Search all permutations for attributes with few values.
    pub exact_orders: bool,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            kind: TreeKind::Uiup,
            forest_size: 1,
            sample_fraction: 1.0,
            seed: 0,
            max_depth: None,
            constraints: Vec::new(),
            exact_orders: false,
        }
    }
}

impl LearnConfig {
    pub fn new(kind: TreeKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        if self.forest_size == 0 {
            return Err(LearnError::Config("forest size must be at least 1".into()));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(LearnError::Config(format!(
                "sample fraction must be in (0, 1], got {}",
                self.sample_fraction
            )));
        }
        if self.max_depth == Some(0) {
            return Err(LearnError::Config("max depth must be at least 1".into()));
        }
        Ok(())
    }

    fn options(&self) -> greedy::Options {
        greedy::Options {
            max_depth: self.max_depth,
            exact: self.exact_orders,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnResult {
    pub model: Model,
    /// Outcomes on the full training set.
    pub stats: EvalStats,
    pub constraints: ConstraintReport,
}

impl LearnResult {
    pub fn training_accuracy<S: Scalar>(&self) -> S {
        self.stats.training_accuracy()
    }
}

fn prepare(domain: &Domain, config: &LearnConfig) -> Result<constraints::Compiled, LearnError> {
    config.validate()?;
    let (report, compiled) = constraints::compile(&config.constraints, domain, config.kind)?;
    if !report.is_feasible() {
        return Err(LearnError::Infeasible(report));
    }
    Ok(compiled)
}

fn finish(
    model: Model,
    examples: &[ComparisonExample],
    domain: &Domain,
    config: &LearnConfig,
) -> Result<LearnResult, LearnError> {
    let stats = evaluate(&model, examples);
    let constraints = verify_constraints(&model, &config.constraints, domain)?;
    debug_assert!(
        constraints.all_satisfied(),
        "learner broke a constraint: {constraints:?}"
    );
    Ok(LearnResult {
        model,
        stats,
        constraints,
    })
}

fn single(examples: &[ComparisonExample], domain: &Domain, config: &LearnConfig) -> Result<LearnResult, LearnError> {
    let compiled = prepare(domain, config)?;
    let refs: Vec<&ComparisonExample> = examples.iter().collect();
    let tree = greedy::grow(config.kind, &refs, domain, &compiled, config.options());
    finish(Model::Tree(tree), examples, domain, config)
}

/// Learns a single tree of `config.kind` or, with `forest_size > 1`, a forest.
pub fn learn(examples: &[ComparisonExample], domain: &Domain, config: &LearnConfig) -> Result<LearnResult, LearnError> {
    if config.forest_size > 1 {
        learn_forest(examples, domain, config)
    } else {
        single(examples, domain, config)
    }
}

pub fn learn_uiup(
    examples: &[ComparisonExample],
    domain: &Domain,
    config: &LearnConfig,
) -> Result<LearnResult, LearnError> {
    single(
        examples,
        domain,
        &LearnConfig {
            kind: TreeKind::Uiup,
            ..config.clone()
        },
    )
}

pub fn learn_uicp(
    examples: &[ComparisonExample],
    domain: &Domain,
    config: &LearnConfig,
) -> Result<LearnResult, LearnError> {
    single(
        examples,
        domain,
        &LearnConfig {
            kind: TreeKind::Uicp,
            ..config.clone()
        },
    )
}

pub fn learn_cicp(
    examples: &[ComparisonExample],
    domain: &Domain,
    config: &LearnConfig,
) -> Result<LearnResult, LearnError> {
    single(
        examples,
        domain,
        &LearnConfig {
            kind: TreeKind::Cicp,
            ..config.clone()
        },
    )
}

/// Draws `round(fraction * m)` examples (at least one) with replacement.
fn bootstrap(examples: &[ComparisonExample], fraction: f64, seed: u64) -> Vec<&ComparisonExample> {
    if examples.is_empty() {
        return Vec::new();
    }
    let size = ((fraction * examples.len() as f64).round() as usize).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size).map(|_| &examples[rng.gen_range(0..examples.len())]).collect()
}

/// A forest of `forest_size` trees. With one member the tree is learned on
/// all examples; otherwise each member gets its own bootstrap sample.
pub fn learn_forest(
    examples: &[ComparisonExample],
    domain: &Domain,
    config: &LearnConfig,
) -> Result<LearnResult, LearnError> {
    let compiled = prepare(domain, config)?;
    let opts = config.options();
    let trees: Vec<LpTree> = (0..config.forest_size)
        .into_par_iter()
        .map(|i| {
            let sample = if config.forest_size == 1 {
                examples.iter().collect()
            } else {
                bootstrap(examples, config.sample_fraction, config.seed.wrapping_add(i as u64))
            };
            greedy::grow(config.kind, &sample, domain, &compiled, opts)
        })
        .collect();
    finish(Model::Forest(LpForest::new(trees)?), examples, domain, config)
}
