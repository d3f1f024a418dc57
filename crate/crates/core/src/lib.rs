//! Lexicographic preference trees: domains, models, learning, distances and
//! clustering.
pub mod domain;
pub mod learn;
pub mod metric;
pub mod model;
pub mod scalar;
pub mod synth;

pub use domain::{canonical_key, enumerate_alternatives, parse_domain, Alternative, Domain, DomainError};
pub use model::{compare, trace, ComparisonOutcome, LpForest, LpTree, Model, ModelError, TreeKind};
pub use scalar::Scalar;

/// Exact rational used where averages must compare without rounding.
pub type Exact = num_rational::Rational64;

pub type Dendrogram64 = metric::Dendrogram<f64>;
pub type ExactDendrogram = metric::Dendrogram<Exact>;
pub type Clustering64 = metric::Clustering<f64>;
pub type ExactClustering = metric::Clustering<Exact>;
pub type BordaEntry64 = model::BordaEntry<f64>;
