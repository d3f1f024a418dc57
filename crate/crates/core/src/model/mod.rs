//! Lexicographic preference trees and forests.
//!
//! A tree maps every alternative to a leaf; leaves are numbered left to right
//! and a smaller leaf index means a more preferred alternative. Three
//! representations are supported:
//!
//! * [`LpTree::Uiup`]: one attribute sequence, one value ranking per attribute.
//! * [`LpTree::Uicp`]: one attribute sequence, rankings given by conditional
//!   tables over earlier attributes.
//! * [`LpTree::Cicp`]: an explicit tree whose structure may differ per branch.
//!
//! Attributes that never appear on a path are "don't care": every completion
//! of the path lands in the same leaf.

mod document;
mod forest;
mod graph;
mod semantics;
mod transform;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{DomainError, ValueId};

pub use document::{
    deserialize_forest, deserialize_model, deserialize_tree, serialize_forest, serialize_model, serialize_tree,
    FOREST_FORMAT, TREE_FORMAT,
};
pub(crate) use forest::tally as forest_tally;
pub use forest::{borda_rank, forest_compare, BordaEntry, VotingRule};
pub use graph::to_graph_description;
pub use semantics::{compare, induced_order, leaf_count, trace};
pub use transform::{collapse, expand, expand_with_budget, DEFAULT_NODE_BUDGET};
pub(crate) use transform::{table_for, Layer};
pub use validate::{validate_tree, ValidationReport, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("expansion needs more than {budget} nodes")]
    NodeBudget { budget: usize },
    #[error("invalid tree: {0}")]
    Invalid(ValidationReport),
    #[error("malformed model document: {0}")]
    Malformed(String),
    #[error("a forest needs at least one tree")]
    EmptyForest,
    #[error("invalid candidate list: {0}")]
    Candidates(String),
}

/// A total order over one attribute's values, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking(Vec<ValueId>);

impl Ranking {
    pub fn new(values: Vec<ValueId>) -> Self {
        Self(values)
    }

    /// Values in declaration order.
    pub fn identity(len: usize) -> Self {
        Self((0..len).map(|v| v as ValueId).collect())
    }

    pub fn values(&self) -> &[ValueId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Position of `value`; panics if the value is not ranked.
    pub fn rank_of(&self, value: ValueId) -> usize {
        self.0
            .iter()
            .position(|&v| v == value)
            .expect("value present in ranking")
    }

    pub fn prefers(&self, preferred: ValueId, dispreferred: ValueId) -> bool {
        self.rank_of(preferred) < self.rank_of(dispreferred)
    }

    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    pub fn is_permutation_of(&self, len: usize) -> bool {
        let mut seen = vec![false; len];
        self.0.len() == len
            && self.0.iter().all(|&v| {
                let v = v as usize;
                v < len && !std::mem::replace(&mut seen[v], true)
            })
    }
}

/// An unconditional ranking attached to one attribute.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalOrder {
    pub attribute: usize,
    pub ranking: Ranking,
}

impl LocalOrder {
    pub fn new(attribute: usize, ranking: Vec<ValueId>) -> Self {
        Self {
            attribute,
            ranking: Ranking::new(ranking),
        }
    }
}

/// One conditional row: applies where every `(attribute, value)` holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CptRow {
    /// Sorted by attribute index.
    pub condition: Vec<(usize, ValueId)>,
    pub ranking: Ranking,
}

impl CptRow {
    pub fn matches(&self, lookup: impl Fn(usize) -> Option<ValueId>) -> bool {
        self.condition.iter().all(|&(a, v)| lookup(a) == Some(v))
    }
}

/// Conditional preference table of a UICP level.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CpTable {
    pub attribute: usize,
    pub rows: Vec<CptRow>,
    /// Used when no row matches.
    pub default: Ranking,
}

impl CpTable {
    pub fn unconditional(attribute: usize, ranking: Ranking) -> Self {
        Self {
            attribute,
            rows: Vec::new(),
            default: ranking,
        }
    }

    /// Ranking in force for an instantiation given by `lookup`.
    pub fn ranking_for(&self, lookup: impl Fn(usize) -> Option<ValueId> + Copy) -> &Ranking {
        self.rows
            .iter()
            .find(|row| row.matches(lookup))
            .map(|row| &row.ranking)
            .unwrap_or(&self.default)
    }
}

/// Inner node of an explicit tree. `children[k]` is the subtree for value
/// `ranking.values()[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeNode {
    attribute: usize,
    ranking: Ranking,
    children: Vec<Branch>,
    leaves: u64,
}

impl TreeNode {
    pub fn new(attribute: usize, ranking: Ranking, children: Vec<Branch>) -> Self {
        let leaves = children.iter().map(Branch::leaf_count).sum();
        Self {
            attribute,
            ranking,
            children,
            leaves,
        }
    }

    /// A node whose children are all leaves.
    pub fn with_leaves(attribute: usize, ranking: Ranking) -> Self {
        let children = vec![Branch::Leaf; ranking.len()];
        Self::new(attribute, ranking, children)
    }

    pub fn attribute(&self) -> usize {
        self.attribute
    }

    pub fn ranking(&self) -> &Ranking {
        &self.ranking
    }

    pub fn children(&self) -> &[Branch] {
        &self.children
    }

    pub fn leaf_count(&self) -> u64 {
        self.leaves
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Branch {
    Leaf,
    Node(Box<TreeNode>),
}

impl Branch {
    pub fn node(node: TreeNode) -> Self {
        Self::Node(Box::new(node))
    }

    pub fn leaf_count(&self) -> u64 {
        match self {
            Self::Leaf => 1,
            Self::Node(n) => n.leaves,
        }
    }

    /// Number of inner nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Self::Leaf => 0,
            Self::Node(n) => 1 + n.children.iter().map(Branch::node_count).sum::<usize>(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TreeKind {
    #[serde(rename = "UIUP", alias = "uiup")]
    Uiup,
    #[serde(rename = "UICP", alias = "uicp")]
    Uicp,
    #[serde(rename = "CICP", alias = "cicp")]
    Cicp,
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uiup => "UIUP",
            Self::Uicp => "UICP",
            Self::Cicp => "CICP",
        })
    }
}

impl FromStr for TreeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "UIUP" => Ok(Self::Uiup),
            "UICP" => Ok(Self::Uicp),
            "CICP" => Ok(Self::Cicp),
            _ => Err(format!("unknown tree kind {s:?} (expected uiup, uicp or cicp)")),
        }
    }
}

/// A lexicographic preference tree in one of its three representations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LpTree {
    Uiup(Vec<LocalOrder>),
    Uicp(Vec<CpTable>),
    Cicp(Branch),
}

impl LpTree {
    pub fn kind(&self) -> TreeKind {
        match self {
            Self::Uiup(_) => TreeKind::Uiup,
            Self::Uicp(_) => TreeKind::Uicp,
            Self::Cicp(_) => TreeKind::Cicp,
        }
    }

    /// Attribute sequence of a UIUP or UICP tree; `None` for CICP.
    pub fn sequence(&self) -> Option<Vec<usize>> {
        match self {
            Self::Uiup(body) => Some(body.iter().map(|o| o.attribute).collect()),
            Self::Uicp(body) => Some(body.iter().map(|t| t.attribute).collect()),
            Self::Cicp(_) => None,
        }
    }
}

/// A non-empty ensemble of trees over one domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LpForest {
    trees: Vec<LpTree>,
}

impl LpForest {
    pub fn new(trees: Vec<LpTree>) -> Result<Self, ModelError> {
        if trees.is_empty() {
            return Err(ModelError::EmptyForest);
        }
        Ok(Self { trees })
    }

    pub fn trees(&self) -> &[LpTree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn into_trees(self) -> Vec<LpTree> {
        self.trees
    }
}

/// Either a single tree or a forest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Model {
    Tree(LpTree),
    Forest(LpForest),
}

impl Model {
    pub fn trees(&self) -> &[LpTree] {
        match self {
            Self::Tree(t) => std::slice::from_ref(t),
            Self::Forest(f) => f.trees(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComparisonOutcome {
    FirstPreferred,
    SecondPreferred,
    Equivalent,
}

impl ComparisonOutcome {
    pub fn flip(self) -> Self {
        match self {
            Self::FirstPreferred => Self::SecondPreferred,
            Self::SecondPreferred => Self::FirstPreferred,
            Self::Equivalent => Self::Equivalent,
        }
    }
}
