//! Kendall distance between trees, and clustering of forests by it.

mod cluster;
mod order;
mod plot;
mod tau;

use thiserror::Error;

use crate::domain::DomainError;

pub use cluster::{agglomerate, cut, representative_of, Clustering, Dendrogram, Linkage, Merge};
pub use order::{tau_bruteforce, total_order_of};
pub use plot::{
    leaf_order, plot_document, plot_segments, to_svg, Axis, DendrogramDocument, LeafDoc, MergeDoc, PlotDocument,
    Segment, Tick, DENDROGRAM_FORMAT, PLOT_FORMAT,
};
pub use tau::{distance_matrix, tau, DistanceMatrix, ENUMERATION_LIMIT};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("distance needs enumerating {size} alternatives, limit is {limit}")]
    UnsupportedScale { size: u64, limit: u64 },
    #[error("distance exceeds the 128-bit range")]
    Overflow,
    #[error("invalid distance matrix: {0}")]
    Matrix(String),
}
