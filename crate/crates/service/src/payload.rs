use lexloop_core::learn::{ConstraintReport, EvalStats, LearnConfig, LearnResult};
use lexloop_core::metric::{agglomerate, cut, distance_matrix, DendrogramDocument, Linkage};
use lexloop_core::model::{serialize_model, to_graph_description};
use lexloop_core::{Dendrogram64, Domain, Model};
use serde::{Deserialize, Serialize};

use crate::ServiceError;

/// Depth shown in graph documents unless a request asks otherwise.
pub const DEFAULT_GRAPH_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    /// Index of the tree within the model.
    pub tree: usize,
    pub depth: usize,
    pub dot: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringDoc {
    pub threshold: f64,
    pub buckets: Vec<Vec<usize>>,
    pub representatives: Vec<usize>,
}

/// Everything a viewer needs for one learned model version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPayload {
    pub version: u64,
    /// Configuration actually used, session feedback included.
    pub config: LearnConfig,
    pub model: serde_json::Value,
    pub accuracy: f64,
    pub training_accuracy: f64,
    pub stats: EvalStats,
    pub constraints: ConstraintReport,
    /// One per representative, or one for a single tree.
    pub graphs: Vec<GraphDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dendrogram: Option<DendrogramDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clustering: Option<ClusteringDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayloadOptions {
    /// Cut height; the median merge height when absent.
    pub threshold: Option<f64>,
    pub linkage: Linkage,
    pub graph_depth: usize,
}

impl Default for PayloadOptions {
    fn default() -> Self {
        Self {
            threshold: None,
            linkage: Linkage::default(),
            graph_depth: DEFAULT_GRAPH_DEPTH,
        }
    }
}

/// Assembles the viewer payload; forests are clustered and only their
/// representatives get graph documents.
pub fn build_payload(
    domain: &Domain,
    result: &LearnResult,
    config: &LearnConfig,
    options: PayloadOptions,
    version: u64,
) -> Result<ModelPayload, ServiceError> {
    if let Some(t) = options.threshold {
        if !(t.is_finite() && t >= 0.0) {
            return Err(ServiceError::Validation(format!(
                "threshold must be a non-negative number, got {t}"
            )));
        }
    }
    let model_doc: serde_json::Value =
        serde_json::from_str(&serialize_model(&result.model, domain)).expect("model document is JSON");
    let graph = |tree: usize| GraphDoc {
        tree,
        depth: options.graph_depth,
        dot: to_graph_description(&result.model.trees()[tree], domain, options.graph_depth),
    };
    let mut payload = ModelPayload {
        version,
        config: config.clone(),
        model: model_doc,
        accuracy: result.stats.accuracy(),
        training_accuracy: result.training_accuracy(),
        stats: result.stats.clone(),
        constraints: result.constraints.clone(),
        graphs: Vec::new(),
        distances: None,
        dendrogram: None,
        clustering: None,
    };
    match &result.model {
        Model::Tree(_) => payload.graphs.push(graph(0)),
        Model::Forest(forest) => {
            let matrix = distance_matrix(forest, domain)?;
            let dendrogram: Dendrogram64 = agglomerate(&matrix, options.linkage);
            let threshold = options.threshold.unwrap_or_else(|| dendrogram.median_height());
            let clustering = cut(&dendrogram, &matrix, threshold);
            payload.graphs = clustering.representatives.iter().map(|&t| graph(t)).collect();
            let rows = matrix
                .rows()
                .into_iter()
                .map(|row| row.into_iter().map(u64::try_from).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| ServiceError::UnsupportedScale("distances exceed the 64-bit range".into()))?;
            payload.distances = Some(rows);
            payload.dendrogram = Some(DendrogramDocument::new(&dendrogram, &[]));
            payload.clustering = Some(ClusteringDoc {
                threshold,
                buckets: clustering.buckets,
                representatives: clustering.representatives,
            });
        }
    }
    Ok(payload)
}
