//! Dendrogram documents for viewers, and a plot layout derived from them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Dendrogram, Linkage};
use crate::scalar::Scalar;

pub const DENDROGRAM_FORMAT: &str = "lexloop-dendrogram/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafDoc {
    pub id: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeDoc {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    /// Height printed by the scalar type, e.g. `7/2`.
    pub height_exact: String,
    pub id: usize,
    pub size: usize,
}

/// Everything needed to draw and re-cut a dendrogram without the matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendrogramDocument {
    pub format: String,
    pub linkage: Linkage,
    pub leaves: Vec<LeafDoc>,
    pub merges: Vec<MergeDoc>,
    /// Leaves left to right so that no branches cross.
    pub leaf_order: Vec<usize>,
}

/// Left-to-right leaf order: each merge lays out `a` before `b`.
pub fn leaf_order<S>(dendrogram: &Dendrogram<S>) -> Vec<usize> {
    let n = dendrogram.leaves;
    let Some(top) = dendrogram.merges.last() else {
        return (0..n).collect();
    };
    let mut out = Vec::with_capacity(n);
    let mut stack = vec![top.id];
    while let Some(c) = stack.pop() {
        if c < n {
            out.push(c);
        } else {
            let m = &dendrogram.merges[c - n];
            stack.push(m.b);
            stack.push(m.a);
        }
    }
    out
}

impl DendrogramDocument {
    /// `labels[i]` names leaf `i`; missing labels default to `tree i`.
    pub fn new<S: Scalar>(dendrogram: &Dendrogram<S>, labels: &[String]) -> Self {
        Self {
            format: DENDROGRAM_FORMAT.to_string(),
            linkage: dendrogram.linkage,
            leaves: (0..dendrogram.leaves)
                .map(|id| LeafDoc {
                    id,
                    label: labels.get(id).cloned().unwrap_or_else(|| format!("tree {id}")),
                })
                .collect(),
            merges: dendrogram
                .merges
                .iter()
                .map(|m| MergeDoc {
                    a: m.a,
                    b: m.b,
                    height: m.height.to_f64(),
                    height_exact: m.height.to_string(),
                    id: m.id,
                    size: m.size,
                })
                .collect(),
            leaf_order: leaf_order(dendrogram),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dendrogram document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let doc: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if doc.format != DENDROGRAM_FORMAT {
            return Err(format!("unsupported format {:?}", doc.format));
        }
        let n = doc.leaves.len();
        for (k, m) in doc.merges.iter().enumerate() {
            if m.id != n + k || m.a >= m.id || m.b >= m.id {
                return Err(format!("merge {k} has inconsistent ids"));
            }
        }
        Ok(doc)
    }

    /// Buckets at `threshold` from the merge list alone, ordered by smallest
    /// member. Viewers use this to re-cut without a server round trip.
    pub fn buckets_at(&self, threshold: f64) -> Vec<Vec<usize>> {
        let n = self.leaves.len();
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        members.resize(n + self.merges.len(), Vec::new());
        for m in &self.merges {
            if m.height <= threshold {
                let mut joined = std::mem::take(&mut members[m.a]);
                joined.append(&mut std::mem::take(&mut members[m.b]));
                members[m.id] = joined;
            }
        }
        let mut buckets: Vec<Vec<usize>> = members.into_iter().filter(|b| !b.is_empty()).collect();
        for b in &mut buckets {
            b.sort_unstable();
        }
        buckets.sort();
        buckets
    }
}

/// A polyline of the plot in data coordinates: x in leaf slots, y in height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub x: [f64; 4],
    pub y: [f64; 4],
}

/// One U-shaped segment per merge, leaves at x = 0, 1, 2, ...
pub fn plot_segments(doc: &DendrogramDocument) -> Vec<Segment> {
    let n = doc.leaves.len();
    let mut x = vec![0.0; n + doc.merges.len()];
    let mut y = vec![0.0; n + doc.merges.len()];
    for (slot, &leaf) in doc.leaf_order.iter().enumerate() {
        x[leaf] = slot as f64;
    }
    doc.merges
        .iter()
        .map(|m| {
            x[m.id] = (x[m.a] + x[m.b]) / 2.0;
            y[m.id] = m.height;
            Segment {
                x: [x[m.a], x[m.a], x[m.b], x[m.b]],
                y: [y[m.a], m.height, m.height, y[m.b]],
            }
        })
        .collect()
}

pub const PLOT_FORMAT: &str = "lexloop-plot/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub position: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub label: String,
    pub min: f64,
    pub max: f64,
    pub ticks: Vec<Tick>,
}

/// Renderer-neutral description of a dendrogram plot: data plus axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotDocument {
    pub format: String,
    pub title: String,
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub segments: Vec<Segment>,
    /// Height of a horizontal cut line, if any.
    pub cut: Option<f64>,
}

pub fn plot_document(doc: &DendrogramDocument, threshold: Option<f64>) -> PlotDocument {
    let n = doc.leaves.len();
    let top = doc
        .merges
        .iter()
        .map(|m| m.height)
        .fold(0.0, f64::max)
        .max(threshold.unwrap_or(0.0));
    let mut heights: Vec<f64> = doc.merges.iter().map(|m| m.height).collect();
    heights.push(0.0);
    heights.dedup();
    PlotDocument {
        format: PLOT_FORMAT.to_string(),
        title: format!("{} linkage over {n} trees", doc.linkage),
        x_axis: Axis {
            label: "tree".into(),
            min: -0.5,
            max: n as f64 - 0.5,
            ticks: doc
                .leaf_order
                .iter()
                .enumerate()
                .map(|(slot, &leaf)| Tick {
                    position: slot as f64,
                    label: doc.leaves[leaf].label.clone(),
                })
                .collect(),
        },
        y_axis: Axis {
            label: "pairwise disagreements".into(),
            min: 0.0,
            max: top,
            ticks: heights
                .into_iter()
                .map(|h| Tick {
                    position: h,
                    label: h.to_string(),
                })
                .collect(),
        },
        segments: plot_segments(doc),
        cut: threshold,
    }
}

/// Standalone SVG drawing of the document, with an optional dashed cut line.
pub fn to_svg(doc: &DendrogramDocument, threshold: Option<f64>) -> String {
    const SLOT: f64 = 60.0;
    const HEIGHT: f64 = 300.0;
    const MARGIN: f64 = 40.0;
    let n = doc.leaves.len().max(1);
    let top = doc
        .merges
        .iter()
        .map(|m| m.height)
        .fold(0.0, f64::max)
        .max(threshold.unwrap_or(0.0))
        .max(1.0);
    let px = |x: f64| MARGIN + SLOT / 2.0 + x * SLOT;
    let py = |y: f64| MARGIN + HEIGHT * (1.0 - y / top);
    let width = 2.0 * MARGIN + SLOT * n as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{}" font-family="sans-serif" font-size="11">"#,
        HEIGHT + 2.0 * MARGIN + 20.0
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN}" y1="{}" x2="{MARGIN}" y2="{MARGIN}" stroke="gray"/>"#,
        py(0.0)
    );
    let _ = writeln!(svg, r#"<text x="4" y="{}">{top}</text>"#, py(top) + 4.0);
    let _ = writeln!(svg, r#"<text x="4" y="{}">0</text>"#, py(0.0) + 4.0);
    for s in plot_segments(doc) {
        let points: Vec<String> =
            s.x.iter()
                .zip(&s.y)
                .map(|(&x, &y)| format!("{},{}", px(x), py(y)))
                .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="merge" fill="none" stroke="black" points="{}"/>"#,
            points.join(" ")
        );
    }
    for (slot, &leaf) in doc.leaf_order.iter().enumerate() {
        let label = doc.leaves.get(leaf).map_or(String::new(), |l| escape(&l.label));
        let _ = writeln!(
            svg,
            r#"<text class="leaf" x="{}" y="{}" text-anchor="middle">{label}</text>"#,
            px(slot as f64),
            py(0.0) + 16.0
        );
    }
    if let Some(t) = threshold {
        let _ = writeln!(
            svg,
            r#"<line class="cut" x1="{MARGIN}" y1="{y}" x2="{}" y2="{y}" stroke="red" stroke-dasharray="4 3"/>"#,
            width - MARGIN,
            y = py(t)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
