//! DOT rendering with a depth limit.
//!
//! Explicit trees draw every inner node shallower than the limit; each
//! subtree starting at the limit becomes one dashed box noting how many inner
//! nodes it hides and which leaf indices it spans. Chains (UIUP, UICP) draw
//! one box per level and summarize the remaining levels in a single box.

use std::fmt::Write;

use super::{Branch, CpTable, LpTree, Ranking};
use crate::domain::Domain;

fn order_label(domain: &Domain, attribute: usize, ranking: &Ranking) -> String {
    ranking
        .values()
        .iter()
        .map(|&v| domain.value_name(attribute, v))
        .collect::<Vec<_>>()
        .join(" > ")
}

fn table_label(domain: &Domain, table: &CpTable) -> String {
    let a = table.attribute;
    let mut lines = vec![domain.attribute_name(a).to_string()];
    for row in &table.rows {
        let cond: Vec<String> = row
            .condition
            .iter()
            .map(|&(c, v)| domain.value_name(c, v).to_string())
            .collect();
        lines.push(format!("{}: {}", cond.join(","), order_label(domain, a, &row.ranking)));
    }
    if table.rows.is_empty() {
        lines.push(order_label(domain, a, &table.default));
    } else {
        lines.push(format!("else: {}", order_label(domain, a, &table.default)));
    }
    lines.join("\\n")
}

struct Writer<'d> {
    domain: &'d Domain,
    out: String,
    next: usize,
}

impl Writer<'_> {
    fn node(&mut self, attrs: &str) -> usize {
        let id = self.next;
        self.next += 1;
        let _ = writeln!(self.out, "  n{id} [{attrs}];");
        id
    }

    fn edge(&mut self, from: usize, to: usize, label: Option<&str>) {
        match label {
            Some(l) => {
                let _ = writeln!(self.out, "  n{from} -> n{to} [label=\"{l}\"];");
            }
            None => {
                let _ = writeln!(self.out, "  n{from} -> n{to};");
            }
        }
    }

    /// Draws `branch` whose first leaf has index `first`; returns its node id.
    fn branch(&mut self, branch: &Branch, first: u64, depth: usize, limit: usize) -> usize {
        if depth >= limit {
            let hidden = branch.node_count();
            let last = first + branch.leaf_count() - 1;
            let leaves = if last == first {
                format!("leaf {first}")
            } else {
                format!("leaves {first}-{last}")
            };
            let head = match branch {
                Branch::Node(n) => format!("{}\\n", self.domain.attribute_name(n.attribute())),
                Branch::Leaf => String::new(),
            };
            let noun = if hidden == 1 { "node" } else { "nodes" };
            return self.node(&format!(
                "label=\"{head}{hidden} hidden {noun}\\n{leaves}\", shape=box, style=dashed, class=collapsed"
            ));
        }
        match branch {
            Branch::Leaf => self.node(&format!("label=\"{first}\", shape=box, class=leaf")),
            Branch::Node(n) => {
                let a = n.attribute();
                let id = self.node(&format!(
                    "label=\"{}\\n{}\"",
                    self.domain.attribute_name(a),
                    order_label(self.domain, a, n.ranking())
                ));
                let mut offset = first;
                for (&v, child) in n.ranking().values().iter().zip(n.children()) {
                    let c = self.branch(child, offset, depth + 1, limit);
                    let label = self.domain.value_name(a, v).to_string();
                    self.edge(id, c, Some(&label));
                    offset += child.leaf_count();
                }
                id
            }
        }
    }

    fn chain(&mut self, labels: Vec<String>, limit: usize) {
        let shown = labels.len().min(limit);
        let mut prev: Option<usize> = None;
        for label in &labels[..shown] {
            let id = self.node(&format!("label=\"{label}\", shape=box"));
            if let Some(p) = prev {
                self.edge(p, id, None);
            }
            prev = Some(id);
        }
        let rest = labels.len() - shown;
        if rest > 0 {
            let noun = if rest == 1 { "level" } else { "levels" };
            let id = self.node(&format!(
                "label=\"{rest} more {noun}\", shape=box, style=dashed, class=collapsed"
            ));
            if let Some(p) = prev {
                self.edge(p, id, None);
            }
        }
    }
}

/// Graphviz DOT text for `tree`, expanded to `depth_limit` levels.
pub fn to_graph_description(tree: &LpTree, domain: &Domain, depth_limit: usize) -> String {
    let mut w = Writer {
        domain,
        out: String::from("digraph lptree {\n  node [fontname=\"Helvetica\"];\n"),
        next: 0,
    };
    match tree {
        LpTree::Cicp(root) => {
            w.branch(root, 0, 0, depth_limit);
        }
        LpTree::Uiup(body) => {
            let labels = body
                .iter()
                .map(|o| {
                    format!(
                        "{}\\n{}",
                        domain.attribute_name(o.attribute),
                        order_label(domain, o.attribute, &o.ranking)
                    )
                })
                .collect();
            w.chain(labels, depth_limit);
        }
        LpTree::Uicp(body) => {
            let labels = body.iter().map(|t| table_label(domain, t)).collect();
            w.chain(labels, depth_limit);
        }
    }
    w.out.push_str("}\n");
    w.out
}
