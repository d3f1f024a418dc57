use std::collections::HashMap;

use super::{Branch, CpTable, CptRow, LpTree, ModelError, Ranking, TreeNode};
use crate::domain::ValueId;

/// Default cap on inner nodes created by [`expand`].
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

pub fn expand(tree: &LpTree) -> Result<LpTree, ModelError> {
    expand_with_budget(tree, DEFAULT_NODE_BUDGET)
}

/// Materializes `tree` as an explicit (CICP) tree with identical traces.
pub fn expand_with_budget(tree: &LpTree, budget: usize) -> Result<LpTree, ModelError> {
    let tables: Vec<CpTable> = match tree {
        LpTree::Cicp(_) => return Ok(tree.clone()),
        LpTree::Uiup(body) => body
            .iter()
            .map(|o| CpTable::unconditional(o.attribute, o.ranking.clone()))
            .collect(),
        LpTree::Uicp(body) => body.clone(),
    };
    let mut needed: usize = 0;
    let mut width: usize = 1;
    for table in &tables {
        needed = needed.saturating_add(width);
        width = width.saturating_mul(table.default.len());
    }
    if needed > budget {
        return Err(ModelError::NodeBudget { budget });
    }
    Ok(LpTree::Cicp(grow(&tables, &mut Vec::new())))
}

fn grow(tables: &[CpTable], path: &mut Vec<(usize, ValueId)>) -> Branch {
    let Some((table, rest)) = tables.split_first() else {
        return Branch::Leaf;
    };
    let ranking = {
        let lookup = |a: usize| path.iter().find(|(b, _)| *b == a).map(|&(_, v)| v);
        table.ranking_for(lookup).clone()
    };
    let children = ranking
        .values()
        .iter()
        .map(|&v| {
            path.push((table.attribute, v));
            let child = grow(rest, path);
            path.pop();
            child
        })
        .collect();
    Branch::node(TreeNode::new(table.attribute, ranking, children))
}

/// Rewrites `tree` in the most compact kind that preserves every trace.
///
/// An explicit tree collapses to UIUP when every depth carries a single
/// attribute and a single ranking, to UICP when only the attribute sequence
/// is shared, and is returned unchanged otherwise.
pub fn collapse(tree: &LpTree) -> LpTree {
    match tree {
        LpTree::Uiup(_) => tree.clone(),
        LpTree::Uicp(body) => match expand(tree) {
            Ok(explicit) => collapse(&explicit),
            Err(_) if body.iter().all(|t| t.rows.is_empty()) => LpTree::Uiup(
                body.iter()
                    .map(|t| super::LocalOrder {
                        attribute: t.attribute,
                        ranking: t.default.clone(),
                    })
                    .collect(),
            ),
            Err(_) => tree.clone(),
        },
        LpTree::Cicp(root) => match layers(root) {
            Some(levels) => from_layers(levels),
            None => tree.clone(),
        },
    }
}

/// One depth of a layered tree: its attribute and, per node, the values of
/// the ancestors (in sequence order) with the node's ranking. `nodes` must
/// not be empty.
pub(crate) struct Layer {
    pub attribute: usize,
    pub nodes: Vec<(Vec<ValueId>, Ranking)>,
}

fn layers(root: &Branch) -> Option<Vec<Layer>> {
    let mut out = Vec::new();
    let mut frontier: Vec<(Vec<ValueId>, &Branch)> = vec![(Vec::new(), root)];
    loop {
        let leaves = frontier.iter().filter(|(_, b)| matches!(b, Branch::Leaf)).count();
        if leaves == frontier.len() {
            return Some(out);
        }
        if leaves > 0 {
            return None;
        }
        let mut attribute = None;
        let mut nodes = Vec::with_capacity(frontier.len());
        let mut next = Vec::new();
        for (path, branch) in frontier {
            let Branch::Node(node) = branch else { unreachable!() };
            if *attribute.get_or_insert(node.attribute()) != node.attribute() {
                return None;
            }
            for (&v, child) in node.ranking().values().iter().zip(node.children()) {
                let mut p = path.clone();
                p.push(v);
                next.push((p, child));
            }
            nodes.push((path, node.ranking().clone()));
        }
        out.push(Layer {
            attribute: attribute.expect("non-empty frontier"),
            nodes,
        });
        frontier = next;
    }
}

fn from_layers(levels: Vec<Layer>) -> LpTree {
    let unconditional = levels.iter().all(|l| l.nodes.iter().all(|(_, r)| *r == l.nodes[0].1));
    if unconditional {
        return LpTree::Uiup(
            levels
                .into_iter()
                .map(|l| super::LocalOrder {
                    attribute: l.attribute,
                    ranking: l.nodes[0].1.clone(),
                })
                .collect(),
        );
    }
    let sequence: Vec<usize> = levels.iter().map(|l| l.attribute).collect();
    let tables = levels
        .into_iter()
        .enumerate()
        .map(|(depth, layer)| table_for(&sequence[..depth], layer))
        .collect();
    LpTree::Uicp(tables)
}

/// Builds a table whose conditions use a minimal set of ancestors: each
/// ancestor is dropped, front to back, while the ranking stays a function
/// of the remaining ones.
pub(crate) fn table_for(ancestors: &[usize], layer: Layer) -> CpTable {
    let mut kept: Vec<usize> = (0..ancestors.len()).collect();
    let project = |kept: &[usize], path: &[ValueId]| -> Vec<ValueId> { kept.iter().map(|&i| path[i]).collect() };
    let determines = |kept: &[usize]| {
        let mut seen: HashMap<Vec<ValueId>, &Ranking> = HashMap::new();
        layer
            .nodes
            .iter()
            .all(|(path, r)| *seen.entry(project(kept, path)).or_insert(r) == r)
    };
    let mut i = 0;
    while i < kept.len() {
        let mut candidate = kept.clone();
        candidate.remove(i);
        if determines(&candidate) {
            kept = candidate;
        } else {
            i += 1;
        }
    }

    let mut rows: Vec<(Vec<ValueId>, Ranking)> = Vec::new();
    for (path, r) in &layer.nodes {
        let key = project(&kept, path);
        if !rows.iter().any(|(k, _)| *k == key) {
            rows.push((key, r.clone()));
        }
    }
    if kept.is_empty() {
        return CpTable::unconditional(layer.attribute, rows.remove(0).1);
    }
    let default = most_frequent(rows.iter().map(|(_, r)| r)).clone();
    let rows = rows
        .into_iter()
        .map(|(key, ranking)| {
            let mut condition: Vec<(usize, ValueId)> = kept.iter().zip(key).map(|(&i, v)| (ancestors[i], v)).collect();
            condition.sort_unstable();
            CptRow { condition, ranking }
        })
        .collect();
    CpTable {
        attribute: layer.attribute,
        rows,
        default,
    }
}

/// Most frequent item; ties go to the earliest.
fn most_frequent<'a>(items: impl Iterator<Item = &'a Ranking> + Clone) -> &'a Ranking {
    let mut best: Option<(&Ranking, usize)> = None;
    for r in items.clone() {
        let n = items.clone().filter(|x| *x == r).count();
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((r, n));
        }
    }
    best.expect("at least one row").0
}
