use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Branch, CpTable, LpTree, Ranking};
use crate::domain::Domain;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Where in the tree, e.g. `level 2` or `root/1/0`.
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            location: location.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.location, v.message))
            .collect();
        f.write_str(&parts.join("; "))
    }
}

fn check_ranking(
    report: &mut ValidationReport,
    domain: &Domain,
    location: &str,
    attribute: usize,
    ranking: &Ranking,
) -> bool {
    if attribute >= domain.len() {
        report.push(location, format!("attribute index {attribute} out of range"));
        return false;
    }
    let n = domain.value_count(attribute);
    if !ranking.is_permutation_of(n) {
        report.push(
            location,
            format!(
                "order on {} is not a permutation of its {n} values",
                domain.attribute_name(attribute)
            ),
        );
        return false;
    }
    true
}

fn check_sequence(report: &mut ValidationReport, domain: &Domain, attributes: impl Iterator<Item = usize>) {
    let mut seen = vec![false; domain.len()];
    for (level, a) in attributes.enumerate() {
        if a < domain.len() && std::mem::replace(&mut seen[a], true) {
            report.push(
                format!("level {level}"),
                format!("attribute {} appears more than once", domain.attribute_name(a)),
            );
        }
    }
}

fn check_table(report: &mut ValidationReport, domain: &Domain, level: usize, table: &CpTable, ancestors: &[usize]) {
    let loc = format!("level {level}");
    if !check_ranking(report, domain, &loc, table.attribute, &table.default) {
        return;
    }
    for (r, row) in table.rows.iter().enumerate() {
        let row_loc = format!("level {level} row {r}");
        check_ranking(report, domain, &row_loc, table.attribute, &row.ranking);
        let mut prev: Option<usize> = None;
        for &(a, v) in &row.condition {
            if !ancestors.contains(&a) {
                report.push(&row_loc, format!("condition attribute #{a} is not an earlier level"));
            } else if v as usize >= domain.value_count(a) {
                report.push(&row_loc, format!("condition value #{v} out of range"));
            }
            if prev.is_some_and(|p| p >= a) {
                report.push(&row_loc, "condition attributes must be sorted and distinct");
            }
            prev = Some(a);
        }
    }
    // Two rows overlap unless some shared attribute has different values.
    for i in 0..table.rows.len() {
        for j in i + 1..table.rows.len() {
            let (ri, rj) = (&table.rows[i], &table.rows[j]);
            let exclusive = ri
                .condition
                .iter()
                .any(|&(a, v)| rj.condition.iter().any(|&(b, w)| a == b && v != w));
            if !exclusive {
                report.push(&loc, format!("rows {i} and {j} are not mutually exclusive"));
            }
        }
    }
}

fn check_branch(
    report: &mut ValidationReport,
    domain: &Domain,
    branch: &Branch,
    path: &mut Vec<usize>,
    location: &mut String,
) {
    let Branch::Node(node) = branch else { return };
    let a = node.attribute();
    if !check_ranking(report, domain, location, a, node.ranking()) {
        return;
    }
    if path.contains(&a) {
        report.push(
            location.clone(),
            format!("attribute {} repeated on a path", domain.attribute_name(a)),
        );
    }
    let n = domain.value_count(a);
    if node.children().len() != n {
        report.push(
            location.clone(),
            format!(
                "node on {} has {} children, needs {n}",
                domain.attribute_name(a),
                node.children().len()
            ),
        );
    }
    path.push(a);
    for (k, child) in node.children().iter().enumerate() {
        let len = location.len();
        location.push_str(&format!("/{k}"));
        check_branch(report, domain, child, path, location);
        location.truncate(len);
    }
    path.pop();
}

/// Structural check of `tree` against `domain`; an empty report means valid.
pub fn validate_tree(tree: &LpTree, domain: &Domain) -> ValidationReport {
    let mut report = ValidationReport::default();
    match tree {
        LpTree::Uiup(body) => {
            for (level, order) in body.iter().enumerate() {
                check_ranking(
                    &mut report,
                    domain,
                    &format!("level {level}"),
                    order.attribute,
                    &order.ranking,
                );
            }
            check_sequence(&mut report, domain, body.iter().map(|o| o.attribute));
        }
        LpTree::Uicp(body) => {
            for (level, table) in body.iter().enumerate() {
                let ancestors: Vec<usize> = body[..level].iter().map(|t| t.attribute).collect();
                check_table(&mut report, domain, level, table, &ancestors);
            }
            check_sequence(&mut report, domain, body.iter().map(|t| t.attribute));
        }
        LpTree::Cicp(root) => check_branch(&mut report, domain, root, &mut Vec::new(), &mut "root".to_string()),
    }
    report
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{CptRow, TreeNode};
    use super::*;
    use crate::domain::fixtures::car;

    #[test]
    fn figure_trees_are_valid() {
        let d = car();
        assert!(validate_tree(&fig1(&d), &d).is_valid());
        assert!(validate_tree(&fig2a(&d), &d).is_valid());
        assert!(validate_tree(&fig2b(&d), &d).is_valid());
    }

    #[test]
    fn wrong_child_count() {
        let d = car();
        let root = TreeNode::new(0, Ranking::new(vec![0, 1, 2]), vec![Branch::Leaf, Branch::Leaf]);
        let report = validate_tree(&LpTree::Cicp(Branch::node(root)), &d);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].message.contains("needs 3"));
    }

    #[test]
    fn repeated_attribute_on_path() {
        let d = car();
        let p = 2;
        let inner = TreeNode::with_leaves(p, Ranking::identity(3));
        let root = TreeNode::new(
            p,
            Ranking::identity(3),
            vec![Branch::node(inner), Branch::Leaf, Branch::Leaf],
        );
        let report = validate_tree(&LpTree::Cicp(Branch::node(root)), &d);
        assert!(report.violations.iter().any(|v| v.message.contains("repeated")));
        assert_eq!(report.violations[0].location, "root/0");
    }

    #[test]
    fn bad_orders_and_sequences() {
        let d = car();
        let t = LpTree::Uiup(vec![
            super::super::LocalOrder::new(0, vec![0, 1]),
            super::super::LocalOrder::new(1, vec![0, 1]),
            super::super::LocalOrder::new(1, vec![1, 0]),
        ]);
        let report = validate_tree(&t, &d);
        assert_eq!(report.violations.len(), 2);
    }

    #[test]
    fn overlapping_rows() {
        let d = car();
        let mut t = fig2b(&d);
        if let LpTree::Uicp(body) = &mut t {
            body[1].rows.push(CptRow {
                condition: vec![],
                ranking: Ranking::identity(2),
            });
            body[2].rows[0].condition = vec![(3, 0)];
        }
        let report = validate_tree(&t, &d);
        assert!(report
            .violations
            .iter()
            .any(|v| v.message.contains("mutually exclusive")));
        assert!(report
            .violations
            .iter()
            .any(|v| v.message.contains("not an earlier level")));
    }
}
