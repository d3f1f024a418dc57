use std::collections::BTreeMap;

use super::{Branch, ComparisonOutcome, LpTree, ModelError};
use crate::domain::{enumerate_alternatives, Alternative, Domain};

/// Left-to-right index of the leaf `alternative` reaches.
///
/// UIUP and UICP trees are complete over their attribute sequence, so the
/// index is a mixed-radix number of per-level ranks and no tree is built.
pub fn trace(tree: &LpTree, alternative: &Alternative) -> u64 {
    match tree {
        LpTree::Uiup(body) => body.iter().fold(0, |acc, order| {
            acc * order.ranking.len() as u64 + order.ranking.rank_of(alternative.value(order.attribute)) as u64
        }),
        LpTree::Uicp(body) => body.iter().fold(0, |acc, table| {
            let ranking = table.ranking_for(|a| Some(alternative.value(a)));
            acc * ranking.len() as u64 + ranking.rank_of(alternative.value(table.attribute)) as u64
        }),
        LpTree::Cicp(root) => {
            let mut index = 0;
            let mut branch = root;
            while let Branch::Node(node) = branch {
                let rank = node.ranking().rank_of(alternative.value(node.attribute()));
                index += node.children()[..rank].iter().map(Branch::leaf_count).sum::<u64>();
                branch = &node.children()[rank];
            }
            index
        }
    }
}

pub fn leaf_count(tree: &LpTree) -> u64 {
    match tree {
        LpTree::Uiup(body) => body.iter().map(|o| o.ranking.len() as u64).product(),
        LpTree::Uicp(body) => body.iter().map(|t| t.default.len() as u64).product(),
        LpTree::Cicp(root) => root.leaf_count(),
    }
}

/// The preceding leaf wins; a shared leaf means equivalence.
pub fn compare(tree: &LpTree, first: &Alternative, second: &Alternative) -> ComparisonOutcome {
    let (a, b) = (trace(tree, first), trace(tree, second));
    match a.cmp(&b) {
        std::cmp::Ordering::Less => ComparisonOutcome::FirstPreferred,
        std::cmp::Ordering::Greater => ComparisonOutcome::SecondPreferred,
        std::cmp::Ordering::Equal => ComparisonOutcome::Equivalent,
    }
}

/// Equivalence classes of the total preorder, best class first. Members of a
/// class keep canonical enumeration order.
pub fn induced_order(tree: &LpTree, domain: &Domain, limit: u64) -> Result<Vec<Vec<Alternative>>, ModelError> {
    let mut classes: BTreeMap<u64, Vec<Alternative>> = BTreeMap::new();
    for alt in enumerate_alternatives(domain, limit)? {
        classes.entry(trace(tree, &alt)).or_default().push(alt);
    }
    Ok(classes.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::domain::fixtures::{alt, car, two_by_two};

    #[test]
    fn fig1_traces() {
        let d = car();
        let t = fig1(&d);
        let honda_sedan = alt(&d, &[("B", "s"), ("M", "h"), ("P", "l"), ("T", "a")]);
        let ford_sedan = alt(&d, &[("B", "s"), ("M", "f"), ("P", "l"), ("T", "a")]);
        assert_eq!(trace(&t, &honda_sedan), 3);
        assert_eq!(trace(&t, &ford_sedan), 4);
        let sport = alt(&d, &[("B", "r"), ("M", "h"), ("P", "g"), ("T", "m")]);
        assert_eq!(trace(&t, &sport), 5);
        let van = alt(&d, &[("B", "v"), ("M", "f"), ("P", "d"), ("T", "m")]);
        assert_eq!(trace(&t, &van), 0);
        assert_eq!(leaf_count(&t), 6);
    }

    #[test]
    fn fig1_comparisons() {
        let d = car();
        let t = fig1(&d);
        let honda_sedan = alt(&d, &[("B", "s"), ("M", "h"), ("P", "l"), ("T", "a")]);
        let ford_sedan = alt(&d, &[("B", "s"), ("M", "f"), ("P", "l"), ("T", "a")]);
        assert_eq!(
            compare(&t, &honda_sedan, &ford_sedan),
            ComparisonOutcome::FirstPreferred
        );
        assert_eq!(
            compare(&t, &ford_sedan, &honda_sedan),
            ComparisonOutcome::SecondPreferred
        );
        assert_eq!(compare(&t, &ford_sedan, &ford_sedan), ComparisonOutcome::Equivalent);
        let v1 = alt(&d, &[("B", "v"), ("M", "h"), ("P", "d"), ("T", "a")]);
        let v2 = alt(&d, &[("B", "v"), ("M", "f"), ("P", "d"), ("T", "m")]);
        assert_eq!(compare(&t, &v1, &v2), ComparisonOutcome::Equivalent);
    }

    /// Counts completions per leaf by brute force: a leaf fixes the attributes
    /// on its path, so its class size is the product of the remaining domains.
    #[test]
    fn fig1_class_sizes_match_completion_counts() {
        let d = car();
        let t = fig1(&d);
        let classes = induced_order(&t, &d, 100).unwrap();
        let sizes: Vec<usize> = classes.iter().map(Vec::len).collect();
        // v-branch leaves fix B,P (2*2 free: M,T); s-branch leaves fix B,M (3*2 free: P,T);
        // the sport leaf fixes only B (2*3*2).
        let expected = vec![2 * 2, 2 * 2, 2 * 2, 3 * 2, 3 * 2, 2 * 3 * 2];
        assert_eq!(sizes, expected);
        assert_eq!(sizes.iter().sum::<usize>(), 36);
        for (i, class) in classes.iter().enumerate() {
            assert!(class.iter().all(|a| trace(&t, a) == i as u64));
        }
    }

    #[test]
    fn full_uiup_has_singleton_classes() {
        let d = two_by_two();
        let t = uiup(&d, &[("A", &["a1", "a2"]), ("B", &["b1", "b2"])]);
        let classes = induced_order(&t, &d, 10).unwrap();
        assert_eq!(classes.len(), 4);
        assert!(classes.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn uicp_trace_follows_conditional_rows() {
        let d = car();
        let t = fig2b(&d);
        // sedan: h>f; minivan: f>h
        let sedan_h = alt(&d, &[("B", "s"), ("M", "h"), ("P", "d"), ("T", "a")]);
        let van_h = alt(&d, &[("B", "v"), ("M", "h"), ("P", "d"), ("T", "a")]);
        assert_eq!(trace(&t, &sedan_h), 0);
        assert_eq!(trace(&t, &van_h), 6 + 3);
        assert!(induced_order(&t, &d, 10).is_err());
    }
}
