//! Random hidden models and example sets for experiments and tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::{
    enumerate_alternatives, AttributeSpec, ComparisonExample, Domain, DomainError, ExampleSource, FeedbackConstraint,
    ValueId,
};
use crate::model::{
    compare, trace, Branch, ComparisonOutcome, CpTable, CptRow, LocalOrder, LpTree, Ranking, TreeKind, TreeNode,
};

/// Chance that a CICP subtree below the root stops at a leaf.
pub const CICP_LEAF_PROBABILITY: f64 = 0.3;

pub fn random_ranking<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Ranking {
    let mut values: Vec<ValueId> = (0..len).map(|v| v as ValueId).collect();
    values.shuffle(rng);
    Ranking::new(values)
}

/// A domain with `1..=max_attributes` attributes of `2..=max_values` values,
/// named `X0, X1, ...` with values `v0, v1, ...`.
pub fn random_domain<R: Rng + ?Sized>(max_attributes: usize, max_values: usize, rng: &mut R) -> Domain {
    let p = rng.gen_range(1..=max_attributes.max(1));
    let attributes = (0..p)
        .map(|a| {
            let n = rng.gen_range(2..=max_values.max(2));
            AttributeSpec::new(format!("X{a}"), (0..n).map(|v| format!("v{v}")))
        })
        .collect();
    Domain::new(attributes).expect("generated domain is valid")
}

/// A random tree using every attribute on every path (CICP: every path
/// until a random leaf). UICP levels below the root are conditioned on one
/// random earlier attribute half of the time.
pub fn sample_tree<R: Rng + ?Sized>(kind: TreeKind, domain: &Domain, rng: &mut R) -> LpTree {
    let mut sequence: Vec<usize> = (0..domain.len()).collect();
    sequence.shuffle(rng);
    match kind {
        TreeKind::Uiup => LpTree::Uiup(
            sequence
                .into_iter()
                .map(|a| LocalOrder {
                    attribute: a,
                    ranking: random_ranking(domain.value_count(a), rng),
                })
                .collect(),
        ),
        TreeKind::Uicp => {
            let mut body = Vec::with_capacity(sequence.len());
            for (level, &a) in sequence.iter().enumerate() {
                let n = domain.value_count(a);
                if level == 0 || rng.gen_bool(0.5) {
                    body.push(CpTable::unconditional(a, random_ranking(n, rng)));
                    continue;
                }
                let parent = sequence[rng.gen_range(0..level)];
                let rows: Vec<CptRow> = (0..domain.value_count(parent))
                    .map(|v| CptRow {
                        condition: vec![(parent, v as ValueId)],
                        ranking: random_ranking(n, rng),
                    })
                    .collect();
                let default = rows[0].ranking.clone();
                body.push(CpTable {
                    attribute: a,
                    rows,
                    default,
                });
            }
            LpTree::Uicp(body)
        }
        TreeKind::Cicp => LpTree::Cicp(sample_branch(domain, &mut Vec::new(), rng)),
    }
}

fn sample_branch<R: Rng + ?Sized>(domain: &Domain, path: &mut Vec<usize>, rng: &mut R) -> Branch {
    let free: Vec<usize> = (0..domain.len()).filter(|a| !path.contains(a)).collect();
    if free.is_empty() || (!path.is_empty() && rng.gen_bool(CICP_LEAF_PROBABILITY)) {
        return Branch::Leaf;
    }
    let a = *free.choose(rng).expect("free attribute");
    let ranking = random_ranking(domain.value_count(a), rng);
    path.push(a);
    let children = (0..ranking.len()).map(|_| sample_branch(domain, path, rng)).collect();
    path.pop();
    Branch::node(TreeNode::new(a, ranking, children))
}

fn two_distinct<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Up to `max` random importance, local and conditional orders. The set may
/// well be cyclic; check it before learning.
pub fn random_constraints<R: Rng + ?Sized>(domain: &Domain, max: usize, rng: &mut R) -> Vec<FeedbackConstraint> {
    let name = |a: usize| domain.attribute_name(a);
    let value = |a: usize, v: usize| domain.value_name(a, v as ValueId);
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(0..=max) {
        let single = domain.len() < 2;
        let (a, b) = if single {
            (0, 0)
        } else {
            two_distinct(domain.len(), rng)
        };
        if !single && rng.gen_bool(0.4) {
            out.push(FeedbackConstraint::importance(name(a), name(b)));
            continue;
        }
        let (p, q) = two_distinct(domain.value_count(a), rng);
        if single || rng.gen_bool(0.5) {
            out.push(FeedbackConstraint::local_order(name(a), value(a, p), value(a, q)));
        } else {
            let v = value(b, rng.gen_range(0..domain.value_count(b)));
            out.push(FeedbackConstraint::conditional_order(
                name(a),
                value(a, p),
                value(a, q),
                (name(b), v),
            ));
        }
    }
    out
}

/// Every strictly ordered pair, better side first, in enumeration order.
pub fn complete_examples(tree: &LpTree, domain: &Domain, limit: u64) -> Result<Vec<ComparisonExample>, DomainError> {
    let alts = enumerate_alternatives(domain, limit)?;
    let traces: Vec<u64> = alts.iter().map(|a| trace(tree, a)).collect();
    let mut out = Vec::new();
    for i in 0..alts.len() {
        for j in i + 1..alts.len() {
            let (better, worse) = match traces[i].cmp(&traces[j]) {
                std::cmp::Ordering::Less => (i, j),
                std::cmp::Ordering::Greater => (j, i),
                std::cmp::Ordering::Equal => continue,
            };
            out.push(ComparisonExample {
                better: alts[better].clone(),
                worse: alts[worse].clone(),
                source: ExampleSource::FileImport,
            });
        }
    }
    Ok(out)
}

/// Up to `count` random strictly ordered pairs under `tree`, each reversed
/// with probability `noise`. Fewer come back only when strict pairs are too
/// rare to find.
pub fn sample_examples<R: Rng + ?Sized>(
    tree: &LpTree,
    domain: &Domain,
    count: usize,
    noise: f64,
    rng: &mut R,
) -> Vec<ComparisonExample> {
    let mut out = Vec::with_capacity(count);
    let mut misses = 0usize;
    while out.len() < count && misses < 1000 + 100 * count {
        let a = domain.alternative_at(rng.gen_range(0..domain.size()));
        let b = domain.alternative_at(rng.gen_range(0..domain.size()));
        let (better, worse) = match compare(tree, &a, &b) {
            ComparisonOutcome::FirstPreferred => (a, b),
            ComparisonOutcome::SecondPreferred => (b, a),
            ComparisonOutcome::Equivalent => {
                misses += 1;
                continue;
            }
        };
        let (better, worse) = if rng.gen_bool(noise) {
            (worse, better)
        } else {
            (better, worse)
        };
        out.push(ComparisonExample {
            better,
            worse,
            source: ExampleSource::FileImport,
        });
    }
    out
}
