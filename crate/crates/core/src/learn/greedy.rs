//! Greedy tree induction.
//!
//! Every level (or node) tries each admissible attribute, fits a ranking on
//! the examples it would decide and keeps the attribute with the best
//! agreed-minus-disagreed count; ties go to the first declared attribute.

use std::collections::HashMap;

use super::constraints::Compiled;
use super::fit::{fit_order, Tally};
use crate::domain::{ComparisonExample, Domain, ValueId};
use crate::model::{table_for, Branch, CpTable, Layer, LocalOrder, LpTree, Ranking, TreeKind, TreeNode};

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Options {
    pub max_depth: Option<usize>,
    pub exact: bool,
}

type Examples<'a> = [&'a ComparisonExample];

fn tally_on(domain: &Domain, attribute: usize, examples: &Examples<'_>) -> Tally {
    let mut t = Tally::new(domain.value_count(attribute));
    for e in examples {
        let (b, w) = (e.better.value(attribute), e.worse.value(attribute));
        if b != w {
            t.add(b, w);
        }
    }
    t
}

fn admissible<'c>(c: &'c Compiled, placed: impl Fn(usize) -> bool + 'c) -> impl Iterator<Item = usize> + 'c {
    (0..c.preds.len()).filter(move |&x| !placed(x) && c.preds[x].iter().all(|&p| placed(p)))
}

/// Keeps the first strictly better candidate.
fn keep_best<T>(best: &mut Option<(i64, T)>, score: i64, candidate: T) {
    if best.as_ref().is_none_or(|(s, _)| score > *s) {
        *best = Some((score, candidate));
    }
}

pub(crate) fn grow(kind: TreeKind, examples: &Examples<'_>, domain: &Domain, c: &Compiled, opts: Options) -> LpTree {
    match kind {
        TreeKind::Uiup => grow_uiup(examples, domain, c, opts),
        TreeKind::Uicp => grow_uicp(examples, domain, c, opts),
        TreeKind::Cicp => grow_cicp(examples, domain, c, opts),
    }
}

fn level_limit(domain: &Domain, opts: Options) -> usize {
    opts.max_depth.unwrap_or(usize::MAX).min(domain.len())
}

pub(crate) fn grow_uiup(examples: &Examples<'_>, domain: &Domain, c: &Compiled, opts: Options) -> LpTree {
    let mut used = vec![false; domain.len()];
    let mut undecided: Vec<&ComparisonExample> = examples.to_vec();
    let mut body = Vec::new();
    while body.len() < level_limit(domain, opts) {
        let mut best = None;
        for x in admissible(c, |a| used[a]) {
            let required = c.binding(x, |_| None);
            let (ranking, score) = fit_order(&tally_on(domain, x, &undecided), &required, opts.exact);
            keep_best(&mut best, score, (x, ranking));
        }
        let Some((_, (x, ranking))) = best else { break };
        used[x] = true;
        undecided.retain(|e| e.better.value(x) == e.worse.value(x));
        body.push(LocalOrder { attribute: x, ranking });
    }
    LpTree::Uiup(body)
}

/// Rankings for one UICP level, keyed by values of `keys`.
struct LevelFit {
    keys: Vec<usize>,
    nodes: Vec<(Vec<ValueId>, Ranking)>,
}

/// Fits `x` per context. Normally a context is one observed assignment of
/// the levels above, and every constraint on `x` binds. When the
/// constraints on `x` depend on context, contexts are all assignments of its
/// condition attributes and only the constraints holding there bind.
fn fit_level(
    x: usize,
    sequence: &[usize],
    examples: &Examples<'_>,
    domain: &Domain,
    c: &Compiled,
    opts: Options,
) -> (i64, LevelFit) {
    let decided: Vec<&ComparisonExample> = examples
        .iter()
        .copied()
        .filter(|e| e.better.value(x) != e.worse.value(x))
        .collect();
    let keys = if c.conditioned[x] {
        c.condition_attributes(x)
    } else {
        sequence.to_vec()
    };
    let key_of = |e: &ComparisonExample| -> Vec<ValueId> { keys.iter().map(|&a| e.better.value(a)).collect() };

    let mut groups: Vec<(Vec<ValueId>, Vec<&ComparisonExample>)> = Vec::new();
    if c.conditioned[x] {
        let total: usize = keys.iter().map(|&a| domain.value_count(a)).product();
        for mut code in 0..total {
            let mut key = vec![0 as ValueId; keys.len()];
            for (slot, &a) in key.iter_mut().zip(&keys).rev() {
                *slot = (code % domain.value_count(a)) as ValueId;
                code /= domain.value_count(a);
            }
            groups.push((key, Vec::new()));
        }
        let index: HashMap<Vec<ValueId>, usize> = groups.iter().enumerate().map(|(i, (k, _))| (k.clone(), i)).collect();
        for e in decided {
            groups[index[&key_of(e)]].1.push(e);
        }
    } else {
        let mut index: HashMap<Vec<ValueId>, usize> = HashMap::new();
        for e in decided {
            let key = key_of(e);
            let i = *index.entry(key.clone()).or_insert_with(|| {
                groups.push((key, Vec::new()));
                groups.len() - 1
            });
            groups[i].1.push(e);
        }
    }

    if groups.is_empty() {
        let (ranking, score) = fit_order(&Tally::new(domain.value_count(x)), &c.binding(x, |_| None), opts.exact);
        let fit = LevelFit {
            keys: Vec::new(),
            nodes: vec![(Vec::new(), ranking)],
        };
        return (score, fit);
    }
    let mut total = 0;
    let mut nodes = Vec::with_capacity(groups.len());
    for (key, members) in groups {
        let lookup = |a: usize| keys.iter().position(|&k| k == a).map(|i| key[i]);
        let required = if c.conditioned[x] {
            c.binding(x, lookup)
        } else {
            c.binding(x, |_| None)
        };
        let (ranking, score) = fit_order(&tally_on(domain, x, &members), &required, opts.exact);
        total += score;
        nodes.push((key, ranking));
    }
    (total, LevelFit { keys, nodes })
}

pub(crate) fn grow_uicp(examples: &Examples<'_>, domain: &Domain, c: &Compiled, opts: Options) -> LpTree {
    let mut used = vec![false; domain.len()];
    let mut sequence = Vec::new();
    let mut undecided: Vec<&ComparisonExample> = examples.to_vec();
    let mut body: Vec<CpTable> = Vec::new();
    while body.len() < level_limit(domain, opts) {
        let mut best = None;
        for x in admissible(c, |a| used[a]) {
            let (score, fit) = fit_level(x, &sequence, &undecided, domain, c, opts);
            keep_best(&mut best, score, (x, fit));
        }
        let Some((_, (x, fit))) = best else { break };
        used[x] = true;
        sequence.push(x);
        undecided.retain(|e| e.better.value(x) == e.worse.value(x));
        body.push(table_for(
            &fit.keys,
            Layer {
                attribute: x,
                nodes: fit.nodes,
            },
        ));
    }
    LpTree::Uicp(body)
}

pub(crate) fn grow_cicp(examples: &Examples<'_>, domain: &Domain, c: &Compiled, opts: Options) -> LpTree {
    LpTree::Cicp(grow_branch(examples.to_vec(), &mut Vec::new(), domain, c, opts))
}

fn grow_branch(
    examples: Vec<&ComparisonExample>,
    path: &mut Vec<(usize, ValueId)>,
    domain: &Domain,
    c: &Compiled,
    opts: Options,
) -> Branch {
    let depth = path.len();
    let stop = depth > 0 && (examples.is_empty() || opts.max_depth.is_some_and(|m| depth >= m));
    if stop || depth == domain.len() {
        return Branch::Leaf;
    }
    let on_path = |a: usize| path.iter().any(|&(x, _)| x == a);
    let lookup = |a: usize| path.iter().find(|&&(x, _)| x == a).map(|&(_, v)| v);
    let mut best = None;
    for x in admissible(c, on_path) {
        let (ranking, score) = fit_order(&tally_on(domain, x, &examples), &c.binding(x, lookup), opts.exact);
        keep_best(&mut best, score, (x, ranking));
    }
    let Some((_, (x, ranking))) = best else {
        return Branch::Leaf;
    };
    let children = ranking
        .values()
        .iter()
        .map(|&v| {
            let passed: Vec<&ComparisonExample> = examples
                .iter()
                .copied()
                .filter(|e| e.better.value(x) == v && e.worse.value(x) == v)
                .collect();
            path.push((x, v));
            let child = grow_branch(passed, path, domain, c, opts);
            path.pop();
            child
        })
        .collect();
    Branch::node(TreeNode::new(x, ranking, children))
}
