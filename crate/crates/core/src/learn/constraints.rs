//! Feasibility and verification of feedback constraints.
//!
//! A local-order constraint `X: p > d | C=c` binds every X-node (or table
//! row) that alternatives with `C=c` can reach. When the constraints on X
//! cannot all hold in one ranking, X's ranking has to depend on the
//! condition attributes, so each of them must be tested before X; these
//! implied edges join the importance graph.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{Condition, Domain, DomainError, FeedbackConstraint, ResolvedConstraint, ValueId};
use crate::model::{Branch, CpTable, LpTree, Model, Ranking, TreeKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conflict {
    /// Attributes on an importance cycle, starting from the first declared.
    /// `implied` marks cycles that need edges implied by conditional orders.
    ImportanceCycle { attributes: Vec<String>, implied: bool },
    /// A value cycle among the orders that hold together in `context`.
    LocalCycle {
        attribute: String,
        context: Vec<Condition>,
        values: Vec<String>,
    },
    /// UIUP rankings are context-free, so every order on the attribute must
    /// hold at once.
    ContextDependent { attribute: String, values: Vec<String> },
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ImportanceCycle { attributes, implied } => {
                write!(f, "importance cycle {}", attributes.join(" > "))?;
                if *implied {
                    f.write_str(" (including precedence implied by conditional orders)")?;
                }
                Ok(())
            }
            Self::LocalCycle {
                attribute,
                context,
                values,
            } => {
                write!(f, "order cycle on {attribute}: {}", values.join(" > "))?;
                if !context.is_empty() {
                    let ctx: Vec<String> = context.iter().map(|c| format!("{}={}", c.attribute, c.value)).collect();
                    write!(f, " when {}", ctx.join(","))?;
                }
                Ok(())
            }
            Self::ContextDependent { attribute, values } => write!(
                f,
                "orders on {attribute} form the cycle {} across conditions; a UIUP ranking cannot depend on context",
                values.join(" > ")
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub conflicts: Vec<Conflict>,
}

impl FeasibilityReport {
    fn new(conflicts: Vec<Conflict>) -> Self {
        Self {
            feasible: conflicts.is_empty(),
            conflicts,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.feasible {
            return f.write_str("feasible");
        }
        let parts: Vec<String> = self.conflicts.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Rule {
    pub preferred: ValueId,
    pub dispreferred: ValueId,
    pub condition: Option<(usize, ValueId)>,
}

/// Constraints in the form the learners consume.
#[derive(Debug, Clone, Default)]
pub(crate) struct Compiled {
    /// `preds[x]`: attributes that must be tested before `x`.
    pub preds: Vec<Vec<usize>>,
    pub rules: Vec<Vec<Rule>>,
    /// Attributes whose ranking has to depend on their condition attributes.
    pub conditioned: Vec<bool>,
}

impl Compiled {
    pub fn unconstrained(attributes: usize) -> Self {
        Self {
            preds: vec![Vec::new(); attributes],
            rules: vec![Vec::new(); attributes],
            conditioned: vec![false; attributes],
        }
    }

    /// Edges `preferred -> dispreferred` of the rules binding `attribute`
    /// where `context` gives the known attribute values.
    pub fn binding(&self, attribute: usize, context: impl Fn(usize) -> Option<ValueId>) -> Vec<(ValueId, ValueId)> {
        self.rules[attribute]
            .iter()
            .filter(|r| match r.condition {
                None => true,
                Some((c, v)) => context(c).is_none_or(|x| x == v),
            })
            .map(|r| (r.preferred, r.dispreferred))
            .collect()
    }

    pub fn condition_attributes(&self, attribute: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.rules[attribute]
            .iter()
            .filter_map(|r| r.condition.map(|(c, _)| c))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn adjacency(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for (a, b) in edges {
        adj[a].push(b);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// First cycle met by depth-first search from nodes in index order, rotated
/// to start at its smallest node.
pub(crate) fn find_cycle(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    fn visit(u: usize, adj: &[Vec<usize>], color: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        color[u] = 1;
        stack.push(u);
        for &v in &adj[u] {
            if color[v] == 1 {
                let at = stack.iter().position(|&x| x == v).expect("grey node on stack");
                return Some(stack[at..].to_vec());
            }
            if color[v] == 0 {
                if let Some(c) = visit(v, adj, color, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        color[u] = 2;
        None
    }
    let mut color = vec![0u8; adj.len()];
    for start in 0..adj.len() {
        if color[start] == 0 {
            if let Some(mut cycle) = visit(start, adj, &mut color, &mut Vec::new()) {
                let min = (0..cycle.len()).min_by_key(|&i| cycle[i]).expect("non-empty cycle");
                cycle.rotate_left(min);
                return Some(cycle);
            }
        }
    }
    None
}

fn value_cycle(n: usize, edges: impl IntoIterator<Item = (ValueId, ValueId)>) -> Option<Vec<usize>> {
    find_cycle(&adjacency(n, edges.into_iter().map(|(a, b)| (a as usize, b as usize))))
}

fn value_names(domain: &Domain, attribute: usize, values: &[usize]) -> Vec<String> {
    values
        .iter()
        .map(|&v| domain.value_name(attribute, v as ValueId).to_string())
        .collect()
}

type Assignment = Vec<(usize, ValueId)>;

/// A value cycle among the rules on `attribute` that hold together in some
/// assignment of its condition attributes, with that assignment.
fn context_cycle(domain: &Domain, attribute: usize, rules: &[Rule]) -> Option<(Assignment, Vec<usize>)> {
    let mut slots: Vec<(usize, Vec<Option<ValueId>>)> = Vec::new();
    for r in rules {
        if let Some((c, v)) = r.condition {
            match slots.iter_mut().find(|(a, _)| *a == c) {
                Some((_, vals)) => vals.push(Some(v)),
                None => slots.push((c, vec![Some(v)])),
            }
        }
    }
    slots.sort_unstable_by_key(|(a, _)| *a);
    for (a, vals) in &mut slots {
        vals.sort_unstable();
        vals.dedup();
        // `None` stands for any value no rule mentions.
        if vals.len() < domain.value_count(*a) {
            vals.insert(0, None);
        }
    }
    let mut choice = vec![0usize; slots.len()];
    loop {
        let context: Vec<(usize, Option<ValueId>)> =
            slots.iter().zip(&choice).map(|((a, vals), &i)| (*a, vals[i])).collect();
        let holds = |r: &&Rule| match r.condition {
            None => true,
            Some((c, v)) => context.iter().any(|&(a, x)| a == c && x == Some(v)),
        };
        let edges = rules.iter().filter(holds).map(|r| (r.preferred, r.dispreferred));
        if let Some(cycle) = value_cycle(domain.value_count(attribute), edges) {
            let ctx = context.into_iter().filter_map(|(a, x)| x.map(|v| (a, v))).collect();
            return Some((ctx, cycle));
        }
        // odometer, last slot fastest
        let mut k = slots.len();
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            choice[k] += 1;
            if choice[k] < slots[k].1.len() {
                break;
            }
            choice[k] = 0;
        }
    }
}

fn analyse(
    constraints: &[FeedbackConstraint],
    domain: &Domain,
    kind: Option<TreeKind>,
) -> Result<(FeasibilityReport, Compiled), DomainError> {
    let p = domain.len();
    let mut compiled = Compiled::unconstrained(p);
    let mut importance = Vec::new();
    for c in constraints {
        match c.resolve(domain)? {
            ResolvedConstraint::Importance { more, less } => importance.push((more, less)),
            ResolvedConstraint::LocalOrder {
                attribute,
                preferred,
                dispreferred,
                condition,
            } => compiled.rules[attribute].push(Rule {
                preferred,
                dispreferred,
                condition,
            }),
        }
    }
    let attr_names = |cycle: Vec<usize>| -> Vec<String> {
        cycle
            .into_iter()
            .map(|a| domain.attribute_name(a).to_string())
            .collect()
    };

    let mut conflicts = Vec::new();
    let importance_cycle = find_cycle(&adjacency(p, importance.iter().copied()));
    if let Some(cycle) = &importance_cycle {
        conflicts.push(Conflict::ImportanceCycle {
            attributes: attr_names(cycle.clone()),
            implied: false,
        });
    }

    let mut local_ok = true;
    for x in 0..p {
        let rules = &compiled.rules[x];
        let Some(merged) = value_cycle(
            domain.value_count(x),
            rules.iter().map(|r| (r.preferred, r.dispreferred)),
        ) else {
            continue;
        };
        compiled.conditioned[x] = true;
        if let Some((context, cycle)) = context_cycle(domain, x, rules) {
            local_ok = false;
            conflicts.push(Conflict::LocalCycle {
                attribute: domain.attribute_name(x).to_string(),
                context: context
                    .into_iter()
                    .map(|(a, v)| Condition {
                        attribute: domain.attribute_name(a).to_string(),
                        value: domain.value_name(a, v).to_string(),
                    })
                    .collect(),
                values: value_names(domain, x, &cycle),
            });
        } else if kind == Some(TreeKind::Uiup) {
            conflicts.push(Conflict::ContextDependent {
                attribute: domain.attribute_name(x).to_string(),
                values: value_names(domain, x, &merged),
            });
        }
    }

    let mut edges = importance.clone();
    if kind != Some(TreeKind::Uiup) {
        for x in 0..p {
            if compiled.conditioned[x] {
                edges.extend(compiled.condition_attributes(x).into_iter().map(|c| (c, x)));
            }
        }
        if importance_cycle.is_none() && local_ok {
            if let Some(cycle) = find_cycle(&adjacency(p, edges.iter().copied())) {
                conflicts.push(Conflict::ImportanceCycle {
                    attributes: attr_names(cycle),
                    implied: true,
                });
            }
        }
    }
    for (a, b) in edges {
        compiled.preds[b].push(a);
    }
    for list in &mut compiled.preds {
        list.sort_unstable();
        list.dedup();
    }
    Ok((FeasibilityReport::new(conflicts), compiled))
}

/// Kind-independent feasibility: some tree kind can satisfy `constraints`.
pub fn check_constraints(
    constraints: &[FeedbackConstraint],
    domain: &Domain,
) -> Result<FeasibilityReport, DomainError> {
    analyse(constraints, domain, None).map(|(r, _)| r)
}

/// Feasibility for trees of a given kind.
pub fn check_constraints_for(
    constraints: &[FeedbackConstraint],
    domain: &Domain,
    kind: TreeKind,
) -> Result<FeasibilityReport, DomainError> {
    analyse(constraints, domain, Some(kind)).map(|(r, _)| r)
}

pub(crate) fn compile(
    constraints: &[FeedbackConstraint],
    domain: &Domain,
    kind: TreeKind,
) -> Result<(FeasibilityReport, Compiled), DomainError> {
    analyse(constraints, domain, Some(kind))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub satisfied: Vec<FeedbackConstraint>,
    pub violated: Vec<FeedbackConstraint>,
}

impl ConstraintReport {
    pub fn all_satisfied(&self) -> bool {
        self.violated.is_empty()
    }
}

/// Checks every constraint against every tree of `model`.
pub fn verify_constraints(
    model: &Model,
    constraints: &[FeedbackConstraint],
    domain: &Domain,
) -> Result<ConstraintReport, DomainError> {
    let mut report = ConstraintReport::default();
    for c in constraints {
        let resolved = c.resolve(domain)?;
        if model.trees().iter().all(|t| tree_satisfies(t, &resolved, domain)) {
            report.satisfied.push(c.clone());
        } else {
            report.violated.push(c.clone());
        }
    }
    Ok(report)
}

const REACH_ENUMERATION_LIMIT: usize = 1 << 16;

/// Rankings of `table` that some alternative with `fixed` can be ranked by.
fn reachable<'t>(
    table: &'t CpTable,
    ancestors: &[usize],
    domain: &Domain,
    fixed: Option<(usize, ValueId)>,
) -> Vec<&'t Ranking> {
    let fixed = fixed.filter(|(c, _)| ancestors.contains(c));
    let mut attrs: Vec<usize> = table
        .rows
        .iter()
        .flat_map(|r| r.condition.iter().map(|&(a, _)| a))
        .filter(|&a| fixed.is_none_or(|(c, _)| c != a))
        .collect();
    attrs.sort_unstable();
    attrs.dedup();
    let combos = attrs
        .iter()
        .try_fold(1usize, |acc, &a| acc.checked_mul(domain.value_count(a)))
        .filter(|&n| n <= REACH_ENUMERATION_LIMIT);
    let Some(combos) = combos else {
        // Too many: every row not excluded by `fixed`, and the default.
        let mut out: Vec<&Ranking> = table
            .rows
            .iter()
            .filter(|r| fixed.is_none_or(|(c, v)| r.condition.iter().all(|&(a, x)| a != c || x == v)))
            .map(|r| &r.ranking)
            .collect();
        out.push(&table.default);
        return out;
    };
    let mut out: Vec<&Ranking> = Vec::new();
    for mut code in 0..combos {
        let mut values = vec![0 as ValueId; attrs.len()];
        for (slot, &a) in values.iter_mut().zip(&attrs).rev() {
            let n = domain.value_count(a);
            *slot = (code % n) as ValueId;
            code /= n;
        }
        let lookup = |a: usize| match fixed {
            Some((c, v)) if c == a => Some(v),
            _ => attrs.iter().position(|&x| x == a).map(|i| values[i]),
        };
        let r = table.ranking_for(lookup);
        if !out.iter().any(|x| std::ptr::eq(*x, r)) {
            out.push(r);
        }
    }
    out
}

fn branch_satisfies(branch: &Branch, c: &ResolvedConstraint, path: &mut Vec<(usize, ValueId)>) -> bool {
    let Branch::Node(node) = branch else { return true };
    let a = node.attribute();
    let here = match *c {
        ResolvedConstraint::Importance { more, less } => a != less || path.iter().any(|&(x, _)| x == more),
        ResolvedConstraint::LocalOrder {
            attribute,
            preferred,
            dispreferred,
            condition,
        } => {
            let reachable = condition.is_none_or(|(cond, v)| path.iter().all(|&(x, w)| x != cond || w == v));
            a != attribute || !reachable || node.ranking().prefers(preferred, dispreferred)
        }
    };
    here && node.ranking().values().iter().zip(node.children()).all(|(&v, child)| {
        path.push((a, v));
        let ok = branch_satisfies(child, c, path);
        path.pop();
        ok
    })
}

pub fn tree_satisfies(tree: &LpTree, constraint: &ResolvedConstraint, domain: &Domain) -> bool {
    if let LpTree::Cicp(root) = tree {
        return branch_satisfies(root, constraint, &mut Vec::new());
    }
    let sequence = tree.sequence().expect("chain tree");
    let position = |a: usize| sequence.iter().position(|&x| x == a);
    match *constraint {
        ResolvedConstraint::Importance { more, less } => match (position(more), position(less)) {
            (_, None) => true,
            (Some(m), Some(l)) => m < l,
            (None, Some(_)) => false,
        },
        ResolvedConstraint::LocalOrder {
            attribute,
            preferred,
            dispreferred,
            condition,
        } => {
            let Some(level) = position(attribute) else { return true };
            match tree {
                LpTree::Uiup(body) => body[level].ranking.prefers(preferred, dispreferred),
                LpTree::Uicp(body) => reachable(&body[level], &sequence[..level], domain, condition)
                    .iter()
                    .all(|r| r.prefers(preferred, dispreferred)),
                LpTree::Cicp(_) => unreachable!(),
            }
        }
    }
}
