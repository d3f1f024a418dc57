use rayon::prelude::*;

use crate::domain::Domain;
use crate::model::{LpForest, LpTree, Ranking};

use super::order::{count_inversions, positions};
use super::MetricError;

/// Largest domain on which distances between conditional trees are computed
/// by enumeration.
pub const ENUMERATION_LIMIT: u64 = 4096;

/// A complete lexicographic order: every attribute once, with `rank[v]` the
/// position of value `v`.
struct Chain {
    attributes: Vec<usize>,
    ranks: Vec<Vec<usize>>,
}

fn rank_vector(ranking: &Ranking) -> Vec<usize> {
    let mut rank = vec![0; ranking.len()];
    for (pos, &v) in ranking.values().iter().enumerate() {
        rank[v as usize] = pos;
    }
    rank
}

/// UIUP trees, and UICP trees whose tables never change the ranking, as a
/// complete chain. Attributes missing from the tree follow in declaration
/// order with their alphabetical ranking, which is exactly how ties are
/// broken.
fn as_chain(tree: &LpTree, domain: &Domain) -> Option<Chain> {
    let body: Vec<(usize, &Ranking)> = match tree {
        LpTree::Uiup(body) => body.iter().map(|o| (o.attribute, &o.ranking)).collect(),
        LpTree::Uicp(body) => {
            if body.iter().any(|t| t.rows.iter().any(|r| r.ranking != t.default)) {
                return None;
            }
            body.iter().map(|t| (t.attribute, &t.default)).collect()
        }
        LpTree::Cicp(_) => return None,
    };
    let mut attributes = Vec::with_capacity(domain.len());
    let mut ranks = vec![Vec::new(); domain.len()];
    for (a, ranking) in body {
        attributes.push(a);
        ranks[a] = rank_vector(ranking);
    }
    for (a, rank) in ranks.iter_mut().enumerate() {
        if !attributes.contains(&a) {
            attributes.push(a);
            *rank = (0..domain.value_count(a))
                .map(|v| domain.canonical_rank(a, v as u8))
                .collect();
        }
    }
    Some(Chain { attributes, ranks })
}

fn pairs(n: u128) -> u128 {
    n * n.saturating_sub(1) / 2
}

/// Closed-form distance between two chains, O(p^3) in the attribute count.
///
/// A pair of alternatives differing on the set `S` is decided by the first
/// attribute of `S` in each chain, `X` in the first and `Y` in the second.
/// When `X = Y` the pair flips iff the two rankings of `X` disagree on it.
/// When `X != Y` exactly one of the two ways to combine a pair of `X` values
/// with a pair of `Y` values flips. Attributes ahead of the deciding one in
/// either chain must be equal; the rest are free.
fn chain_tau(c1: &Chain, c2: &Chain, domain: &Domain) -> Result<u128, MetricError> {
    let p = domain.len();
    let mut pos1 = vec![0; p];
    let mut pos2 = vec![0; p];
    for (i, &a) in c1.attributes.iter().enumerate() {
        pos1[a] = i;
    }
    for (i, &a) in c2.attributes.iter().enumerate() {
        pos2[a] = i;
    }
    let d: Vec<u128> = (0..p).map(|a| domain.value_count(a) as u128).collect();
    let overflow = || MetricError::Overflow;
    let mul = |acc: u128, f: u128| acc.checked_mul(f).ok_or(MetricError::Overflow);
    // Product over attributes other than `skip`: d if `fixed`, d^2 otherwise.
    let spread = |skip: &[usize], fixed: &dyn Fn(usize) -> bool| -> Result<u128, MetricError> {
        let mut acc = 1u128;
        for z in (0..p).filter(|z| !skip.contains(z)) {
            acc = mul(acc, d[z])?;
            if !fixed(z) {
                acc = mul(acc, d[z])?;
            }
        }
        Ok(acc)
    };
    let mut total = 0u128;
    for x in 0..p {
        let (r1, r2) = (&c1.ranks[x], &c2.ranks[x]);
        let mut discordant = 0u128;
        for v in 0..r1.len() {
            for w in v + 1..r1.len() {
                if (r1[v] < r1[w]) != (r2[v] < r2[w]) {
                    discordant += 1;
                }
            }
        }
        if discordant > 0 {
            let rest = spread(&[x], &|z| pos1[z] < pos1[x] || pos2[z] < pos2[x])?;
            total = total.checked_add(mul(discordant, rest)?).ok_or_else(overflow)?;
        }
        for y in 0..p {
            if pos1[y] <= pos1[x] || pos2[y] >= pos2[x] {
                continue;
            }
            let rest = spread(&[x, y], &|z| pos1[z] < pos1[x] || pos2[z] < pos2[y])?;
            let term = mul(mul(pairs(d[x]), pairs(d[y]))?, rest)?;
            total = total.checked_add(term).ok_or_else(overflow)?;
        }
    }
    Ok(total)
}

/// Kendall distance between the total orders of two trees.
///
/// Unconditional chains use the closed form at any domain size; other pairs
/// are enumerated and fail with [`MetricError::UnsupportedScale`] beyond
/// [`ENUMERATION_LIMIT`] alternatives.
pub fn tau(t1: &LpTree, t2: &LpTree, domain: &Domain) -> Result<u128, MetricError> {
    if let (Some(c1), Some(c2)) = (as_chain(t1, domain), as_chain(t2, domain)) {
        return chain_tau(&c1, &c2, domain);
    }
    check_scale(domain)?;
    let p1 = positions(t1, domain, ENUMERATION_LIMIT)?;
    let p2 = positions(t2, domain, ENUMERATION_LIMIT)?;
    Ok(count_inversions(&p1, &p2))
}

fn check_scale(domain: &Domain) -> Result<(), MetricError> {
    if domain.size() > ENUMERATION_LIMIT {
        return Err(MetricError::UnsupportedScale {
            size: domain.size(),
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<u128>,
}

impl DistanceMatrix {
    /// Builds from a full row-major matrix, checking shape, symmetry and the
    /// diagonal.
    pub fn from_rows(rows: Vec<Vec<u128>>) -> Result<Self, MetricError> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::Matrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row[i] != 0 {
                return Err(MetricError::Matrix(format!("diagonal entry {i} is {}", row[i])));
            }
            for (j, &v) in row.iter().enumerate() {
                if rows[j][i] != v {
                    return Err(MetricError::Matrix(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(Self {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> u128 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<u128>> {
        self.entries.chunks(self.n.max(1)).map(<[u128]>::to_vec).collect()
    }
}

/// Distances between all pairs of forest members, computed in parallel.
pub fn distance_matrix(forest: &LpForest, domain: &Domain) -> Result<DistanceMatrix, MetricError> {
    let trees = forest.trees();
    let n = trees.len();
    let chains: Vec<Option<Chain>> = trees.iter().map(|t| as_chain(t, domain)).collect();
    let enumerated: Vec<Option<Vec<u64>>> = if chains.iter().any(Option::is_none) && n > 1 {
        check_scale(domain)?;
        trees
            .par_iter()
            .map(|t| positions(t, domain, ENUMERATION_LIMIT).map(Some))
            .collect::<Result<_, _>>()?
    } else {
        vec![None; n]
    };
    let index: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<u128> = index
        .par_iter()
        .map(|&(i, j)| match (&chains[i], &chains[j]) {
            (Some(a), Some(b)) => chain_tau(a, b, domain),
            _ => {
                let p1 = enumerated[i].as_ref().expect("positions enumerated");
                let p2 = enumerated[j].as_ref().expect("positions enumerated");
                Ok(count_inversions(p1, p2))
            }
        })
        .collect::<Result<_, _>>()?;
    let mut entries = vec![0u128; n * n];
    for (&(i, j), v) in index.iter().zip(values) {
        entries[i * n + j] = v;
        entries[j * n + i] = v;
    }
    Ok(DistanceMatrix { n, entries })
}
