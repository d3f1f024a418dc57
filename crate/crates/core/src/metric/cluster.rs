use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DistanceMatrix;
use crate::scalar::Scalar;

/// How the distance between two clusters is derived from member distances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    /// Smallest member distance.
    Single,
    /// Mean member distance.
    #[default]
    Average,
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Single => "single",
            Self::Average => "average",
        })
    }
}

impl FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(Self::Single),
            "average" => Ok(Self::Average),
            other => Err(format!("unknown linkage {other:?}, expected single or average")),
        }
    }
}

/// One agglomeration step. Leaves are clusters `0..n`; the merge at step `k`
/// creates cluster `n + k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge<S> {
    /// The smaller of the two merged ids.
    pub a: usize,
    pub b: usize,
    pub height: S,
    pub id: usize,
    /// Leaves below the new cluster.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram<S> {
    pub leaves: usize,
    pub linkage: Linkage,
    pub merges: Vec<Merge<S>>,
}

impl<S: Scalar> Dendrogram<S> {
    pub fn max_height(&self) -> Option<S> {
        self.merges.last().map(|m| m.height)
    }

    /// Lower median of the merge heights, so always an actual height; zero
    /// without merges.
    pub fn median_height(&self) -> S {
        let mut heights: Vec<S> = self.merges.iter().map(|m| m.height).collect();
        heights.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
        match heights.len() {
            0 => S::zero(),
            k => heights[(k - 1) / 2],
        }
    }
}

/// Cluster distance as an exact fraction `sum / count`.
#[derive(Debug, Clone, Copy)]
struct Link {
    sum: u128,
    count: u128,
}

impl Link {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.sum.checked_mul(other.count), other.sum.checked_mul(self.count)) {
            (Some(x), Some(y)) => x.cmp(&y),
            _ => (self.sum as f64 / self.count as f64).total_cmp(&(other.sum as f64 / other.count as f64)),
        }
    }
}

/// Agglomerative clustering over `matrix`. Each step merges the closest pair
/// of clusters; equal distances go to the pair with the smallest ids.
/// Distances are compared exactly, so `S` only affects reported heights.
pub fn agglomerate<S: Scalar>(matrix: &DistanceMatrix, linkage: Linkage) -> Dendrogram<S> {
    let n = matrix.len();
    let total = 2 * n.max(1) - 1;
    // link[i][j] for active cluster ids i < j.
    let mut link: Vec<Vec<Option<Link>>> = vec![vec![None; total]; total];
    let mut size = vec![0usize; total];
    let mut active: Vec<usize> = (0..n).collect();
    for (i, row) in link.iter_mut().enumerate().take(n) {
        size[i] = 1;
        for (j, slot) in row.iter_mut().enumerate().take(n).skip(i + 1) {
            *slot = Some(Link {
                sum: matrix.get(i, j),
                count: 1,
            });
        }
    }
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    while active.len() > 1 {
        let mut best: Option<(usize, usize, Link)> = None;
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                let l = link[i][j].expect("link between active clusters");
                if best.as_ref().is_none_or(|(_, _, b)| l.cmp(b) == Ordering::Less) {
                    best = Some((i, j, l));
                }
            }
        }
        let (a, b, l) = best.expect("two active clusters");
        let id = n + merges.len();
        size[id] = size[a] + size[b];
        active.retain(|&c| c != a && c != b);
        for &k in &active {
            let get = |c: usize| link[c.min(k)][c.max(k)].expect("link to active cluster");
            let (la, lb) = (get(a), get(b));
            link[k][id] = Some(match linkage {
                Linkage::Single => {
                    if la.cmp(&lb) == Ordering::Greater {
                        lb
                    } else {
                        la
                    }
                }
                Linkage::Average => Link {
                    sum: la.sum.saturating_add(lb.sum),
                    count: (size[k] * size[id]) as u128,
                },
            });
        }
        active.push(id);
        let height = match linkage {
            Linkage::Single => S::from_count(l.sum),
            Linkage::Average => S::ratio(l.sum, l.count),
        };
        merges.push(Merge {
            a,
            b,
            height,
            id,
            size: size[id],
        });
    }
    Dendrogram {
        leaves: n,
        linkage,
        merges,
    }
}

/// Partition of the trees at a threshold, with one representative each.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering<S> {
    pub threshold: S,
    /// Sorted members; buckets ordered by smallest member.
    pub buckets: Vec<Vec<usize>>,
    /// `representatives[k]` belongs to `buckets[k]`.
    pub representatives: Vec<usize>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Buckets joined by every merge at or below `threshold`, each represented
/// by its medoid.
pub fn cut<S: Scalar>(dendrogram: &Dendrogram<S>, matrix: &DistanceMatrix, threshold: S) -> Clustering<S> {
    let n = dendrogram.leaves;
    let mut parent: Vec<usize> = (0..n + dendrogram.merges.len()).collect();
    for m in &dendrogram.merges {
        if m.height <= threshold {
            let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
            parent[ra] = m.id;
            parent[rb] = m.id;
        }
    }
    let mut buckets: Vec<Vec<usize>> = Vec::new();
    let mut slot = std::collections::HashMap::new();
    for leaf in 0..n {
        let root = find(&mut parent, leaf);
        let k = *slot.entry(root).or_insert_with(|| {
            buckets.push(Vec::new());
            buckets.len() - 1
        });
        buckets[k].push(leaf);
    }
    let representatives = buckets.iter().map(|b| representative_of(b, matrix)).collect();
    Clustering {
        threshold,
        buckets,
        representatives,
    }
}

/// The medoid of `bucket`: least total distance to the other members, ties
/// to the smallest id.
///
/// # Panics
/// If `bucket` is empty.
pub fn representative_of(bucket: &[usize], matrix: &DistanceMatrix) -> usize {
    let cost = |i: usize| {
        bucket
            .iter()
            .map(|&j| matrix.get(i, j))
            .fold(0u128, u128::saturating_add)
    };
    bucket
        .iter()
        .map(|&i| (cost(i), i))
        .min()
        .map(|(_, i)| i)
        .expect("non-empty bucket")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fixture() -> DistanceMatrix {
        DistanceMatrix::from_rows(vec![vec![0, 1, 4], vec![1, 0, 3], vec![4, 3, 0]]).unwrap()
    }

    fn heights<S: Scalar>(d: &Dendrogram<S>) -> Vec<S> {
        d.merges.iter().map(|m| m.height).collect()
    }

    #[test]
    fn single_linkage_fixture() {
        let d: Dendrogram<Rational64> = agglomerate(&fixture(), Linkage::Single);
        assert_eq!((d.merges[0].a, d.merges[0].b, d.merges[0].id), (0, 1, 3));
        assert_eq!((d.merges[1].a, d.merges[1].b, d.merges[1].id), (2, 3, 4));
        assert_eq!(heights(&d), vec![Rational64::from(1), Rational64::from(3)]);
        let c = cut(&d, &fixture(), Rational64::from(2));
        assert_eq!(c.buckets, vec![vec![0, 1], vec![2]]);
        assert_eq!(c.representatives, vec![0, 2]);
    }

    #[test]
    fn average_linkage_fixture() {
        let d: Dendrogram<Rational64> = agglomerate(&fixture(), Linkage::Average);
        assert_eq!(heights(&d), vec![Rational64::from(1), Rational64::new(7, 2)]);
        let f: Dendrogram<f64> = agglomerate(&fixture(), Linkage::Average);
        assert_eq!(heights(&f), vec![1.0, 3.5]);
        assert_eq!(f.median_height(), 1.0);
    }

    #[test]
    fn medoid() {
        let m = fixture();
        assert_eq!(representative_of(&[0, 1, 2], &m), 1);
        assert_eq!(representative_of(&[2], &m), 2);
        let flat = DistanceMatrix::from_rows(vec![vec![0, 2, 2], vec![2, 0, 2], vec![2, 2, 0]]).unwrap();
        assert_eq!(representative_of(&[2, 1, 0], &flat), 0);
    }

    #[test]
    fn trivial_sizes() {
        let one = DistanceMatrix::from_rows(vec![vec![0]]).unwrap();
        let d: Dendrogram<f64> = agglomerate(&one, Linkage::Average);
        assert!(d.merges.is_empty());
        assert_eq!(d.median_height(), 0.0);
        assert_eq!(cut(&d, &one, 0.0).buckets, vec![vec![0]]);
        let zeros = DistanceMatrix::from_rows(vec![vec![0; 4]; 4]).unwrap();
        let z: Dendrogram<f64> = agglomerate(&zeros, Linkage::Single);
        assert_eq!(cut(&z, &zeros, 0.0).buckets.len(), 1);
    }

    #[test]
    fn ties_go_to_smallest_ids() {
        let m = DistanceMatrix::from_rows(vec![
            vec![0, 2, 2, 2],
            vec![2, 0, 2, 2],
            vec![2, 2, 0, 2],
            vec![2, 2, 2, 0],
        ])
        .unwrap();
        let d: Dendrogram<f64> = agglomerate(&m, Linkage::Average);
        let pairs: Vec<(usize, usize)> = d.merges.iter().map(|x| (x.a, x.b)).collect();
        assert_eq!(pairs, vec![(0, 1), (2, 3), (4, 5)]);
    }

    #[test]
    fn linkage_parses() {
        assert_eq!("single".parse::<Linkage>().unwrap(), Linkage::Single);
        assert!("ward".parse::<Linkage>().is_err());
        assert_eq!(Linkage::default().to_string(), "average");
    }

    #[allow(clippy::needless_range_loop)]
    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
        let mut rows = vec![vec![0u128; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = rng.gen_range(0..20);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        DistanceMatrix::from_rows(rows).unwrap()
    }

    /// Reference agglomeration that recomputes cluster distances from
    /// members at every step.
    fn naive(m: &DistanceMatrix, linkage: Linkage) -> Vec<(usize, usize, Rational64)> {
        let n = m.len();
        let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
        let mut out = Vec::new();
        while clusters.len() > 1 {
            let mut best: Option<(Rational64, usize, usize, usize, usize)> = None;
            for x in 0..clusters.len() {
                for y in x + 1..clusters.len() {
                    let (ci, cj) = (&clusters[x], &clusters[y]);
                    let ds: Vec<i64> =
                        ci.1.iter()
                            .flat_map(|&p| cj.1.iter().map(move |&q| m.get(p, q) as i64))
                            .collect();
                    let dist = match linkage {
                        Linkage::Single => Rational64::from(*ds.iter().min().unwrap()),
                        Linkage::Average => Rational64::new(ds.iter().sum(), ds.len() as i64),
                    };
                    let key = (dist, ci.0.min(cj.0), ci.0.max(cj.0), x, y);
                    if best.is_none_or(|b| (key.0, key.1, key.2) < (b.0, b.1, b.2)) {
                        best = Some(key);
                    }
                }
            }
            let (dist, a, b, x, y) = best.unwrap();
            let mut members = clusters[x].1.clone();
            members.extend(&clusters[y].1);
            clusters.remove(y);
            clusters.remove(x);
            clusters.push((n + out.len(), members));
            out.push((a, b, dist));
        }
        out
    }

    #[test]
    fn matches_naive_and_heights_increase() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..9);
            let m = random_matrix(&mut rng, n);
            for linkage in [Linkage::Single, Linkage::Average] {
                let d: Dendrogram<Rational64> = agglomerate(&m, linkage);
                let got: Vec<_> = d.merges.iter().map(|x| (x.a, x.b, x.height)).collect();
                assert_eq!(got, naive(&m, linkage));
                assert!(d.merges.windows(2).all(|w| w[0].height <= w[1].height));
                assert_eq!(d.merges.len(), n - 1);
                let below = cut(&d, &m, Rational64::from(-1));
                assert_eq!(below.buckets.len(), n);
                let above = cut(&d, &m, d.max_height().unwrap_or_default());
                assert_eq!(above.buckets.len(), 1);
                for (bucket, &rep) in above.buckets.iter().zip(&above.representatives) {
                    let cost = |i: usize| bucket.iter().map(|&j| m.get(i, j)).sum::<u128>();
                    assert!(bucket.iter().all(|&o| cost(rep) <= cost(o)));
                }
            }
        }
    }
}
