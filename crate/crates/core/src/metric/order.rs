use crate::domain::{canonical_ranks_of, enumerate_alternatives, Alternative, Domain};
use crate::model::{trace, LpTree};

use super::MetricError;

/// The induced preorder made total: alternatives sharing a leaf are ordered
/// by their canonical key.
pub fn total_order_of(tree: &LpTree, domain: &Domain, limit: u64) -> Result<Vec<Alternative>, MetricError> {
    let mut alts = enumerate_alternatives(domain, limit)?;
    alts.sort_by_cached_key(|a| (trace(tree, a), canonical_ranks_of(a, domain)));
    Ok(alts)
}

/// `positions[ordinal]` is the place of that alternative in the total order.
pub(crate) fn positions(tree: &LpTree, domain: &Domain, limit: u64) -> Result<Vec<u64>, MetricError> {
    let order = total_order_of(tree, domain, limit)?;
    let mut pos = vec![0u64; order.len()];
    for (i, alt) in order.iter().enumerate() {
        pos[domain.ordinal(alt) as usize] = i as u64;
    }
    Ok(pos)
}

/// Pair-by-pair count of alternatives ordered oppositely by the two total
/// orders. Quadratic in the domain size.
pub fn tau_bruteforce(t1: &LpTree, t2: &LpTree, domain: &Domain, limit: u64) -> Result<u128, MetricError> {
    let p1 = positions(t1, domain, limit)?;
    let p2 = positions(t2, domain, limit)?;
    let mut count = 0u128;
    for i in 0..p1.len() {
        for j in i + 1..p1.len() {
            if (p1[i] < p1[j]) != (p2[i] < p2[j]) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Disagreements between two position vectors in O(N log N).
pub(crate) fn count_inversions(p1: &[u64], p2: &[u64]) -> u128 {
    let mut seq = vec![0u64; p1.len()];
    for (ordinal, &at) in p1.iter().enumerate() {
        seq[at as usize] = p2[ordinal];
    }
    let mut buffer = vec![0u64; seq.len()];
    sort_counting(&mut seq, &mut buffer)
}

fn sort_counting(seq: &mut [u64], buffer: &mut [u64]) -> u128 {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count =
        sort_counting(&mut seq[..mid], &mut buffer[..mid]) + sort_counting(&mut seq[mid..], &mut buffer[mid..]);
    let (mut i, mut j) = (0, mid);
    for slot in buffer[..n].iter_mut() {
        if j >= n || (i < mid && seq[i] <= seq[j]) {
            *slot = seq[i];
            i += 1;
        } else {
            *slot = seq[j];
            count += (mid - i) as u128;
            j += 1;
        }
    }
    seq.copy_from_slice(&buffer[..n]);
    count
}
