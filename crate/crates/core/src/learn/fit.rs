use crate::domain::ValueId;
use crate::model::Ranking;

/// Largest attribute searched exhaustively in exact mode.
pub(crate) const EXACT_MAX_VALUES: usize = 4;

/// Pairwise win counts on one attribute: `wins[v][u]` examples had `v` on
/// the better side and `u` on the worse side.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    n: usize,
    wins: Vec<u64>,
}

impl Tally {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            wins: vec![0; n * n],
        }
    }

    pub fn add(&mut self, better: ValueId, worse: ValueId) {
        self.wins[better as usize * self.n + worse as usize] += 1;
    }

    fn get(&self, v: usize, u: usize) -> i64 {
        self.wins[v * self.n + u] as i64
    }

    /// Agreed minus disagreed examples under `ranking`.
    pub fn score(&self, ranking: &[ValueId]) -> i64 {
        let mut s = 0;
        for (i, &v) in ranking.iter().enumerate() {
            for &u in &ranking[i + 1..] {
                s += self.get(v as usize, u as usize) - self.get(u as usize, v as usize);
            }
        }
        s
    }

    fn net(&self, v: usize) -> i64 {
        (0..self.n).map(|u| self.get(v, u) - self.get(u, v)).sum()
    }
}

/// Ranking honoring every `required` edge: by descending net wins when
/// `exact` is off (or the attribute is large), otherwise the best-scoring
/// permutation. Remaining ties follow declaration order.
pub(crate) fn fit_order(tally: &Tally, required: &[(ValueId, ValueId)], exact: bool) -> (Ranking, i64) {
    let n = tally.n;
    let mut preds = vec![Vec::new(); n];
    for &(p, d) in required {
        if !preds[d as usize].contains(&(p as usize)) {
            preds[d as usize].push(p as usize);
        }
    }
    let order = if exact && n <= EXACT_MAX_VALUES {
        best_permutation(tally, &preds)
    } else {
        net_win_order(tally, &preds)
    };
    let score = tally.score(&order);
    (Ranking::new(order), score)
}

fn net_win_order(tally: &Tally, preds: &[Vec<usize>]) -> Vec<ValueId> {
    let n = tally.n;
    let net: Vec<i64> = (0..n).map(|v| tally.net(v)).collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let best =
        |candidates: &mut dyn Iterator<Item = usize>| candidates.max_by(|&a, &b| net[a].cmp(&net[b]).then(b.cmp(&a)));
    while order.len() < n {
        // Take the strongest unplaced value; while it waits on a required
        // predecessor, step to the strongest such predecessor instead.
        let mut pick = best(&mut (0..n).filter(|&v| !placed[v])).expect("unplaced value");
        // Required edges are acyclic after feasibility checks; the step
        // bound only guards against misuse.
        for _ in 0..n {
            match best(&mut preds[pick].iter().copied().filter(|&p| !placed[p])) {
                Some(p) => pick = p,
                None => break,
            }
        }
        placed[pick] = true;
        order.push(pick as ValueId);
    }
    order
}

fn best_permutation(tally: &Tally, preds: &[Vec<usize>]) -> Vec<ValueId> {
    fn search(
        tally: &Tally,
        preds: &[Vec<usize>],
        prefix: &mut Vec<ValueId>,
        placed: &mut [bool],
        best: &mut Option<(i64, Vec<ValueId>)>,
    ) {
        let n = placed.len();
        if prefix.len() == n {
            let s = tally.score(prefix);
            if best.as_ref().is_none_or(|(b, _)| s > *b) {
                *best = Some((s, prefix.clone()));
            }
            return;
        }
        for v in 0..n {
            if placed[v] || !preds[v].iter().all(|&p| placed[p]) {
                continue;
            }
            placed[v] = true;
            prefix.push(v as ValueId);
            search(tally, preds, prefix, placed, best);
            prefix.pop();
            placed[v] = false;
        }
    }
    let mut best = None;
    search(tally, preds, &mut Vec::new(), &mut vec![false; tally.n], &mut best);
    best.map(|(_, p)| p).unwrap_or_else(|| net_win_order(tally, preds))
}
