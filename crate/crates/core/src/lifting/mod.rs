//! Extended-oracle model for adaptive algorithms and the simulator that
//! reproduces any K-query adaptive algorithm from block Krylov data.

mod adaptive;
mod equivalence;
mod rotation;
mod simulator;
mod strategy;

use nalgebra::DVector;

pub use adaptive::{run_adaptive, Transcript};
pub use equivalence::{
    check_invariants, distributional_equivalence_test, panel_statistics, EquivalenceReport, InvariantReport,
    DENSE_LIMIT,
};
pub use rotation::make_uk_rotation;
pub use simulator::{simulate, KrylovCombination, KrylovData, SimulationOutput, Simulator, SimulatorState};
pub use strategy::{
    orthogonal_query, strategy_by_name, AdaptiveAlgorithm, FixedDirections, FnStrategy, GreedyRayleigh, PowerMethod,
    QueryStrategy, STRATEGY_NAMES,
};

/// `(i, j)` standing for `Aⁱv_j` (or `Aⁱz_j`); `j` is 1-based.
pub type Pair = (usize, usize);

/// `H_k = {(i, j) : i + j ≤ k + 1, i ≥ 0, 1 ≤ j ≤ k}` in canonical order:
/// by `i + j`, then by `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSetH {
    k: usize,
    pairs: Vec<Pair>,
}

impl IndexSetH {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: Pair) -> bool {
        let (i, j) = pair;
        j >= 1 && j <= self.k && i + j <= self.k + 1
    }
}

/// `H_k`. `k = 0` gives the empty set, which is what step 1 sees.
pub fn index_set(k: usize) -> IndexSetH {
    let mut pairs = Vec::with_capacity(k * (k + 3) / 2);
    for sum in 1..=k + 1 {
        for j in 1..=k.min(sum) {
            pairs.push((sum - j, j));
        }
    }
    IndexSetH { k, pairs }
}

/// `H_k \ H_{k−1}`: `(0, k)` and the pairs with `i + j = k + 1`, in canonical order.
pub fn new_pairs(k: usize) -> Vec<Pair> {
    let mut out = vec![(0, k)];
    out.extend((1..=k).map(|j| (k + 1 - j, j)));
    out.sort_by_key(|&(i, j)| (i + j, j));
    out
}

/// Ordered collection of vectors indexed by pairs, in canonical order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Responses {
    entries: Vec<(Pair, DVector<f64>)>,
}

impl Responses {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts keeping canonical order; replaces an existing entry.
    pub fn insert(&mut self, pair: Pair, v: DVector<f64>) {
        let key = |p: &Pair| (p.0 + p.1, p.1);
        match self.entries.binary_search_by_key(&key(&pair), |(p, _)| key(p)) {
            Ok(pos) => self.entries[pos].1 = v,
            Err(pos) => self.entries.insert(pos, (pair, v)),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&DVector<f64>> {
        self.entries.iter().find(|(p, _)| *p == (i, j)).map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = Pair> + '_ {
        self.entries.iter().map(|(p, _)| *p)
    }

    pub fn vectors(&self) -> impl Iterator<Item = &DVector<f64>> + '_ {
        self.entries.iter().map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pair, &DVector<f64>)> + '_ {
        self.entries.iter().map(|(p, v)| (*p, v))
    }

    /// The entries whose pair lies in `h`.
    pub fn restricted(&self, h: &IndexSetH) -> Responses {
        Responses { entries: self.entries.iter().filter(|(p, _)| h.contains(*p)).cloned().collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn brute_force(k: usize) -> BTreeSet<Pair> {
        let mut s = BTreeSet::new();
        for i in 0..=k + 1 {
            for j in 1..=k {
                if i + j <= k + 1 {
                    s.insert((i, j));
                }
            }
        }
        s
    }

    #[test]
    fn small_sets() {
        assert_eq!(index_set(1).pairs(), &[(0, 1), (1, 1)]);
        let h2: BTreeSet<Pair> = index_set(2).pairs().iter().copied().collect();
        let want: BTreeSet<Pair> = [(0, 1), (1, 1), (2, 1), (0, 2), (1, 2)].into_iter().collect();
        assert_eq!(h2, want);
        assert_eq!(index_set(3).len(), 9);
        assert!(index_set(0).is_empty());
    }

    #[test]
    fn matches_defining_predicate() {
        for k in 1..12 {
            let h = index_set(k);
            let got: BTreeSet<Pair> = h.pairs().iter().copied().collect();
            assert_eq!(got.len(), h.len(), "duplicates at k={k}");
            assert_eq!(got, brute_force(k));
            assert_eq!(h.len(), k * (k + 3) / 2);
            for &p in h.pairs() {
                assert!(h.contains(p));
            }
        }
    }

    #[test]
    fn nesting_and_increments() {
        for k in 1..10 {
            let prev: BTreeSet<Pair> = index_set(k - 1).pairs().iter().copied().collect();
            let cur: BTreeSet<Pair> = index_set(k).pairs().iter().copied().collect();
            assert!(prev.is_subset(&cur));
            let diff: BTreeSet<Pair> = cur.difference(&prev).copied().collect();
            let fresh: BTreeSet<Pair> = new_pairs(k).into_iter().collect();
            assert_eq!(diff, fresh);
        }
    }

    #[test]
    fn canonical_order() {
        let order = index_set(2).pairs().to_vec();
        assert_eq!(order, vec![(0, 1), (1, 1), (0, 2), (2, 1), (1, 2)]);
        let mut r = Responses::new();
        for &p in order.iter().rev() {
            r.insert(p, DVector::zeros(1));
        }
        assert_eq!(r.pairs().collect::<Vec<_>>(), order);
    }
}
