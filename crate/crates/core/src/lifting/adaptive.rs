use nalgebra::{DMatrix, DVector};

use super::{index_set, new_pairs, AdaptiveAlgorithm, Pair, Responses};
use crate::error::{Error, Result};
use crate::operators::CountingOracle;

/// Everything an adaptive algorithm sees in the extended oracle model.
#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    /// `v₁ … v_K`.
    pub queries: Vec<DVector<f64>>,
    /// `{Aⁱv_j}_{H_K}` in canonical order.
    pub responses: Responses,
    /// Pairs delivered after each query, in arrival order.
    pub batches: Vec<Vec<Pair>>,
    /// Matvecs charged: one per new power application.
    pub matvecs: usize,
}

impl Transcript {
    pub fn k(&self) -> usize {
        self.queries.len()
    }

    /// Largest `‖responses[(i,j)] − Aⁱv_j‖ / max(1, ‖Aⁱv_j‖)` when replayed
    /// against the dense operator `a`.
    pub fn replay_error(&self, a: &DMatrix<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for ((i, j), v) in self.responses.iter() {
            let mut x = self.queries[j - 1].clone();
            for _ in 0..i {
                x = a * x;
            }
            worst = worst.max((v - &x).norm() / x.norm().max(1.0));
        }
        worst
    }
}

/// Runs the extended-oracle protocol. After query `v_k` the algorithm receives
/// `Aⁱv_j` for every pair in `H_k \ H_{k−1}`; each costs one matvec applied to
/// a response already held.
pub fn run_adaptive(alg: &AdaptiveAlgorithm, oracle: &mut CountingOracle<'_>) -> Result<Transcript> {
    if !oracle.is_symmetric() || oracle.nrows() != oracle.ncols() {
        return Err(Error::InvalidOperator("the extended oracle needs a symmetric operator".into()));
    }
    let n = oracle.ncols();
    let k_total = alg.queries();
    let prior = index_set(k_total - 1).len();
    if prior >= n {
        return Err(Error::HypothesisViolated(format!("K = {k_total} needs |H_(K-1)| = {prior} < n = {n}")));
    }
    let charge = k_total * (k_total + 1) / 2;
    if let Some(remaining) = oracle.remaining() {
        if remaining < charge {
            return Err(Error::BudgetExceeded { budget: oracle.budget().unwrap_or(0) });
        }
    }
    let start = oracle.count();
    let mut responses = Responses::new();
    let mut queries = Vec::with_capacity(k_total);
    let mut batches = Vec::with_capacity(k_total);
    for k in 1..=k_total {
        let v = alg.query(k, n, &responses)?;
        queries.push(v.clone());
        let fresh = new_pairs(k);
        for &(i, j) in &fresh {
            let x = if i == 0 {
                v.clone()
            } else {
                let prev = responses.get(i - 1, j).expect("previous power is held").clone();
                oracle.apply(&prev)?
            };
            responses.insert((i, j), x);
        }
        batches.push(fresh);
    }
    Ok(Transcript { queries, responses, batches, matvecs: oracle.count() - start })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::{FnStrategy, PowerMethod};
    use crate::operators::SymmetricOperator;
    use crate::rng::{gaussian_matrix, stream, Purpose};
    use std::sync::Arc;

    fn diag(d: &[f64]) -> SymmetricOperator {
        SymmetricOperator::dense(DMatrix::from_diagonal(&DVector::from_vec(d.to_vec()))).unwrap()
    }

    fn e1_strategy() -> Arc<FnStrategy> {
        Arc::new(FnStrategy::new(
            "e1",
            |n| DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 }),
            |_, inputs| inputs.get(1, 1).unwrap().clone(),
        ))
    }

    #[test]
    fn single_query() {
        let a = diag(&[2.0, 1.0]);
        let alg = AdaptiveAlgorithm::new(1, e1_strategy()).unwrap();
        let mut o = CountingOracle::new(&a);
        let t = run_adaptive(&alg, &mut o).unwrap();
        assert_eq!(t.responses.get(0, 1).unwrap().as_slice(), &[1.0, 0.0]);
        assert_eq!(t.responses.get(1, 1).unwrap().as_slice(), &[2.0, 0.0]);
        assert_eq!(t.matvecs, 1);
        assert_eq!(o.count(), 1);
    }

    #[test]
    fn power_method_second_query_is_orthogonal() {
        let a = diag(&[3.0, 1.0, 0.5]);
        let alg = AdaptiveAlgorithm::new(2, Arc::new(PowerMethod)).unwrap();
        let mut o = CountingOracle::new(&a);
        let t = run_adaptive(&alg, &mut o).unwrap();
        assert!(t.queries[0].dot(&t.queries[1]).abs() < 1e-10);
        assert!((t.queries[1].norm() - 1.0).abs() < 1e-12);
        assert_eq!(t.matvecs, 3);
    }

    #[test]
    fn three_queries_cost_six_matvecs_and_replay() {
        let m = gaussian_matrix(&mut stream(3, 0, Purpose::Instance), 12, 12);
        let m = (&m + m.transpose()) * 0.5;
        let a = SymmetricOperator::dense(m.clone()).unwrap();
        for name in crate::lifting::STRATEGY_NAMES {
            let alg = AdaptiveAlgorithm::by_name(name, 3).unwrap();
            let mut o = CountingOracle::new(&a);
            let t = run_adaptive(&alg, &mut o).unwrap();
            let with_power = index_set(3).pairs().iter().filter(|p| p.0 >= 1).count();
            assert_eq!(with_power, 6);
            assert_eq!(t.matvecs, 6);
            assert_eq!(t.responses.len(), 9);
            assert!(t.replay_error(&m) <= 1e-9, "{name}");
            for k in 1..=3 {
                let inputs = t.responses.restricted(&index_set(k - 1));
                for v in inputs.vectors() {
                    assert!(t.queries[k - 1].dot(v).abs() <= 1e-8 * v.norm(), "{name} k={k}");
                }
            }
            assert_eq!(t.batches.iter().map(Vec::len).sum::<usize>(), 9);
        }
    }

    #[test]
    fn infeasible_k_rejected() {
        let a = diag(&[1.0, 2.0, 3.0, 4.0]);
        // |H_2| = 5 ≥ 4.
        let alg = AdaptiveAlgorithm::new(3, Arc::new(PowerMethod)).unwrap();
        let mut o = CountingOracle::new(&a);
        assert!(matches!(run_adaptive(&alg, &mut o), Err(Error::HypothesisViolated(_))));
        assert_eq!(o.count(), 0);
        let mut o = CountingOracle::with_budget(&a, 2);
        let alg = AdaptiveAlgorithm::new(2, Arc::new(PowerMethod)).unwrap();
        assert!(matches!(run_adaptive(&alg, &mut o), Err(Error::BudgetExceeded { .. })));
    }
}
