use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::{index_set, make_uk_rotation, AdaptiveAlgorithm, Pair, Responses};
use crate::error::{Error, Result};
use crate::linalg::RANK_TOL;
use crate::operators::CountingOracle;

/// Block Krylov data `{Aⁱz_j : i + j ≤ max_sum}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrylovData {
    n: usize,
    max_sum: usize,
    vectors: BTreeMap<Pair, DVector<f64>>,
}

impl KrylovData {
    /// Computes `Aⁱz_j` for `i + j ≤ max_sum` and `j ≤ starts.len()`.
    pub fn generate(oracle: &mut CountingOracle<'_>, starts: &[DVector<f64>], max_sum: usize) -> Result<Self> {
        let n = oracle.ncols();
        let mut vectors = BTreeMap::new();
        for (idx, z) in starts.iter().enumerate().take(max_sum) {
            let j = idx + 1;
            if z.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: z.len() });
            }
            let mut x = z.clone();
            vectors.insert((0, j), x.clone());
            for i in 1..=max_sum - j {
                x = oracle.apply(&x)?;
                vectors.insert((i, j), x.clone());
            }
        }
        Ok(Self { n, max_sum, vectors })
    }

    /// Data from a dense matrix, without an oracle.
    pub fn from_dense(a: &DMatrix<f64>, starts: &[DVector<f64>], max_sum: usize) -> Self {
        let mut vectors = BTreeMap::new();
        for (idx, z) in starts.iter().enumerate().take(max_sum) {
            let j = idx + 1;
            let mut x = z.clone();
            vectors.insert((0, j), x.clone());
            for i in 1..=max_sum - j {
                x = a * x;
                vectors.insert((i, j), x.clone());
            }
        }
        Self { n: a.ncols(), max_sum, vectors }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_sum(&self) -> usize {
        self.max_sum
    }

    pub fn get(&self, i: usize, j: usize) -> Result<&DVector<f64>> {
        self.vectors.get(&(i, j)).ok_or_else(|| Error::HypothesisViolated(format!("Krylov data lacks A^{i} z_{j}")))
    }

    /// The entries with `i + j ≤ max_sum`.
    pub fn truncated(&self, max_sum: usize) -> Self {
        let vectors =
            self.vectors.iter().filter(|((i, j), _)| i + j <= max_sum).map(|(p, v)| (*p, v.clone())).collect();
        Self { n: self.n, max_sum: max_sum.min(self.max_sum), vectors }
    }
}

/// `Σ c·A^p z_s` over `(p, s)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KrylovCombination {
    pub coeffs: BTreeMap<Pair, f64>,
}

impl KrylovCombination {
    /// `Aⁱ` applied to the combination, evaluated from the data.
    pub fn eval_power(&self, data: &KrylovData, i: usize) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(data.dim());
        for (&(p, s), &c) in &self.coeffs {
            out.axpy(c, data.get(p + i, s)?, 1.0);
        }
        Ok(out)
    }

    /// Largest `p + s` with a nonzero coefficient.
    pub fn max_sum(&self) -> usize {
        self.coeffs.iter().filter(|(_, c)| **c != 0.0).map(|((p, s), _)| p + s).max().unwrap_or(0)
    }
}

/// Per-trial simulator variables after `k` steps.
#[derive(Clone, Debug)]
pub struct SimulatorState {
    /// `ṽ₁ … ṽ_k`, built from the Krylov data.
    pub v_tilde: Vec<DVector<f64>>,
    pub v_tilde_coeffs: Vec<KrylovCombination>,
    /// `v̂₁ … v̂_k`, the simulated queries.
    pub v_sim: Vec<DVector<f64>>,
    /// `Ũ₁ … Ũ_k`.
    pub u_tilde: Vec<DMatrix<f64>>,
    /// `Ũ_{1:k} = Ũ₁⋯Ũ_k`.
    pub u_product: DMatrix<f64>,
    /// Inputs `{Ũ_{1:k−1}ᵀAⁱṽ_j}_{H_{k−1}}` seen at each step.
    pub inputs: Vec<Responses>,
}

impl SimulatorState {
    pub fn steps(&self) -> usize {
        self.v_sim.len()
    }
}

/// Runs the simulator recursion one step at a time. Step `k` reads only the
/// data with `i + j ≤ k`.
#[derive(Clone, Debug)]
pub struct Simulator {
    alg: AdaptiveAlgorithm,
    state: SimulatorState,
}

impl Simulator {
    pub fn new(alg: AdaptiveAlgorithm, n: usize) -> Self {
        let state = SimulatorState {
            v_tilde: Vec::new(),
            v_tilde_coeffs: Vec::new(),
            v_sim: Vec::new(),
            u_tilde: Vec::new(),
            u_product: DMatrix::identity(n, n),
            inputs: Vec::new(),
        };
        Self { alg, state }
    }

    pub fn state(&self) -> &SimulatorState {
        &self.state
    }

    pub fn into_state(self) -> SimulatorState {
        self.state
    }

    /// `Ũ_{1:k}ᵀ Aⁱṽ_j` for `(i, j) ∈ H_m`, using the current product.
    pub fn rotated_responses(&self, data: &KrylovData, m: usize) -> Result<Responses> {
        let mut out = Responses::new();
        for &(i, j) in index_set(m).pairs() {
            let x = self.state.v_tilde_coeffs[j - 1].eval_power(data, i)?;
            out.insert((i, j), self.state.u_product.tr_mul(&x));
        }
        Ok(out)
    }

    fn next_v_tilde(&self, data: &KrylovData, k: usize) -> Result<(DVector<f64>, KrylovCombination)> {
        let z = data.get(0, k)?;
        let prior = index_set(k - 1);
        let mut coeffs = BTreeMap::new();
        let mut r = z.clone();
        if !prior.is_empty() {
            // Least squares on column-normalized data keeps the solve well scaled.
            let mut cols = Vec::with_capacity(prior.len());
            let mut scales = Vec::with_capacity(prior.len());
            for &(i, j) in prior.pairs() {
                let x = data.get(i, j)?;
                let s = x.norm();
                scales.push(if s > 0.0 { s } else { 1.0 });
                cols.push(x / *scales.last().unwrap());
            }
            let x = DMatrix::from_columns(&cols);
            let c = x.clone().svd(true, true).solve(z, 1e-14).map_err(|e| Error::HypothesisViolated(e.to_string()))?;
            r -= &x * &c;
            for (t, &(i, j)) in prior.pairs().iter().enumerate() {
                coeffs.insert((i, j), -c[t] / scales[t]);
            }
        }
        let rn = r.norm();
        if rn <= RANK_TOL * z.norm() || rn == 0.0 {
            return Err(Error::RankCollapse);
        }
        for c in coeffs.values_mut() {
            *c /= rn;
        }
        coeffs.insert((0, k), 1.0 / rn);
        Ok((r / rn, KrylovCombination { coeffs }))
    }

    /// Advances from `k − 1` to `k` steps.
    pub fn step(&mut self, data: &KrylovData) -> Result<()> {
        let k = self.state.steps() + 1;
        let n = data.dim();
        let (v_tilde, combo) = self.next_v_tilde(data, k)?;
        self.state.v_tilde.push(v_tilde.clone());
        self.state.v_tilde_coeffs.push(combo);
        let inputs = if k == 1 { Responses::new() } else { self.rotated_responses(data, k - 1)? };
        let v_sim = self.alg.query(k, n, &inputs)?;
        let y = self.state.u_product.tr_mul(&v_tilde);
        let y = &y / y.norm();
        let fixed: Vec<DVector<f64>> = inputs.vectors().cloned().collect();
        let u_k = make_uk_rotation(&fixed, &y, &v_sim)?;
        self.state.u_product = &self.state.u_product * &u_k;
        self.state.u_tilde.push(u_k);
        self.state.v_sim.push(v_sim);
        self.state.inputs.push(inputs);
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SimulationOutput {
    /// `{Ũ_{1:K}ᵀAⁱṽ_j}_{H_K}`.
    pub transcript: Responses,
    /// `Ũ_{1:K}ᵀ A Ũ_{1:K}` when a dense `A` was supplied.
    pub rotated: Option<DMatrix<f64>>,
    pub state: SimulatorState,
}

/// Runs all `K` steps. The final transcript needs the data for `i + j ≤ K + 1`.
pub fn simulate(alg: &AdaptiveAlgorithm, data: &KrylovData, dense: Option<&DMatrix<f64>>) -> Result<SimulationOutput> {
    let k_total = alg.queries();
    if data.max_sum() < k_total + 1 {
        return Err(Error::HypothesisViolated(format!(
            "simulating K = {k_total} queries needs Krylov data up to i + j = {}",
            k_total + 1
        )));
    }
    let mut sim = Simulator::new(alg.clone(), data.dim());
    for _ in 0..k_total {
        sim.step(data)?;
    }
    let transcript = sim.rotated_responses(data, k_total)?;
    let rotated = dense.map(|a| {
        let p = &sim.state.u_product;
        p.tr_mul(&(a * p))
    });
    Ok(SimulationOutput { transcript, rotated, state: sim.into_state() })
}
