use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::simulator::Simulator;
use super::{index_set, make_uk_rotation, run_adaptive, simulate, AdaptiveAlgorithm, KrylovData, Responses};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, orthogonality_defect, orthonormalize};
use crate::operators::{haar_orthogonal, CountingOracle, SpectrumSpec, SymmetricOperator};
use crate::rng::{gaussian_vector, stream, Purpose};
use crate::stats::{ks_two_sample, PanelOutcome};

/// Largest dimension for which the dense rotated view is materialized.
pub const DENSE_LIMIT: usize = 64;

/// Scalar statistics of a transcript and the matrix it was taken from:
/// `v_kᵀAv_k`, `⟨v_k, A^{k+1−j}v_j⟩` for `j < k`, `‖Aⁱv_j‖` for `i ≥ 1`,
/// `e₁ᵀAe₁` and `(Av_K)_n`.
pub fn panel_statistics(responses: &Responses, k: usize, a: &DMatrix<f64>) -> Vec<(String, f64)> {
    let r = |i: usize, j: usize| responses.get(i, j).expect("pair in H_K");
    let mut out = Vec::new();
    for kk in 1..=k {
        out.push((format!("vAv[{kk}]"), r(0, kk).dot(r(1, kk))));
    }
    for kk in 2..=k {
        for j in 1..kk {
            out.push((format!("cross[{j},{kk}]"), r(0, kk).dot(r(kk + 1 - j, j))));
        }
    }
    for &(i, j) in index_set(k).pairs() {
        if i >= 1 {
            out.push((format!("norm[{i},{j}]"), r(i, j).norm()));
        }
    }
    out.push(("e1Ae1".to_string(), a[(0, 0)]));
    let last = r(1, k);
    out.push(("enAvK".to_string(), last[last.len() - 1]));
    out
}

/// Per-run checks of the simulator recursion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InvariantReport {
    /// Recomputing step k from data with `i + j ≤ k` gives identical bits.
    pub p1_bit_identical: bool,
    /// `max ‖ṽ_j − Ũ_{1:k}v̂_j‖`.
    pub p2_max: f64,
    /// `max ‖v̂_k − alg_k(rotated view data)‖`.
    pub p3_max: f64,
    /// `max |Ũ_k − U_k(rotated view data)|`.
    pub p4_max: f64,
    /// `max ‖simulated response − Ũ_{1:K}ᵀAⁱṽ_j‖`.
    pub consistency_max: f64,
    /// `max |Ũ_kᵀŨ_k − I|`.
    pub orthogonality_max: f64,
    /// `max` residual of `ṽ_k` against `span{Aⁱz_j : i + j ≤ k}`.
    pub span_residual_max: f64,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.p1_bit_identical
            && self.p2_max <= 1e-8
            && self.p3_max <= 1e-8
            && self.p4_max <= 1e-8
            && self.consistency_max <= 1e-8
            && self.orthogonality_max <= 1e-10
            && self.span_residual_max <= 1e-8
    }
}

fn powers(a: &DMatrix<f64>, v: &DVector<f64>, i: usize) -> DVector<f64> {
    let mut x = v.clone();
    for _ in 0..i {
        x = a * x;
    }
    x
}

/// Runs the simulator on `data` and checks P1–P4, span membership,
/// orthogonality and response consistency against the dense `a`.
pub fn check_invariants(alg: &AdaptiveAlgorithm, a: &DMatrix<f64>, data: &KrylovData) -> Result<InvariantReport> {
    let k_total = alg.queries();
    let n = a.ncols();
    let out = simulate(alg, data, Some(a))?;
    let st = &out.state;
    let mut rep = InvariantReport { p1_bit_identical: true, ..Default::default() };

    for k in 1..=k_total {
        let mut fresh = Simulator::new(alg.clone(), n);
        let truncated = data.truncated(k);
        for _ in 0..k {
            fresh.step(&truncated)?;
        }
        let fs = fresh.state();
        if fs.v_tilde[k - 1] != st.v_tilde[k - 1]
            || fs.u_tilde[k - 1] != st.u_tilde[k - 1]
            || fs.v_sim[k - 1] != st.v_sim[k - 1]
        {
            rep.p1_bit_identical = false;
        }
    }

    let mut product = DMatrix::identity(n, n);
    for k in 1..=k_total {
        let u_k = &st.u_tilde[k - 1];
        rep.orthogonality_max = rep.orthogonality_max.max(orthogonality_defect(u_k));

        let cols: Vec<DVector<f64>> = index_set(k - 1)
            .pairs()
            .iter()
            .chain(std::iter::once(&(0, k)))
            .map(|&(i, j)| data.get(i, j).cloned())
            .collect::<Result<_>>()?;
        let (basis, _) = orthonormalize(n, &cols);
        rep.span_residual_max = rep.span_residual_max.max(basis.residual(&st.v_tilde[k - 1]).norm());

        // Rotated view after k − 1 steps.
        let view = product.tr_mul(&(a * &product));
        let mut inputs = Responses::new();
        for &(i, j) in index_set(k - 1).pairs() {
            inputs.insert((i, j), powers(&view, &st.v_sim[j - 1], i));
        }
        let v_again = alg.query(k, n, &inputs)?;
        rep.p3_max = rep.p3_max.max((&v_again - &st.v_sim[k - 1]).norm());
        let y = product.tr_mul(&st.v_tilde[k - 1]);
        let fixed: Vec<DVector<f64>> = inputs.vectors().cloned().collect();
        let u_again = make_uk_rotation(&fixed, &(&y / y.norm()), &st.v_sim[k - 1])?;
        rep.p4_max = rep.p4_max.max(max_abs(&(u_again - u_k)));

        product = &product * u_k;
        for j in 1..=k {
            rep.p2_max = rep.p2_max.max((&st.v_tilde[j - 1] - &product * &st.v_sim[j - 1]).norm());
        }
    }

    for ((i, j), r) in out.transcript.iter() {
        let direct = st.u_product.tr_mul(&powers(a, &st.v_tilde[j - 1], i));
        rep.consistency_max = rep.consistency_max.max((r - direct).norm());
    }
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub strategy: String,
    pub k: usize,
    pub trials: usize,
    pub panel: PanelOutcome,
    /// Per statistic, the real-protocol sample.
    pub real: Vec<Vec<f64>>,
    /// Per statistic, the simulated sample.
    pub simulated: Vec<Vec<f64>>,
    /// Largest P2 error seen on the simulated side.
    pub p2_max: f64,
    /// Largest response-consistency error seen on the simulated side.
    pub consistency_max: f64,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.panel.passed() && self.p2_max <= 1e-8 && self.consistency_max <= 1e-8
    }
}

fn rotated_dense(spectrum: &SpectrumSpec, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    let n = spectrum.dimension();
    let u = haar_orthogonal(n, rng);
    let d = spectrum.expand();
    let scaled = DMatrix::from_fn(n, n, |i, j| u[(i, j)] * d[j]);
    let a = scaled * u.transpose();
    (&a + a.transpose()) * 0.5
}

/// Two-sample KS panel between the real protocol on `A = UΛUᵀ` and the
/// simulator fed block Krylov data of an independent copy. Each trial uses a
/// fresh Haar `U` and fresh Gaussian starts; significance `alpha` is
/// Bonferroni-corrected over the panel.
pub fn distributional_equivalence_test(
    alg: &AdaptiveAlgorithm,
    spectrum: &SpectrumSpec,
    trials: usize,
    seed: u64,
    alpha: f64,
) -> Result<EquivalenceReport> {
    let n = spectrum.dimension();
    let k = alg.queries();
    if n > DENSE_LIMIT {
        return Err(Error::config(format!("distributional test needs n ≤ {DENSE_LIMIT}, got {n}")));
    }
    if k * k >= n {
        return Err(Error::HypothesisViolated(format!("K² = {} must be below n = {n}", k * k)));
    }
    if trials < 2 {
        return Err(Error::config("distributional test needs at least two trials"));
    }
    type Row = (Vec<(String, f64)>, Vec<(String, f64)>, f64, f64);
    let rows: Vec<Result<Row>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let a = rotated_dense(spectrum, &mut stream(seed, trial, Purpose::Custom("lift-real-instance")));
            let op = SymmetricOperator::dense(a.clone())?;
            let mut oracle = CountingOracle::new(&op);
            let real = run_adaptive(alg, &mut oracle)?;
            let real_stats = panel_statistics(&real.responses, k, &a);

            let b = rotated_dense(spectrum, &mut stream(seed, trial, Purpose::Custom("lift-sim-instance")));
            let mut zr = stream(seed, trial, Purpose::Simulator);
            let starts: Vec<DVector<f64>> = (0..k).map(|_| gaussian_vector(&mut zr, n)).collect();
            let data = KrylovData::from_dense(&b, &starts, k + 1);
            let out = simulate(alg, &data, Some(&b))?;
            let rotated = out.rotated.as_ref().expect("dense view requested");
            let sim_stats = panel_statistics(&out.transcript, k, rotated);

            let st = &out.state;
            let mut p2: f64 = 0.0;
            for j in 0..k {
                p2 = p2.max((&st.v_tilde[j] - &st.u_product * &st.v_sim[j]).norm());
            }
            let mut cons: f64 = 0.0;
            for ((i, j), r) in out.transcript.iter() {
                let direct = st.u_product.tr_mul(&powers(&b, &st.v_tilde[j - 1], i));
                cons = cons.max((r - direct).norm());
            }
            Ok((real_stats, sim_stats, p2, cons))
        })
        .collect();
    let rows: Vec<Row> = rows.into_iter().collect::<Result<_>>()?;
    let names: Vec<String> = rows[0].0.iter().map(|(s, _)| s.clone()).collect();
    let m = names.len();
    let mut real = vec![Vec::with_capacity(trials); m];
    let mut simulated = vec![Vec::with_capacity(trials); m];
    let (mut p2_max, mut consistency_max) = (0.0f64, 0.0f64);
    for (rs, ss, p2, cons) in &rows {
        for (t, ((_, x), (_, y))) in rs.iter().zip(ss).enumerate() {
            real[t].push(*x);
            simulated[t].push(*y);
        }
        p2_max = p2_max.max(*p2);
        consistency_max = consistency_max.max(*cons);
    }
    let results = real.iter().zip(&simulated).map(|(x, y)| ks_two_sample(x, y)).collect();
    Ok(EquivalenceReport {
        strategy: alg.strategy().name().to_string(),
        k,
        trials,
        panel: PanelOutcome { names, results, alpha },
        real,
        simulated,
        p2_max,
        consistency_max,
    })
}
