//! Lower-bound sweeps on the Chebyshev-spectrum hard instance.

use std::sync::Arc;

use nalgebra::DVector;

use super::{aggregate_rows, default_instances, fraction, par_trials, Check, ExperimentConfig, Outcome, SweepRow};
use crate::error::Result;
use crate::krylov::{best_correlation, block_krylov, KrylovIteration};
use crate::operators::{
    build_hard_instance, hard_spectrum, nearest_valid_n, CountingOracle, HardInstance, SpectrumSpec,
};
use crate::rng::{gaussian_vector, stream, Purpose};
use crate::schatten::hard_instance_report;
use crate::stats::median;

/// Instances shared by the trials of one sweep. When every trial gets its own
/// instance they are built on demand instead of held in memory.
pub(crate) struct InstancePool {
    spec: SpectrumSpec,
    seed: u64,
    count: usize,
    shared: Vec<Arc<HardInstance>>,
}

impl InstancePool {
    pub(crate) fn new(spec: SpectrumSpec, seed: u64, count: usize, trials: usize) -> Result<Self> {
        let count = count.max(1);
        let shared = if count < trials {
            par_trials(count, |i| {
                Ok(Arc::new(build_hard_instance(&spec, &mut stream(seed, i as u64, Purpose::Instance))))
            })?
        } else {
            Vec::new()
        };
        Ok(Self { spec, seed, count, shared })
    }

    pub(crate) fn for_trial(&self, trial: usize) -> Arc<HardInstance> {
        let idx = trial % self.count;
        match self.shared.get(idx) {
            Some(inst) => Arc::clone(inst),
            None => Arc::new(build_hard_instance(&self.spec, &mut stream(self.seed, idx as u64, Purpose::Instance))),
        }
    }
}

struct SingleTrial {
    correlation_sq: Vec<f64>,
    relative_error: Vec<f64>,
    queries: Vec<usize>,
}

/// Single-vector Krylov on the hard instance: per q, the best squared
/// correlation of the subspace with `u₁` and the spectral relative error of
/// the Rayleigh–Ritz output. All q share one ladder per trial.
pub fn run_lower_single(cfg: &ExperimentConfig) -> Result<Outcome> {
    let eps = cfg.single_eps()?;
    let spec = hard_spectrum(cfg.n, eps, cfg.q_spec)?;
    let mut grid = cfg.q.clone();
    grid.sort_unstable();
    grid.dedup();
    let instances = cfg.instances.unwrap_or_else(|| default_instances(cfg.n, cfg.trials));
    let pool = InstancePool::new(spec, cfg.seed, instances, cfg.trials)?;
    let results = par_trials(cfg.trials, |trial| {
        let inst = pool.for_trial(trial);
        let mut oracle = CountingOracle::new(inst.operator());
        let mut it = KrylovIteration::new(&oracle, &mut stream(cfg.seed, trial as u64, Purpose::StartVector))?;
        let mut out = SingleTrial { correlation_sq: Vec::new(), relative_error: Vec::new(), queries: Vec::new() };
        for &q in &grid {
            it.extend_to(&mut oracle, q)?;
            let (v, sub) = it.solution(&mut oracle)?;
            let corr = best_correlation(&sub, inst.planted_top_eigenvector())?;
            let report = hard_instance_report(&inst, &v, sub.queries_used())?;
            out.correlation_sq.push(corr * corr);
            out.relative_error.push(report.relative_error);
            out.queries.push(oracle.count());
        }
        Ok(out)
    })?;

    let base = SweepRow { n: Some(cfg.n), eps: Some(eps), ..SweepRow::new("lower-single", cfg.seed) };
    let mut rows = Vec::new();
    for (gi, &q) in grid.iter().enumerate() {
        let at = SweepRow { q: Some(q), ..base.clone() };
        for (trial, r) in results.iter().enumerate() {
            let row = at.with_trial(trial);
            rows.push(row.stat("correlation_sq", r.correlation_sq[gi]));
            rows.push(row.stat("relative_error", r.relative_error[gi]));
            rows.push(row.stat("queries", r.queries[gi] as f64));
        }
        let corr: Vec<f64> = results.iter().map(|r| r.correlation_sq[gi]).collect();
        let rel: Vec<f64> = results.iter().map(|r| r.relative_error[gi]).collect();
        rows.extend(aggregate_rows(&at, "correlation_sq", &corr));
        rows.extend(aggregate_rows(&at, "relative_error", &rel));
        rows.push(at.stat("success_fraction:relative_error", fraction(&rel, |e| e <= 1.0 + eps)));
    }

    let mut checks = Vec::new();
    if let Some(gi) = grid.iter().position(|&q| q == cfg.q_low) {
        let corr: Vec<f64> = results.iter().map(|r| r.correlation_sq[gi]).collect();
        let m = median(&corr);
        checks.push(Check::new(
            format!("median correlation_sq at q={} below tau_low", cfg.q_low),
            m < cfg.tau_low,
            true,
            format!("median {m:.3e}, tau_low {:.3e}", cfg.tau_low),
        ));
    }
    if let Some(&q_max) = grid.last() {
        let gi = grid.len() - 1;
        let rel: Vec<f64> = results.iter().map(|r| r.relative_error[gi]).collect();
        let m = median(&rel);
        checks.push(Check::new(
            format!("median relative error at q={q_max} within 1+eps"),
            m <= 1.0 + eps,
            true,
            format!("median {m:.6}, bound {:.6}", 1.0 + eps),
        ));
        let frac = fraction(&rel, |e| e <= 1.0 + eps);
        checks.push(Check::new(
            format!("relative error at q={q_max} within 1+eps in 95% of trials"),
            frac >= 0.95,
            true,
            format!("fraction {frac:.3}"),
        ));
    }
    if grid.len() >= 2 {
        let mut pairs = 0usize;
        let mut monotone = 0usize;
        for r in &results {
            for w in r.correlation_sq.windows(2) {
                pairs += 1;
                if w[1] >= w[0] - 1e-12 {
                    monotone += 1;
                }
            }
        }
        let frac = monotone as f64 / pairs as f64;
        checks.push(Check::new(
            "correlation nondecreasing over nested q",
            frac >= 0.95,
            false,
            format!("{monotone}/{pairs} pairs"),
        ));
    }
    Ok(Outcome { rows, checks })
}

/// Block Krylov on the hard instance: best squared correlation of the block
/// subspace with `u₁` for each `(r, s)`.
pub fn run_lower_block(cfg: &ExperimentConfig) -> Result<Outcome> {
    let eps = cfg.single_eps()?;
    let spec = hard_spectrum(cfg.n, eps, cfg.q_spec)?;
    let pairs = cfg.block_pairs()?;
    let instances = cfg.instances.unwrap_or_else(|| default_instances(cfg.n, cfg.trials));
    let pool = InstancePool::new(spec, cfg.seed, instances, cfg.trials)?;
    let results: Vec<Vec<(f64, usize)>> = par_trials(cfg.trials, |trial| {
        let inst = pool.for_trial(trial);
        pairs
            .iter()
            .map(|&(r, s)| {
                let mut oracle = CountingOracle::new(inst.operator());
                let sub = block_krylov(&mut oracle, r, s, &mut stream(cfg.seed, trial as u64, Purpose::StartVector))?;
                let c = best_correlation(&sub, inst.planted_top_eigenvector())?;
                Ok((c * c, oracle.count()))
            })
            .collect()
    })?;

    let base = SweepRow { n: Some(cfg.n), eps: Some(eps), ..SweepRow::new("lower-block", cfg.seed) };
    let mut rows = Vec::new();
    let mut medians = Vec::new();
    let mut checks = Vec::new();
    for (pi, &(r, s)) in pairs.iter().enumerate() {
        let at = SweepRow { r: Some(r), s: Some(s), q: Some(r * s), ..base.clone() };
        for (trial, res) in results.iter().enumerate() {
            let row = at.with_trial(trial);
            rows.push(row.stat("correlation_sq", res[pi].0));
            rows.push(row.stat("queries", res[pi].1 as f64));
        }
        let corr: Vec<f64> = results.iter().map(|res| res[pi].0).collect();
        rows.extend(aggregate_rows(&at, "correlation_sq", &corr));
        let small = fraction(&corr, |c| c <= eps / 10.0);
        rows.push(at.stat("fraction:correlation_sq<=eps/10", small));
        medians.push((s, median(&corr)));
        if cfg.budget.is_none() {
            checks.push(Check::new(
                format!("r={r}, s={s}: correlation_sq <= eps/10 in 90% of trials"),
                small >= 0.9,
                true,
                format!("fraction {small:.3}"),
            ));
        }
    }
    if let Some(b) = cfg.budget {
        let single = medians.iter().find(|(s, _)| *s == 1).map(|m| m.1);
        let widest = medians.iter().max_by_key(|(s, _)| *s).copied();
        if let (Some(m1), Some((s_max, m_max))) = (single, widest) {
            if s_max > 1 {
                checks.push(Check::new(
                    format!("budget {b}: median correlation_sq for s={s_max} at most twice s=1"),
                    m_max <= 2.0 * m1,
                    true,
                    format!("s={s_max}: {m_max:.3e}, s=1: {m1:.3e}"),
                ));
            }
        }
    }
    if cfg.concentration {
        let (r, s) = pairs[0];
        let rep = concentration_suite(cfg.n, eps, r, s, cfg.trials, cfg.seed)?;
        let at = SweepRow { n: Some(rep.n), r: Some(r), s: Some(s), ..base.clone() };
        for (trial, t) in rep.per_trial.iter().enumerate() {
            let row = at.with_trial(trial);
            rows.push(row.stat("concentration:max_abs_top", t.max_abs_top));
            rows.push(row.stat("concentration:min_group_norm/sqrt_k", t.min_group_ratio));
            rows.push(row.stat("concentration:max_group_norm/sqrt_k", t.max_group_ratio));
            rows.push(row.stat("concentration:min_sv", t.min_sv));
            rows.push(row.stat("concentration:max_sv", t.max_sv));
        }
        for (name, frac) in [
            ("(a) top coefficient", rep.frac_a),
            ("(b) group norms", rep.frac_b),
            ("(c) V singular values", rep.frac_c),
        ] {
            rows.push(at.stat(format!("concentration_fraction:{name}"), frac));
            checks.push(Check::new(
                format!("concentration {name} in 90% of trials"),
                frac >= 0.9,
                true,
                format!("fraction {frac:.3}"),
            ));
        }
    }
    Ok(Outcome { rows, checks })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcentrationTrial {
    /// `max_j |a_{j,1}|`.
    pub max_abs_top: f64,
    /// `min_{j,t} ‖P_t g_j‖ / √k` over the repeated eigenspaces.
    pub min_group_ratio: f64,
    pub max_group_ratio: f64,
    /// Extreme singular values of `V⁽ᵗ⁾ = [P_t g_1 … P_t g_s]/√k` over t.
    pub min_sv: f64,
    pub max_sv: f64,
}

#[derive(Clone, Debug)]
pub struct ConcentrationReport {
    pub n: usize,
    pub k: usize,
    pub per_trial: Vec<ConcentrationTrial>,
    pub frac_a: f64,
    pub frac_b: f64,
    pub frac_c: f64,
}

/// Concentration properties of `s` Gaussian starts against the hard spectrum
/// with `r + 1` repeated eigenspaces of dimension `k = (n − 1)/(r + 1)`.
/// `n` is moved up to the nearest valid size. The starts are drawn directly
/// in eigen-coordinates, where `Uᵀg` is again standard Gaussian.
pub fn concentration_suite(
    n: usize,
    eps: f64,
    r: usize,
    s: usize,
    trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    let n = nearest_valid_n(n, r);
    let spec = hard_spectrum(n, eps, r)?;
    let k = (n - 1) / (r + 1);
    let a_bound = 5.0 * (n as f64).ln().sqrt();
    let per_trial = par_trials(trials, |trial| {
        let mut rng = stream(seed, trial as u64, Purpose::Custom("concentration"));
        let coords: Vec<DVector<f64>> = (0..s).map(|_| gaussian_vector(&mut rng, n)).collect();
        let mut t = ConcentrationTrial {
            max_abs_top: 0.0,
            min_group_ratio: f64::INFINITY,
            max_group_ratio: 0.0,
            min_sv: f64::INFINITY,
            max_sv: 0.0,
        };
        for c in &coords {
            t.max_abs_top = t.max_abs_top.max(c[0].abs());
        }
        let mut offset = spec.entries()[0].1;
        for &(_, m) in &spec.entries()[1..] {
            let block = nalgebra::DMatrix::from_fn(m, s, |i, j| coords[j][offset + i] / (k as f64).sqrt());
            for j in 0..s {
                let ratio = block.column(j).norm();
                t.min_group_ratio = t.min_group_ratio.min(ratio);
                t.max_group_ratio = t.max_group_ratio.max(ratio);
            }
            let sv = block.singular_values();
            t.min_sv = t.min_sv.min(sv.min());
            t.max_sv = t.max_sv.max(sv.max());
            offset += m;
        }
        Ok(t)
    })?;
    let frac = |f: &dyn Fn(&ConcentrationTrial) -> bool| {
        per_trial.iter().filter(|t| f(t)).count() as f64 / per_trial.len().max(1) as f64
    };
    let frac_a = frac(&|t| t.max_abs_top <= a_bound);
    let frac_b = frac(&|t| t.min_group_ratio >= 0.5 && t.max_group_ratio <= 2.0);
    let frac_c = frac(&|t| t.min_sv >= 0.25 && t.max_sv <= 4.0);
    Ok(ConcentrationReport { n, k, per_trial, frac_a, frac_b, frac_c })
}
