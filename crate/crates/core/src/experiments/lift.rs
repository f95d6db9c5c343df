//! Lifting simulator: invariants, distributional equivalence, and the
//! adaptive-versus-block comparison on the hard instance.

use nalgebra::DVector;

use super::lower::InstancePool;
use super::{aggregate_rows, default_instances, par_trials, Check, ExperimentConfig, Outcome, SweepRow};
use crate::error::Result;
use crate::krylov::{best_correlation, block_krylov};
use crate::lifting::{
    check_invariants, distributional_equivalence_test, run_adaptive, AdaptiveAlgorithm, InvariantReport, KrylovData,
};
use crate::linalg::orthonormalize;
use crate::operators::{build_hard_instance, hard_spectrum, CountingOracle, SpectrumSpec};
use crate::rng::{gaussian_vector, stream, Purpose};
use crate::stats::median;

/// Spectrum for the dense lifting runs: the hard spectrum with `q = n − 2`,
/// so every eigenvalue below the top one is simple.
pub fn lift_spectrum(n: usize, eps: f64) -> Result<SpectrumSpec> {
    hard_spectrum(n, eps, n.saturating_sub(2).max(1))
}

/// P1–P4 and consistency on one fresh dense instance.
pub fn invariant_run(alg: &AdaptiveAlgorithm, spectrum: &SpectrumSpec, seed: u64, run: u64) -> Result<InvariantReport> {
    let n = spectrum.dimension();
    let k = alg.queries();
    let a = build_hard_instance(spectrum, &mut stream(seed, run, Purpose::Custom("lift-invariant-instance")))
        .operator()
        .to_dense();
    let mut zr = stream(seed, run, Purpose::Custom("lift-invariant-starts"));
    let starts: Vec<DVector<f64>> = (0..k).map(|_| gaussian_vector(&mut zr, n)).collect();
    let data = KrylovData::from_dense(&a, &starts, k + 1);
    check_invariants(alg, &a, &data)
}

pub fn run_lift_sim(cfg: &ExperimentConfig) -> Result<Outcome> {
    let eps = cfg.single_eps()?;
    let spectrum = lift_spectrum(cfg.n, eps)?;
    let base = SweepRow { n: Some(cfg.n), eps: Some(eps), ..SweepRow::new("lift-sim", cfg.seed) };
    let mut rows = Vec::new();
    let mut checks = Vec::new();

    for name in &cfg.strategy {
        // Invariants for every K up to the configured one.
        let mut all_ok = true;
        let mut worst = InvariantReport { p1_bit_identical: true, ..Default::default() };
        for k in 1..=cfg.k {
            let alg = AdaptiveAlgorithm::by_name(name, k)?;
            let reports = par_trials(cfg.invariant_runs, |run| invariant_run(&alg, &spectrum, cfg.seed, run as u64))?;
            let at = SweepRow { q: Some(k), ..base.clone() };
            for (run, rep) in reports.iter().enumerate() {
                let row = at.with_trial(run);
                rows.push(row.stat(format!("p1_bit_identical[{name}]"), if rep.p1_bit_identical { 1.0 } else { 0.0 }));
                rows.push(row.stat(format!("p2_max[{name}]"), rep.p2_max));
                rows.push(row.stat(format!("p3_max[{name}]"), rep.p3_max));
                rows.push(row.stat(format!("p4_max[{name}]"), rep.p4_max));
                rows.push(row.stat(format!("consistency_max[{name}]"), rep.consistency_max));
                all_ok &= rep.passed();
                worst.p1_bit_identical &= rep.p1_bit_identical;
                worst.p2_max = worst.p2_max.max(rep.p2_max);
                worst.p3_max = worst.p3_max.max(rep.p3_max);
                worst.p4_max = worst.p4_max.max(rep.p4_max);
                worst.consistency_max = worst.consistency_max.max(rep.consistency_max);
            }
        }
        checks.push(Check::new(
            format!("{name}: invariants hold on every run for K <= {}", cfg.k),
            all_ok,
            false,
            format!(
                "P1 {}, P2 {:.1e}, P3 {:.1e}, P4 {:.1e}, consistency {:.1e}",
                worst.p1_bit_identical, worst.p2_max, worst.p3_max, worst.p4_max, worst.consistency_max
            ),
        ));

        // Distributional panel at K.
        let alg = AdaptiveAlgorithm::by_name(name, cfg.k)?;
        let rep = distributional_equivalence_test(&alg, &spectrum, cfg.trials, cfg.seed, cfg.alpha)?;
        let at = SweepRow { q: Some(cfg.k), ..base.clone() };
        for (stat, ks) in rep.panel.names.iter().zip(&rep.panel.results) {
            rows.push(at.stat(format!("ks_statistic[{name}:{stat}]"), ks.statistic));
            rows.push(at.stat(format!("ks_p_value[{name}:{stat}]"), ks.p_value));
        }
        rows.push(at.stat(format!("ks_min_p_value[{name}]"), rep.panel.min_p_value()));
        checks.push(Check::new(
            format!("{name}: KS panel passes at alpha={} (Bonferroni)", cfg.alpha),
            rep.panel.passed(),
            true,
            format!(
                "min p {:.3e}, threshold {:.3e}, {} statistics",
                rep.panel.min_p_value(),
                rep.panel.threshold(),
                rep.panel.names.len()
            ),
        ));
        checks.push(Check::new(
            format!("{name}: simulated side satisfies P2 and consistency"),
            rep.p2_max <= 1e-8 && rep.consistency_max <= 1e-8,
            false,
            format!("P2 {:.1e}, consistency {:.1e}", rep.p2_max, rep.consistency_max),
        ));
    }

    if cfg.compare {
        let (out_rows, out_checks) = compare_with_block(cfg)?;
        rows.extend(out_rows);
        checks.extend(out_checks);
    }
    Ok(Outcome { rows, checks })
}

/// Best squared correlation with `u₁` reachable from the adaptive transcript
/// versus from block Krylov with `K` starts and `K` iterations.
fn compare_with_block(cfg: &ExperimentConfig) -> Result<(Vec<SweepRow>, Vec<Check>)> {
    let n = cfg.compare_n;
    let k = cfg.compare_k;
    let spec = hard_spectrum(n, cfg.compare_eps, cfg.compare_q_spec)?;
    let trials = cfg.compare_trials;
    let instances = cfg.instances.unwrap_or_else(|| default_instances(n, trials));
    let pool = InstancePool::new(spec, cfg.seed, instances, trials)?;
    let block: Vec<f64> = par_trials(trials, |trial| {
        let inst = pool.for_trial(trial);
        let mut oracle = CountingOracle::new(inst.operator());
        let sub = block_krylov(&mut oracle, k, k, &mut stream(cfg.seed, trial as u64, Purpose::StartVector))?;
        Ok(best_correlation(&sub, inst.planted_top_eigenvector())?.powi(2))
    })?;
    let base = SweepRow {
        n: Some(n),
        eps: Some(cfg.compare_eps),
        q: Some(cfg.compare_q_spec),
        r: Some(k),
        s: Some(k),
        ..SweepRow::new("lift-sim", cfg.seed)
    };
    let mut rows = Vec::new();
    for (trial, &c) in block.iter().enumerate() {
        rows.push(base.with_trial(trial).stat("compare_correlation_sq[block]", c));
    }
    rows.extend(aggregate_rows(&base, "compare_correlation_sq[block]", &block));
    let block_median = median(&block);
    let mut checks = Vec::new();
    for name in &cfg.strategy {
        let alg = AdaptiveAlgorithm::by_name(name, k)?;
        let adaptive: Vec<f64> = par_trials(trials, |trial| {
            let inst = pool.for_trial(trial);
            let mut oracle = CountingOracle::new(inst.operator());
            let tr = run_adaptive(&alg, &mut oracle)?;
            let cols: Vec<DVector<f64>> = tr.responses.vectors().cloned().collect();
            let (basis, _) = orthonormalize(n, &cols);
            Ok(basis.projection_norm(inst.planted_top_eigenvector()).powi(2))
        })?;
        let stat = format!("compare_correlation_sq[{name}]");
        for (trial, &c) in adaptive.iter().enumerate() {
            rows.push(base.with_trial(trial).stat(stat.clone(), c));
        }
        rows.extend(aggregate_rows(&base, &stat, &adaptive));
        let m = median(&adaptive);
        checks.push(Check::new(
            format!("{name}: adaptive median correlation_sq within block median + 0.02 (K={k})"),
            m <= block_median + 0.02,
            true,
            format!("adaptive {m:.4}, block {block_median:.4}"),
        ));
    }
    Ok((rows, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ConfigMap, ExperimentKind};

    #[test]
    fn lift_spectrum_is_simple_below_top() {
        let s = lift_spectrum(32, 0.25).unwrap();
        assert_eq!(s.dimension(), 32);
        assert!(s.entries().iter().all(|&(_, m)| m == 1));
    }

    #[test]
    fn power_method_invariants_k3() {
        let spec = lift_spectrum(32, 0.25).unwrap();
        let alg = AdaptiveAlgorithm::by_name("power-method", 3).unwrap();
        for run in 0..5 {
            let rep = invariant_run(&alg, &spec, 9, run).unwrap();
            assert!(rep.passed(), "{rep:?}");
        }
    }

    #[test]
    fn small_run_with_comparison() {
        let c = ConfigMap::parse(
            "seed = 1\nn = 17\nk = 2\ntrials = 40\ninvariant_runs = 2\ncompare_n = 65\ncompare_q_spec = 3\ncompare_k = 3\ncompare_trials = 6\nstrategy = power-method",
        )
        .unwrap()
        .resolve(ExperimentKind::LiftSim)
        .unwrap();
        let out = run_lift_sim(&c).unwrap();
        assert!(out.checks.iter().any(|c| c.name.contains("invariants") && c.passed));
        assert!(out.rows.iter().any(|r| r.statistic_name == "compare_correlation_sq[power-method]"));
    }

    #[test]
    fn k_squared_at_least_n_is_rejected() {
        let err = ConfigMap::parse("seed = 1\nn = 16\nk = 4").unwrap().resolve(ExperimentKind::LiftSim);
        assert!(err.is_err());
    }
}
