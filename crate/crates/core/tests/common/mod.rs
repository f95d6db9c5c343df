#![allow(dead_code)]

use matvec_lab::experiments::{self, csv_string, emit_csv, ConfigMap, ExperimentKind};
use matvec_lab::krylov::{best_correlation, block_krylov_rayleigh_ritz, krylov_iteration, rectangular_krylov};
use matvec_lab::lifting::{run_adaptive, AdaptiveAlgorithm};
use matvec_lab::operators::{CountingOracle, RectOperator, SymmetricOperator};
use matvec_lab::rng::{gaussian_matrix, stream, Purpose};
use matvec_lab::schatten::lra_report;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Quick configurations, one per experiment.
pub const SMALL_CONFIGS: [(ExperimentKind, &str); 6] = [
    (ExperimentKind::LowerSingle, "seed = 4\nn = 101\neps = 0.25\nq_spec = 4\nq = 2,4,8\ntrials = 6"),
    (ExperimentKind::LowerBlock, "seed = 4\nn = 101\neps = 0.2\nq_spec = 4\nr = 2\ns = 1,2\ntrials = 4\nconcentration = true"),
    (ExperimentKind::UpperSchatten, "seed = 4\nn = 40\nd = 20\ntrials = 5"),
    (ExperimentKind::GoodVector, "seed = 4\ntrials = 20"),
    (
        ExperimentKind::LiftSim,
        "seed = 4\nn = 17\nk = 2\ntrials = 30\ninvariant_runs = 2\ncompare_n = 65\ncompare_q_spec = 3\ncompare_k = 3\ncompare_trials = 4",
    ),
    (ExperimentKind::ChebEnvelope, "seed = 4\nd_max = 20"),
];

/// Runs every small configuration twice, in memory and through files, and
/// returns a description of each mismatch.
pub fn determinism_failures() -> Vec<String> {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut failures = Vec::new();
    for (kind, text) in SMALL_CONFIGS {
        let cfg = ConfigMap::parse(text).unwrap().resolve(kind).unwrap();
        let a = experiments::run(&cfg).unwrap();
        let b = experiments::run(&cfg).unwrap();
        if csv_string(&a.rows) != csv_string(&b.rows) {
            failures.push(format!("{kind}: in-memory CSV differs"));
        }
        let pa = dir.path().join(format!("{kind}-a.csv"));
        let pb = dir.path().join(format!("{kind}-b.csv"));
        emit_csv(&a.rows, &pa).unwrap();
        emit_csv(&b.rows, &pb).unwrap();
        if std::fs::read(&pa).unwrap() != std::fs::read(&pb).unwrap() {
            failures.push(format!("{kind}: files differ"));
        }
        if a.rows.is_empty() {
            failures.push(format!("{kind}: no rows"));
        }
    }
    failures
}

fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let g = gaussian_matrix(&mut stream(seed, 0, Purpose::Instance), n, n);
    (&g + g.transpose()) * 0.5
}

/// Top eigenpair of `A²` and the relative gap to the next eigenvalue.
fn top_of_square(a: &DMatrix<f64>) -> (f64, DVector<f64>, f64) {
    let eig = SymmetricEigen::new(a * a);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let top = eig.eigenvalues[idx[0]];
    let gap = if idx.len() > 1 { (top - eig.eigenvalues[idx[1]]) / top } else { 1.0 };
    (top, eig.eigenvectors.column(idx[0]).into_owned(), gap)
}

fn check(failures: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        failures.push(what());
    }
}

/// Every solver on random instances with `n ≤ 12`, against dense ground truth.
pub fn small_oracle_failures(trials: u64) -> Vec<String> {
    let mut failures = Vec::new();
    for t in 0..trials {
        let n = 2 + (t as usize % 11);
        let a = random_symmetric(n, 1000 + t);
        let (top, u, gap) = top_of_square(&a);
        let op = SymmetricOperator::dense(a.clone()).unwrap();

        let mut o = CountingOracle::new(&op);
        let (v, sub) = krylov_iteration(&mut o, n, &mut stream(t, 0, Purpose::StartVector)).unwrap();
        let val = (&a * &v).norm_squared();
        check(&mut failures, (val - top).abs() <= 1e-8 * top, || format!("trial {t}: krylov value {val} vs {top}"));
        if gap > 1e-3 {
            let c = v.dot(&u).abs();
            check(&mut failures, c >= 1.0 - 1e-6, || format!("trial {t}: krylov vector correlation {c}"));
        }
        let bc = best_correlation(&sub, &u).unwrap();
        check(&mut failures, (bc - 1.0).abs() <= 1e-8, || format!("trial {t}: saturated correlation {bc}"));
        let rel = lra_report(&a, &v, f64::INFINITY, o.count(), None).unwrap().relative_error;
        if gap > 1e-3 {
            check(&mut failures, (rel - 1.0).abs() <= 1e-6, || format!("trial {t}: krylov relative error {rel}"));
        }

        let mut o = CountingOracle::new(&op);
        let s = 2.min(n);
        let ritz = block_krylov_rayleigh_ritz(&mut o, n, s, &mut stream(t, 1, Purpose::StartVector)).unwrap();
        let val = (&a * &ritz.v).norm_squared();
        check(&mut failures, (val - top).abs() <= 1e-8 * top, || format!("trial {t}: block value {val} vs {top}"));

        let d = (n - 1).max(1);
        let b = gaussian_matrix(&mut stream(2000 + t, 0, Purpose::Instance), n, d);
        let svd = b.clone().svd(false, true);
        let s1 = svd.singular_values.max();
        let rect = RectOperator::new(b.clone()).unwrap();
        let mut o = CountingOracle::new(&rect);
        let sol = rectangular_krylov(&mut o, n, &mut stream(t, 2, Purpose::StartVector)).unwrap();
        check(&mut failures, (sol.at_w_norm - s1).abs() <= 1e-8 * s1, || {
            format!("trial {t}: rect ‖Aᵀw‖ {} vs σ₁ {s1}", sol.at_w_norm)
        });
        let achieved = (&b * &sol.v).norm();
        check(&mut failures, (achieved - s1).abs() <= 1e-8 * s1, || {
            format!("trial {t}: rect ‖Av‖ {achieved} vs σ₁ {s1}")
        });
        if d >= 2 {
            for p in [1.0, 2.0, f64::INFINITY] {
                let rel = lra_report(&b, &sol.v, p, o.count(), None).unwrap().relative_error;
                let sv = &svd.singular_values;
                let sorted_gap = {
                    let mut s: Vec<f64> = sv.iter().copied().collect();
                    s.sort_by(|x, y| y.total_cmp(x));
                    (s[0] - s[1]) / s[0]
                };
                if sorted_gap > 1e-3 {
                    check(&mut failures, (rel - 1.0).abs() <= 1e-6, || {
                        format!("trial {t}: rect p={p} relative error {rel}")
                    });
                }
            }
        }

        if n > 2 {
            let alg = AdaptiveAlgorithm::by_name("power-method", 2).unwrap();
            let mut o = CountingOracle::new(&op);
            let tr = run_adaptive(&alg, &mut o).unwrap();
            let err = tr.replay_error(&a);
            check(&mut failures, err <= 1e-10, || format!("trial {t}: adaptive replay error {err}"));
        }
    }
    failures
}
