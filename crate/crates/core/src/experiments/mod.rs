//! Experiment drivers. Each returns CSV rows plus a list of pass/fail checks.

pub mod cheb;
pub mod config;
pub mod good;
pub mod lift;
pub mod lower;
pub mod output;
pub mod upper;

use rayon::prelude::*;

pub use config::{show_config, ConfigMap, ExperimentConfig, ExperimentKind};
pub use output::{csv_string, emit_csv, format_g12, SweepRow};

use crate::error::Result;
use crate::stats::{median, percentile};

/// One acceptance condition evaluated on a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Statistical checks are rerun once with more trials on failure.
    pub statistical: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, statistical: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, statistical, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub rows: Vec<SweepRow>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn statistical_failure(&self) -> bool {
        self.checks.iter().any(|c| c.statistical && !c.passed)
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment {
        ExperimentKind::LowerSingle => lower::run_lower_single(cfg),
        ExperimentKind::LowerBlock => lower::run_lower_block(cfg),
        ExperimentKind::UpperSchatten => upper::run_upper_schatten(cfg),
        ExperimentKind::GoodVector => good::run_good_vector(cfg),
        ExperimentKind::LiftSim => lift::run_lift_sim(cfg),
        ExperimentKind::ChebEnvelope => cheb::run_cheb_envelope(cfg),
    }
}

/// Runs once; when a statistical check fails, runs again with four times the
/// trials and returns both outcomes (the second decides).
pub fn run_with_rerun(cfg: &ExperimentConfig) -> Result<(Outcome, Option<Outcome>)> {
    let first = run(cfg)?;
    if !first.statistical_failure() {
        return Ok((first, None));
    }
    for c in first.checks.iter().filter(|c| !c.passed) {
        log::warn!("{}: check '{}' failed ({}); rerunning with 4x trials", cfg.experiment, c.name, c.detail);
    }
    let mut bigger = cfg.clone();
    bigger.trials *= 4;
    bigger.compare_trials *= 4;
    let second = run(&bigger)?;
    for c in &second.checks {
        log::warn!(
            "{} rerun: check '{}' {} ({})",
            cfg.experiment,
            c.name,
            if c.passed { "passed" } else { "failed" },
            c.detail
        );
    }
    Ok((first, Some(second)))
}

/// Runs `f` for trials `0..trials` on the rayon pool, keeping trial order.
pub fn par_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

/// Median, 5th and 95th percentile rows for `values`.
pub fn aggregate_rows(base: &SweepRow, name: &str, values: &[f64]) -> Vec<SweepRow> {
    if values.is_empty() {
        return Vec::new();
    }
    vec![
        base.stat(format!("median:{name}"), median(values)),
        base.stat(format!("p05:{name}"), percentile(values, 0.05)),
        base.stat(format!("p95:{name}"), percentile(values, 0.95)),
    ]
}

/// Fraction of `values` satisfying `pred`.
pub fn fraction(values: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| pred(v)).count() as f64 / values.len() as f64
}

/// Instance count for `n`: a fresh instance per trial up to `n = 600`,
/// four shared instances above.
pub fn default_instances(n: usize, trials: usize) -> usize {
    if n <= 600 {
        trials.max(1)
    } else {
        4.min(trials.max(1))
    }
}
