//! Good-vector existence, one fixed diagonal instance per case.

use nalgebra::{DMatrix, DVector};

use super::{aggregate_rows, Check, ExperimentConfig, Outcome, SweepRow};
use crate::calibration::good_vector_degree;
use crate::error::{Error, Result};
use crate::krylov::{classify_case, good_vector_exists};
use crate::operators::RectOperator;

#[derive(Clone, Debug, PartialEq)]
pub struct CaseInstance {
    pub case: u8,
    /// Singular values; `Λ = σ²`.
    pub sigma: Vec<f64>,
    pub p: f64,
    pub eps: f64,
    pub t: usize,
    /// Required success fraction.
    pub threshold: f64,
}

fn from_lambda(lambda: &[f64]) -> Vec<f64> {
    lambda.iter().map(|l| l.sqrt()).collect()
}

/// The instance used for `case`.
pub fn case_instance(case: u8) -> Result<CaseInstance> {
    let inst = match case {
        1 => {
            let mut sigma = vec![1.0];
            sigma.extend(std::iter::repeat_n(0.5, 199));
            CaseInstance { case, sigma, p: 1.0, eps: 0.1, t: good_vector_degree(1.0, 0.1), threshold: 1.0 }
        }
        2 => {
            let mut lambda = vec![1.0, 0.99, 0.98, 0.97, 0.96, 0.95, 0.9];
            lambda.extend(std::iter::repeat_n(0.3, 20));
            CaseInstance {
                case,
                sigma: from_lambda(&lambda),
                p: 2.0,
                eps: 0.008,
                t: good_vector_degree(2.0, 0.008),
                threshold: 0.9,
            }
        }
        3 => {
            let mut lambda = vec![1.0, 0.9, 0.8, 0.7];
            lambda.extend(std::iter::repeat_n(0.1, 10));
            CaseInstance { case, sigma: from_lambda(&lambda), p: 1.0, eps: 0.02, t: 12, threshold: 0.9 }
        }
        4 => {
            let mut sigma = vec![1.0];
            sigma.extend(std::iter::repeat_n(0.3, 5));
            CaseInstance { case, sigma, p: 2.0, eps: 0.1, t: 12, threshold: 0.95 }
        }
        _ => return Err(Error::config(format!("case {case} is not one of 1..4"))),
    };
    let lambda: Vec<f64> = inst.sigma.iter().map(|s| s * s).collect();
    let got = classify_case(&lambda, inst.p, inst.eps)?;
    if got != case {
        return Err(Error::CaseMismatch { case, reason: format!("instance classifies as case {got}") });
    }
    Ok(inst)
}

pub fn run_good_vector(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &case in &cfg.case {
        let inst = case_instance(case)?;
        let op = RectOperator::new(DMatrix::from_diagonal(&DVector::from_column_slice(&inst.sigma)))?;
        let report = good_vector_exists(&op, &inst.sigma, inst.p, inst.eps, inst.t, cfg.trials, cfg.seed)?;
        let base = SweepRow {
            n: Some(inst.sigma.len()),
            eps: Some(inst.eps),
            p: Some(inst.p),
            t: Some(inst.t),
            ..SweepRow::new("good-vector", cfg.seed)
        };
        let margin_name = format!("margin[case={case}]");
        for (trial, &m) in report.margins.iter().enumerate() {
            rows.push(base.with_trial(trial).stat(margin_name.clone(), m));
        }
        rows.extend(aggregate_rows(&base, &margin_name, &report.margins));
        let frac = report.success_fraction();
        rows.push(base.stat(format!("success_fraction[case={case}]"), frac));
        rows.push(base.stat(format!("queries[case={case}]"), report.queries_per_trial as f64));
        checks.push(Check::new(
            format!("case {case}: success fraction at least {}", inst.threshold),
            frac >= inst.threshold,
            true,
            format!("{}/{}", report.successes, report.trials),
        ));
    }
    Ok(Outcome { rows, checks })
}
