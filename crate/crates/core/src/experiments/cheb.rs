use super::{Check, ExperimentConfig, Outcome, SweepRow};
use crate::calibration::{ENVELOPE_C_HIGH, ENVELOPE_C_LOW};
use crate::chebyshev::growth_envelope_check;
use crate::error::Result;

/// Fits `ĉ, Ĉ` with `exp(ĉ·m) ≤ T_d(1+ε) ≤ exp(Ĉ·m)`, `m = min(√ε·d, ε·d²)`,
/// over `d = 1..=d_max` and the eps grid.
pub fn run_cheb_envelope(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rep = growth_envelope_check(cfg.d_max, &cfg.eps)?;
    let base = SweepRow::new("cheb-envelope", cfg.seed);
    let mut rows = Vec::with_capacity(2 * rep.points.len() + 2);
    for pt in &rep.points {
        let at = SweepRow { eps: Some(pt.eps), q: Some(pt.d), ..base.clone() };
        rows.push(at.stat("log_cheb", pt.log_value));
        rows.push(at.stat("ratio", pt.ratio));
    }
    rows.push(base.stat("c_low", rep.c_low));
    rows.push(base.stat("c_high", rep.c_high));
    let checks = vec![
        Check::new("fitted lower constant at least 0.5", rep.c_low >= 0.5, false, format!("c_low {:.4}", rep.c_low)),
        Check::new("fitted upper constant at most 2.1", rep.c_high <= 2.1, false, format!("c_high {:.4}", rep.c_high)),
        Check::new(
            "frozen constants bracket the grid",
            rep.c_low >= ENVELOPE_C_LOW && rep.c_high <= ENVELOPE_C_HIGH,
            false,
            format!("[{:.4}, {:.4}] vs frozen [{ENVELOPE_C_LOW}, {ENVELOPE_C_HIGH}]", rep.c_low, rep.c_high),
        ),
    ];
    Ok(Outcome { rows, checks })
}
