//! Chebyshev polynomials of the first kind.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::operators::CountingOracle;

/// Largest degree for which monomial coefficients are produced. The
/// coefficients of `T_d` grow like `2^d`.
pub const MONOMIAL_DEGREE_CAP: usize = 200;

/// Polynomial in the monomial basis; `coeffs[i]` multiplies `xⁱ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCoeffs {
    coeffs: Vec<f64>,
}

impl PolyCoeffs {
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidOperator("polynomial coefficients must be finite".into()));
        }
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Ok(Self { coeffs })
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = 1.0;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }
}

/// `T_d(x)`.
pub fn cheb_eval(d: usize, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (d as f64 * x.acos()).cos()
    } else {
        let s = (x * x - 1.0).sqrt();
        let d = d as i32;
        0.5 * ((x - s).powi(d) + (x + s).powi(d))
    }
}

/// `log T_d(x)` for `x ≥ 1`, evaluated without forming `T_d(x)`.
pub fn cheb_log_eval(d: usize, x: f64) -> f64 {
    assert!(x >= 1.0, "cheb_log_eval needs x >= 1, got {x}");
    let r = x + (x * x - 1.0).sqrt();
    let lr = r.ln();
    let d = d as f64;
    // T_d(x) = ½ r^d (1 + r^{-2d}).
    d * lr - std::f64::consts::LN_2 + (-2.0 * d * lr).exp().ln_1p()
}

/// Monomial coefficients of `T_d` from `T_{d+1} = 2x·T_d − T_{d−1}`.
pub fn cheb_coeffs(d: usize) -> Result<PolyCoeffs> {
    if d > MONOMIAL_DEGREE_CAP {
        return Err(Error::DegreeTooLarge { degree: d, cap: MONOMIAL_DEGREE_CAP });
    }
    let mut prev = vec![1.0];
    if d == 0 {
        return PolyCoeffs::new(prev);
    }
    let mut cur = vec![0.0, 1.0];
    for _ in 1..d {
        let mut next = vec![0.0; cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    PolyCoeffs::new(cur)
}

/// `cos(iπ/d)` for `i = 0..=d`, decreasing.
pub fn cheb_extrema(d: usize) -> Vec<f64> {
    assert!(d >= 1, "cheb_extrema needs d >= 1");
    (0..=d)
        .map(|i| {
            // Pin the symmetric points so the middle one is exactly 0.
            if 2 * i == d {
                0.0
            } else {
                (i as f64 * std::f64::consts::PI / d as f64).cos()
            }
        })
        .collect()
}

/// `T_d(x + eps) / T_d(1 + eps)`.
pub fn shifted_cheb_eval(d: usize, eps: f64, x: f64) -> f64 {
    let num = cheb_eval(d, x + eps);
    let den = cheb_eval(d, 1.0 + eps);
    if den.is_finite() {
        num / den
    } else {
        // Ratio in log space when T_d(1 + eps) overflows.
        let log_den = cheb_log_eval(d, 1.0 + eps);
        let y = x + eps;
        if y.abs() <= 1.0 {
            num * (-log_den).exp()
        } else {
            let sign = if y < 0.0 && d % 2 == 1 { -1.0 } else { 1.0 };
            sign * (cheb_log_eval(d, y.abs()) - log_den).exp()
        }
    }
}

/// `min(√ε·d, ε·d²)`, the exponent scale of Chebyshev growth just above 1.
pub fn growth_scale(d: usize, eps: f64) -> f64 {
    let d = d as f64;
    (eps.sqrt() * d).min(eps * d * d)
}

#[derive(Clone, Debug)]
pub struct EnvelopePoint {
    pub d: usize,
    pub eps: f64,
    pub log_value: f64,
    pub scale: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct EnvelopeReport {
    pub points: Vec<EnvelopePoint>,
    /// Largest `ĉ` with `exp(ĉ·scale) ≤ T_d(1+ε)` on the grid.
    pub c_low: f64,
    /// Smallest `Ĉ` with `T_d(1+ε) ≤ exp(Ĉ·scale)` on the grid.
    pub c_high: f64,
}

/// Fits the growth envelope over `d = 1..=d_max`.
pub fn growth_envelope_check(d_max: usize, eps_grid: &[f64]) -> Result<EnvelopeReport> {
    let ds: Vec<usize> = (1..=d_max).collect();
    growth_envelope_over(&ds, eps_grid)
}

pub fn growth_envelope_over(degrees: &[usize], eps_grid: &[f64]) -> Result<EnvelopeReport> {
    if degrees.is_empty() || eps_grid.is_empty() || degrees.contains(&0) {
        return Err(Error::config("envelope grid needs positive degrees and at least one eps"));
    }
    if let Some(e) = eps_grid.iter().find(|&&e| !(e > 0.0 && e < 0.5)) {
        return Err(Error::config(format!("eps = {e} outside (0, 0.5)")));
    }
    let mut points = Vec::with_capacity(degrees.len() * eps_grid.len());
    for &eps in eps_grid {
        for &d in degrees {
            let log_value = cheb_log_eval(d, 1.0 + eps);
            let scale = growth_scale(d, eps);
            points.push(EnvelopePoint { d, eps, log_value, scale, ratio: log_value / scale });
        }
    }
    let c_low = points.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    let c_high = points.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
    if c_low <= 0.0 {
        return Err(Error::HypothesisViolated(format!("fitted lower constant {c_low} is not positive")));
    }
    Ok(EnvelopeReport { points, c_low, c_high })
}

/// `p(A)·g` by Horner's scheme: exactly `deg p` matvecs.
pub fn apply_poly(oracle: &mut CountingOracle<'_>, p: &PolyCoeffs, g: &DVector<f64>) -> Result<DVector<f64>> {
    let Some(degree) = p.degree() else {
        return Ok(DVector::zeros(g.len()));
    };
    if let Some(remaining) = oracle.remaining() {
        if remaining < degree {
            return Err(Error::BudgetExceeded { budget: oracle.budget().unwrap_or(0) });
        }
    }
    let c = p.coeffs();
    let mut y = g * c[degree];
    for r in (0..degree).rev() {
        y = oracle.apply(&y)?;
        y.axpy(c[r], g, 1.0);
    }
    Ok(y)
}

/// `p(A)·g` from a stored ladder `[g, Ag, A²g, …]`; no matvecs.
pub fn apply_poly_to_ladder(p: &PolyCoeffs, ladder: &[DVector<f64>]) -> Result<DVector<f64>> {
    let Some(first) = ladder.first() else {
        return Err(Error::config("empty Krylov ladder"));
    };
    let needed = p.degree().map_or(0, |d| d + 1);
    if needed > ladder.len() {
        return Err(Error::DimensionMismatch { expected: needed, got: ladder.len() });
    }
    let mut y = DVector::zeros(first.len());
    for (c, v) in p.coeffs().iter().zip(ladder) {
        y.axpy(*c, v, 1.0);
    }
    Ok(y)
}
