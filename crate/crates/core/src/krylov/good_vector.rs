//! Polynomials whose action on `AAᵀ` produces a vector well correlated with
//! the top of the spectrum, split by the shape of the normalized spectrum.

use nalgebra::DVector;

use crate::chebyshev::{cheb_coeffs, shifted_cheb_eval, PolyCoeffs};
use crate::error::{Error, Result};
use crate::operators::{CountingOracle, LinearOperator};
use crate::rng::{gaussian_vector, stream, Purpose};

/// Spectrum summaries that decide the case. `lambda` holds eigenvalues of
/// `AAᵀ` normalized so that `λ₁ = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CaseStats {
    /// `Σ_{i≥2} λᵢ^{p/2}`.
    pub tail_sum: f64,
    /// Number of `λᵢ ∈ [1 − 1/(2p), 1]`, `λ₁` included.
    pub near_top: usize,
    /// `ε^{-1/3} + 1`.
    pub count_bound: f64,
}

impl CaseStats {
    pub fn new(lambda: &[f64], p: f64, eps: f64) -> Result<Self> {
        validate_lambda(lambda)?;
        let tail_sum = lambda[1..].iter().map(|l| l.powf(p / 2.0)).sum();
        let lo = 1.0 - 1.0 / (2.0 * p);
        let near_top = lambda.iter().filter(|&&l| l >= lo).count();
        Ok(Self { tail_sum, near_top, count_bound: eps.powf(-1.0 / 3.0) + 1.0 })
    }
}

fn validate_lambda(lambda: &[f64]) -> Result<()> {
    if lambda.len() < 2 {
        return Err(Error::SpectrumMismatch("need at least two eigenvalues".into()));
    }
    if (lambda[0] - 1.0).abs() > 1e-12 {
        return Err(Error::SpectrumMismatch(format!("λ₁ = {} is not normalized to 1", lambda[0])));
    }
    if lambda.iter().any(|&l| !(0.0..=1.0 + 1e-12).contains(&l)) {
        return Err(Error::SpectrumMismatch("eigenvalues must lie in [0, 1]".into()));
    }
    if lambda.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::SpectrumMismatch("eigenvalues must be nonincreasing".into()));
    }
    Ok(())
}

fn check_params(p: f64, eps: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::config(format!("p = {p} must be a finite real >= 1")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::config(format!("eps = {eps} outside (0, 1)")));
    }
    Ok(())
}

fn hypothesis(case: u8, stats: &CaseStats, eps: f64) -> std::result::Result<(), String> {
    let s = stats.tail_sum;
    let n = stats.near_top as f64;
    let ok = match case {
        1 => s >= 1.0 / eps,
        2 => s < 1.0 / eps && n >= stats.count_bound,
        3 => (0.5..=1.0 / eps).contains(&s) && n <= stats.count_bound,
        4 => s <= 0.5,
        _ => return Err(format!("unknown case {case}")),
    };
    if ok {
        Ok(())
    } else {
        Err(format!(
            "tail sum {s:.6}, {} eigenvalues near the top, count bound {:.6}",
            stats.near_top, stats.count_bound
        ))
    }
}

/// First case, in order 1, 2, 4, 3, whose hypothesis the spectrum satisfies.
pub fn classify_case(lambda: &[f64], p: f64, eps: f64) -> Result<u8> {
    check_params(p, eps)?;
    let stats = CaseStats::new(lambda, p, eps)?;
    for case in [1, 2, 4, 3] {
        if hypothesis(case, &stats, eps).is_ok() {
            return Ok(case);
        }
    }
    // The four hypotheses cover every spectrum; reaching here means NaN input.
    Err(Error::SpectrumMismatch("spectrum fits no case".into()))
}

/// The case polynomial, kept in factored form and expanded on request.
#[derive(Clone, Debug, PartialEq)]
pub enum GoodPolynomial {
    /// Case 1: the bound holds for every vector.
    NotRequired,
    /// `x^power`.
    Monomial { power: usize },
    /// `x^power · T_d(x + δ) / T_d(1 + δ)`.
    ShiftedChebyshev { power: usize, d: usize, delta: f64 },
    /// `x^power · ∏ (x − rᵢ)`.
    Deflated { power: usize, roots: Vec<f64> },
}

impl GoodPolynomial {
    pub fn degree(&self) -> usize {
        match self {
            Self::NotRequired => 0,
            Self::Monomial { power } => *power,
            Self::ShiftedChebyshev { power, d, .. } => power + d,
            Self::Deflated { power, roots } => power + roots.len(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::NotRequired => 1.0,
            Self::Monomial { power } => x.powi(*power as i32),
            Self::ShiftedChebyshev { power, d, delta } => x.powi(*power as i32) * shifted_cheb_eval(*d, *delta, x),
            Self::Deflated { power, roots } => x.powi(*power as i32) * roots.iter().map(|r| x - r).product::<f64>(),
        }
    }

    /// Monomial expansion; fails above the coefficient cap.
    pub fn to_monomial(&self) -> Result<PolyCoeffs> {
        match self {
            Self::NotRequired => PolyCoeffs::new(vec![1.0]),
            Self::Monomial { power } => Ok(PolyCoeffs::monomial(*power)),
            Self::ShiftedChebyshev { power, d, delta } => {
                let t = cheb_coeffs(*d)?;
                let shift = PolyCoeffs::new(vec![*delta, 1.0])?;
                // Horner in polynomial arithmetic: T_d(x + δ).
                let mut acc = PolyCoeffs::zero();
                for c in t.coeffs().iter().rev() {
                    acc = acc.mul(&shift);
                    let mut cs = acc.coeffs().to_vec();
                    if cs.is_empty() {
                        cs.push(0.0);
                    }
                    cs[0] += c;
                    acc = PolyCoeffs::new(cs)?;
                }
                let scale = 1.0 / crate::chebyshev::cheb_eval(*d, 1.0 + delta);
                let scaled: Vec<f64> = acc.coeffs().iter().map(|c| c * scale).collect();
                Ok(PolyCoeffs::monomial(*power).mul(&PolyCoeffs::new(scaled)?))
            }
            Self::Deflated { power, roots } => {
                let mut acc = PolyCoeffs::monomial(*power);
                for r in roots {
                    acc = acc.mul(&PolyCoeffs::new(vec![-r, 1.0])?);
                }
                Ok(acc)
            }
        }
    }

    /// `φ(B)·g` normalized, with `B = AAᵀ/scale` applied through the oracle
    /// (two matvecs per degree). The Chebyshev factor uses the three-term
    /// recurrence, never the monomial form.
    pub fn apply_normalized(
        &self,
        oracle: &mut CountingOracle<'_>,
        scale: f64,
        g: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let mut b = |x: &DVector<f64>| -> Result<DVector<f64>> {
            let z = oracle.apply_t(x)?;
            Ok(oracle.apply(&z)? / scale)
        };
        let power = match self {
            Self::NotRequired => 0,
            Self::Monomial { power } | Self::ShiftedChebyshev { power, .. } | Self::Deflated { power, .. } => *power,
        };
        let mut v = g.clone();
        for _ in 0..power {
            v = b(&v)?;
            let n = v.norm();
            if n > 0.0 {
                v /= n;
            }
        }
        match self {
            Self::ShiftedChebyshev { d, delta, .. } => {
                let mut prev = v.clone();
                let mut cur = b(&v)? + &v * *delta;
                for _ in 1..*d {
                    let next = (b(&cur)? + &cur * *delta) * 2.0 - &prev;
                    prev = cur;
                    cur = next;
                    // The recurrence is linear: rescaling both terms is harmless.
                    let n = cur.norm();
                    if n > 1e100 {
                        prev /= n;
                        cur /= n;
                    }
                }
                if *d > 0 {
                    v = cur;
                }
            }
            Self::Deflated { roots, .. } => {
                for r in roots {
                    v = b(&v)? - &v * *r;
                }
            }
            _ => {}
        }
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::RankCollapse);
        }
        Ok(v / n)
    }
}

/// The case polynomial of degree at most `t` for the normalized spectrum.
pub fn good_vector_polynomial(case_id: u8, lambda: &[f64], p: f64, eps: f64, t: usize) -> Result<GoodPolynomial> {
    check_params(p, eps)?;
    let stats = CaseStats::new(lambda, p, eps)?;
    hypothesis(case_id, &stats, eps).map_err(|reason| Error::CaseMismatch { case: case_id, reason })?;
    let half_up = (p / 2.0).ceil() as usize;
    let poly = match case_id {
        1 => GoodPolynomial::NotRequired,
        2 => {
            if t <= half_up {
                return Err(Error::HypothesisViolated(format!("t = {t} leaves no Chebyshev degree after x^{half_up}")));
            }
            let delta = eps.powf(2.0 / 3.0) / (2.0 * p);
            GoodPolynomial::ShiftedChebyshev { power: half_up, d: t - half_up, delta }
        }
        3 => {
            let lo = 1.0 - 1.0 / (2.0 * p);
            let hi = 1.0 - eps / (2.0 * p);
            let roots: Vec<f64> = lambda.iter().copied().filter(|l| (lo..=hi).contains(l)).collect();
            GoodPolynomial::Deflated { power: t / 2, roots }
        }
        _ => GoodPolynomial::Monomial { power: t },
    };
    if poly.degree() > t {
        return Err(Error::HypothesisViolated(format!(
            "case {case_id} polynomial has degree {} > t = {t}",
            poly.degree()
        )));
    }
    Ok(poly)
}

#[derive(Clone, Debug)]
pub struct GoodVectorReport {
    pub case: u8,
    pub polynomial: GoodPolynomial,
    pub stats: CaseStats,
    pub trials: usize,
    pub successes: usize,
    /// `(wᵀΛw)^{p/2} − (1 − ε·Σ_{i≥2} λᵢ^{p/2})` per trial.
    pub margins: Vec<f64>,
    pub queries_per_trial: usize,
}

impl GoodVectorReport {
    pub fn success_fraction(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// For each trial draws `g`, forms `w = φ(Λ)g/‖·‖` through the oracle and
/// checks `(wᵀΛw)^{p/2} ≥ 1 − ε·Σ_{i≥2} λᵢ^{p/2}`. `sigma` are the singular
/// values of `A` (nonincreasing); `Λ` is `σ²/σ₁²`.
#[allow(clippy::too_many_arguments)]
pub fn good_vector_exists(
    op: &dyn LinearOperator,
    sigma: &[f64],
    p: f64,
    eps: f64,
    t: usize,
    trials: usize,
    seed: u64,
) -> Result<GoodVectorReport> {
    let Some(&s1) = sigma.first() else {
        return Err(Error::SpectrumMismatch("empty spectrum".into()));
    };
    if s1 <= 0.0 {
        return Err(Error::SpectrumMismatch("σ₁ must be positive".into()));
    }
    let scale = s1 * s1;
    let lambda: Vec<f64> = sigma.iter().map(|s| s * s / scale).collect();
    let case = classify_case(&lambda, p, eps)?;
    let polynomial = good_vector_polynomial(case, &lambda, p, eps, t)?;
    let stats = CaseStats::new(&lambda, p, eps)?;
    let target = 1.0 - eps * stats.tail_sum;
    let mut margins = Vec::with_capacity(trials);
    let mut queries_per_trial = 0;
    for trial in 0..trials {
        let mut oracle = CountingOracle::new(op);
        let g = gaussian_vector(&mut stream(seed, trial as u64, Purpose::StartVector), op.nrows());
        let w = polynomial.apply_normalized(&mut oracle, scale, &g)?;
        let atw = oracle.apply_t(&w)?;
        let rayleigh = atw.norm_squared() / scale;
        margins.push(rayleigh.powf(p / 2.0) - target);
        queries_per_trial = oracle.count();
    }
    let successes = margins.iter().filter(|&&m| m >= 0.0).count();
    Ok(GoodVectorReport { case, polynomial, stats, trials, successes, margins, queries_per_trial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::RectOperator;
    use nalgebra::DMatrix;

    #[test]
    fn case4_monomial() {
        let poly = good_vector_polynomial(4, &[1.0, 0.3, 0.2], 2.0, 0.1, 8).unwrap();
        assert_eq!(poly, GoodPolynomial::Monomial { power: 8 });
        assert_eq!(poly.eval(1.0), 1.0);
        assert!((poly.eval(0.3) - 6.561e-5).abs() < 1e-18);
    }

    #[test]
    fn case3_deflation_roots() {
        let lambda = [1.0, 0.6, 0.55, 0.1];
        let poly = good_vector_polynomial(3, &lambda, 1.0, 0.1, 10).unwrap();
        assert_eq!(poly, GoodPolynomial::Deflated { power: 5, roots: vec![0.6, 0.55] });
        assert_eq!(poly.eval(0.6), 0.0);
        assert_eq!(poly.eval(0.55), 0.0);
        assert!(poly.eval(1.0) > 0.0);
        let m = poly.to_monomial().unwrap();
        assert_eq!(m.degree(), Some(7));
        assert!((m.eval(0.8) - poly.eval(0.8)).abs() < 1e-15);
    }

    fn case2_lambda() -> Vec<f64> {
        let mut l = vec![1.0, 0.99, 0.98, 0.97, 0.96, 0.95, 0.9];
        l.extend(std::iter::repeat_n(0.3, 20));
        l
    }

    #[test]
    fn case2_chebyshev_bound_on_grid() {
        let (p, eps) = (2.0, 0.008);
        let lambda = case2_lambda();
        assert_eq!(classify_case(&lambda, p, eps).unwrap(), 2);
        let t = crate::calibration::good_vector_degree(p, eps);
        let poly = good_vector_polynomial(2, &lambda, p, eps, t).unwrap();
        assert!(poly.eval(1.0) > 0.0);
        let edge = 1.0 - eps.powf(2.0 / 3.0) / (2.0 * p);
        for i in 0..=1000 {
            let x = edge * i as f64 / 1000.0;
            assert!(poly.eval(x).abs() <= x.powf(p / 2.0) * eps * eps / p, "x = {x}");
        }
    }

    #[test]
    fn case_mismatch_and_classification() {
        // Tail sum 0.45 with p = 2 is case 4, not case 3.
        let lambda = [1.0, 0.09, 0.09, 0.09, 0.09, 0.09];
        assert_eq!(classify_case(&lambda, 2.0, 0.1).unwrap(), 4);
        assert!(matches!(good_vector_polynomial(3, &lambda, 2.0, 0.1, 10), Err(Error::CaseMismatch { case: 3, .. })));
        let flat = vec![1.0; 30];
        assert_eq!(classify_case(&flat, 2.0, 0.05).unwrap(), 1);
        assert_eq!(good_vector_polynomial(1, &flat, 2.0, 0.05, 4).unwrap(), GoodPolynomial::NotRequired);
        assert!(matches!(good_vector_polynomial(4, &[0.5, 0.2], 2.0, 0.1, 3), Err(Error::SpectrumMismatch(_))));
    }

    fn diag_op(sigma: &[f64]) -> RectOperator {
        RectOperator::new(DMatrix::from_diagonal(&DVector::from_vec(sigma.to_vec()))).unwrap()
    }

    #[test]
    fn existence_case4_example() {
        let sigma = [1.0, 0.3, 0.3, 0.3, 0.3, 0.3];
        let report = good_vector_exists(&diag_op(&sigma), &sigma, 2.0, 0.1, 12, 100, 7).unwrap();
        assert_eq!(report.case, 4);
        assert!(report.successes >= 95, "{}", report.successes);
        assert_eq!(report.queries_per_trial, 2 * 12 + 1);
    }

    #[test]
    fn existence_case1_is_trivial() {
        let sigma = vec![1.0; 40];
        let report = good_vector_exists(&diag_op(&sigma), &sigma, 2.0, 0.05, 4, 20, 8).unwrap();
        assert_eq!(report.case, 1);
        assert_eq!(report.successes, 20);
    }

    #[test]
    fn chebyshev_application_matches_scalar_eval() {
        let (p, eps) = (2.0, 0.008);
        let lambda = case2_lambda();
        let sigma: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
        let op = diag_op(&sigma);
        let poly = good_vector_polynomial(2, &lambda, p, eps, 30).unwrap();
        let g = DVector::from_element(lambda.len(), 1.0);
        let mut o = CountingOracle::new(&op);
        let w = poly.apply_normalized(&mut o, 1.0, &g).unwrap();
        assert_eq!(o.count(), 60);
        let direct = DVector::from_iterator(lambda.len(), lambda.iter().map(|&l| poly.eval(l)));
        let direct = &direct / direct.norm();
        assert!((&w - &direct).norm() < 1e-10);
    }
}
