//! Schatten-p norms, rank-1 approximation errors and the Pythagorean-type
//! identities, all evaluated by dense SVD. `p = f64::INFINITY` selects the
//! operator norm.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::krylov::LraReport;
use crate::operators::{HardInstance, LinearOperator, SymmetricOperator};

/// Nonincreasing, nonnegative singular values.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidSpectrum("singular values must be finite and nonnegative".into()));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidSpectrum("singular values must be nonincreasing".into()));
        }
        Ok(Self { values })
    }

    pub fn of(m: &DMatrix<f64>) -> Self {
        let mut values: Vec<f64> =
            if m.is_empty() { Vec::new() } else { m.singular_values().iter().copied().collect() };
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self, p: f64) -> f64 {
        schatten_of_values(&self.values, p)
    }

    /// Norm of everything but `σ₁`.
    pub fn tail_norm(&self, p: f64) -> f64 {
        schatten_of_values(self.values.get(1..).unwrap_or(&[]), p)
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("Schatten index p = {p} must be >= 1")))
    }
}

pub fn schatten_of_values(values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().copied().fold(0.0, f64::max);
    }
    let top = values.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    // Scale by the largest value so that large p does not overflow.
    top * values.iter().map(|v| (v / top).powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn schatten_norm(a: &DMatrix<f64>, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(SingularSpectrum::of(a).norm(p))
}

pub fn optimal_rank1_error(a: &DMatrix<f64>, p: f64) -> Result<f64> {
    check_p(p)?;
    if a.nrows().min(a.ncols()) < 2 {
        return Err(Error::InvalidOperator("optimal rank-1 error needs min(n, d) >= 2".into()));
    }
    Ok(SingularSpectrum::of(a).tail_norm(p))
}

fn check_unit(v: &DVector<f64>) -> Result<()> {
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NotUnit { norm });
    }
    Ok(())
}

/// `A(I − vvᵀ)` formed explicitly.
pub fn residual_matrix(a: &DMatrix<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    a - (a * v) * v.transpose()
}

pub fn lra_error(a: &DMatrix<f64>, v: &DVector<f64>, p: f64) -> Result<f64> {
    check_p(p)?;
    if v.len() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), got: v.len() });
    }
    check_unit(v)?;
    Ok(SingularSpectrum::of(&residual_matrix(a, v)).norm(p))
}

/// `(‖Awwᵀ‖_F² + ‖A(I − wwᵀ)‖_F², ‖A‖_F², |lhs − rhs|)`.
pub fn pythagorean_check(a: &DMatrix<f64>, w: &DVector<f64>) -> Result<(f64, f64, f64)> {
    if w.len() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), got: w.len() });
    }
    let aw = a * w;
    let along = (&aw * w.transpose()).norm_squared();
    let across = residual_matrix(a, w).norm_squared();
    let lhs = along + across;
    let rhs = a.norm_squared();
    Ok((lhs, rhs, (lhs - rhs).abs()))
}

/// Checks `‖A‖_p^p ≥ ‖wwᵀA‖_p^p + ‖A(I − vvᵀ)‖_p^p` with `v = Aᵀw/‖Aᵀw‖`.
/// Returns `(holds, slack)` where `slack = lhs − rhs` and `holds` allows a
/// rounding deficit of `1e-9·lhs`.
pub fn schatten_pythagorean_check(a: &DMatrix<f64>, w: &DVector<f64>, p: f64) -> Result<(bool, f64)> {
    check_p(p)?;
    if p.is_infinite() {
        return Err(Error::config("the Schatten Pythagorean inequality is stated for finite p"));
    }
    if w.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: w.len() });
    }
    let atw = a.tr_mul(w);
    let norm = atw.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateW);
    }
    let v = atw / norm;
    let lhs = SingularSpectrum::of(a).norm(p).powf(p);
    let top = SingularSpectrum::of(&(w * (w.transpose() * a))).norm(p).powf(p);
    let rest = SingularSpectrum::of(&residual_matrix(a, &v)).norm(p).powf(p);
    let slack = lhs - (top + rest);
    Ok((slack >= -1e-9 * lhs, slack))
}

/// From a left vector `w` that captures enough of the top singular value,
/// returns the right vector `v = Aᵀw/‖Aᵀw‖` and its error report.
pub fn correlated_vector_to_lra(a: &DMatrix<f64>, w: &DVector<f64>, p: f64, eps: f64) -> Result<LraReport> {
    check_p(p)?;
    if w.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: w.len() });
    }
    check_unit(w)?;
    let spectrum = SingularSpectrum::of(a);
    let s1 = spectrum.values().first().copied().unwrap_or(0.0);
    let atw = a.tr_mul(w);
    let captured = atw.norm();
    let needed = if p.is_infinite() {
        s1
    } else {
        ((1.0 + eps) * s1.powf(p) - eps * spectrum.norm(p).powf(p)).max(0.0).powf(1.0 / p)
    };
    if captured < needed * (1.0 - 1e-12) || captured == 0.0 {
        return Err(Error::HypothesisViolated(format!("‖Aᵀw‖ = {captured} is below the required {needed}")));
    }
    let v = atw / captured;
    let report = lra_report(a, &v, p, 0, None)?;
    let bound = if p.is_infinite() {
        (1.0 + eps) * report.optimal_error
    } else {
        ((1.0 + eps) * report.optimal_error.powf(p)).powf(1.0 / p)
    };
    if report.achieved_error > bound * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::HypothesisViolated(format!(
            "error {} exceeds the guaranteed {bound}",
            report.achieved_error
        )));
    }
    Ok(report)
}

fn ratio(achieved: f64, optimal: f64) -> f64 {
    if optimal == 0.0 {
        if achieved == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        achieved / optimal
    }
}

/// Dense evaluation of a candidate `v` for `A`.
pub fn lra_report(
    a: &DMatrix<f64>,
    v: &DVector<f64>,
    p: f64,
    queries: usize,
    planted: Option<&DVector<f64>>,
) -> Result<LraReport> {
    let achieved_error = lra_error(a, v, p)?;
    let optimal_error = optimal_rank1_error(a, p)?;
    Ok(LraReport {
        v: v.clone(),
        achieved_error,
        optimal_error,
        relative_error: ratio(achieved_error, optimal_error),
        correlation_sq: planted.map(|u| u.dot(v).powi(2)),
        queries,
        p,
    })
}

/// `‖D(I − ccᵀ)‖_op` for diagonal `D` and unit `c`, without forming a matrix.
///
/// The square of the answer is the top eigenvalue of `D²` compressed to `c⊥`.
/// Grouping equal `D²` values `δₜ` with weights `wₜ = Σ cᵢ²`, the compressed
/// spectrum consists of `δₜ` (when the group has another direction orthogonal
/// to `c`) and the roots of `Σ wₜ/(δₜ − μ) = 0`; the largest root lies
/// between the two largest positively weighted `δₜ`.
pub fn op_error_in_eigenbasis(diag: &DVector<f64>, coords: &DVector<f64>) -> f64 {
    let mut pairs: Vec<(f64, f64)> = diag.iter().zip(coords.iter()).map(|(d, c)| (d * d, c * c)).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    // (δ, weight, multiplicity), δ decreasing.
    let mut groups: Vec<(f64, f64, usize)> = Vec::new();
    for (delta, w) in pairs {
        match groups.last_mut() {
            Some(g) if (g.0 - delta).abs() <= 1e-12 * g.0.max(1e-300) => {
                g.1 += w;
                g.2 += 1;
            }
            _ => groups.push((delta, w, 1)),
        }
    }
    let total: f64 = groups.iter().map(|g| g.1).sum();
    let mut best: f64 = 0.0;
    for &(delta, w, m) in &groups {
        if m >= 2 || w <= 1e-300 * total {
            best = best.max(delta);
        }
    }
    let weighted: Vec<(f64, f64)> = groups.iter().filter(|g| g.1 > 1e-300 * total).map(|g| (g.0, g.1)).collect();
    if weighted.len() >= 2 {
        let (hi, lo) = (weighted[0].0, weighted[1].0);
        let f = |mu: f64| weighted.iter().map(|(d, w)| w / (d - mu)).sum::<f64>();
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if f(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        best = best.max(0.5 * (a + b));
    }
    best.sqrt()
}

/// All singular values of `D(I − ccᵀ)` restricted to `c⊥` (length `len − 1`),
/// nonincreasing, for diagonal `D` and unit `c`. Same secular structure as
/// [`op_error_in_eigenbasis`], with one root between each pair of adjacent
/// positively weighted groups.
pub fn residual_singular_values(diag: &DVector<f64>, coords: &DVector<f64>) -> Vec<f64> {
    let mut pairs: Vec<(f64, f64)> = diag.iter().zip(coords.iter()).map(|(d, c)| (d * d, c * c)).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut groups: Vec<(f64, f64, usize)> = Vec::new();
    for (delta, w) in pairs {
        match groups.last_mut() {
            Some(g) if (g.0 - delta).abs() <= 1e-12 * g.0.max(1e-300) => {
                g.1 += w;
                g.2 += 1;
            }
            _ => groups.push((delta, w, 1)),
        }
    }
    let total: f64 = groups.iter().map(|g| g.1).sum();
    let cut = 1e-300 * total;
    let mut out = Vec::with_capacity(diag.len().saturating_sub(1));
    for &(delta, w, m) in &groups {
        let kept = if w <= cut { m } else { m - 1 };
        out.extend(std::iter::repeat_n(delta, kept));
    }
    let weighted: Vec<(f64, f64)> = groups.iter().filter(|g| g.1 > cut).map(|g| (g.0, g.1)).collect();
    let f = |mu: f64| weighted.iter().map(|(d, w)| w / (d - mu)).sum::<f64>();
    for pair in weighted.windows(2) {
        let (mut a, mut b) = (pair[1].0, pair[0].0);
        loop {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if f(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        out.push(0.5 * (a + b));
    }
    let mut out: Vec<f64> = out.into_iter().map(|x| x.max(0.0).sqrt()).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Operator-norm report for a candidate `v` on a factored hard instance, using
/// the eigenbasis instead of a dense SVD. The optimum is the second largest
/// `|λ|` counted with multiplicity.
pub fn hard_instance_report(inst: &HardInstance, v: &DVector<f64>, queries: usize) -> Result<LraReport> {
    if v.len() != inst.operator().ncols() {
        return Err(Error::DimensionMismatch { expected: inst.operator().ncols(), got: v.len() });
    }
    check_unit(v)?;
    let (basis, diag) = match inst.operator() {
        SymmetricOperator::Factored { basis, diag } => (basis, diag),
        SymmetricOperator::Dense(_) => unreachable!("hard instances are factored"),
    };
    let coords = basis.tr_mul(v);
    let achieved_error = op_error_in_eigenbasis(diag, &coords);
    let mut mags: Vec<f64> = diag.iter().map(|d| d.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let optimal_error = mags[1];
    Ok(LraReport {
        v: v.clone(),
        achieved_error,
        optimal_error,
        relative_error: ratio(achieved_error, optimal_error),
        correlation_sq: Some(inst.planted_top_eigenvector().dot(v).powi(2)),
        queries,
        p: f64::INFINITY,
    })
}

/// Whether `w` is far from the planted direction in both `w` and `Aw`. When it
/// is, the operator-norm error of `w` must exceed `(1 + eps)` times the optimum;
/// a violation is reported as an error.
pub fn spectral_gap_witness(a: &SymmetricOperator, u1: &DVector<f64>, eps: f64, w: &DVector<f64>) -> Result<bool> {
    let dense = a.to_dense();
    let mut eig: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    let top = 1.0 + 2.0 * eps;
    if (eig[0] - top).abs() > 1e-9 * top || eig[1..].iter().any(|l| l.abs() > 1.0 + 1e-9) {
        return Err(Error::SpectrumMismatch(format!(
            "need λ₁ = {top} and |λᵢ| ≤ 1 otherwise; got λ₁ = {}, λ₂ = {}",
            eig[0], eig[1]
        )));
    }
    check_unit(w)?;
    let aw = a.apply(w);
    let witness = u1.dot(w).powi(2) <= eps / 2.0 && u1.dot(&aw).powi(2) <= eps / 2.0;
    if witness {
        let err = SingularSpectrum::of(&residual_matrix(&dense, w)).norm(f64::INFINITY);
        let optimal = eig[1..].iter().map(|l| l.abs()).fold(0.0, f64::max);
        if err <= (1.0 + eps) * optimal {
            return Err(Error::HypothesisViolated(format!("witness holds but error {err} ≤ (1 + eps)·{optimal}")));
        }
    }
    Ok(witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_hard_instance, hard_spectrum};
    use crate::rng::{gaussian_matrix, gaussian_vector, sphere_vector, stream, Purpose};

    fn d321() -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]))
    }

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn norm_examples() {
        let a = d321();
        assert!((schatten_norm(&a, 1.0).unwrap() - 6.0).abs() < 1e-12);
        assert!((schatten_norm(&a, 2.0).unwrap() - 14f64.sqrt()).abs() < 1e-12);
        assert!((schatten_norm(&a, f64::INFINITY).unwrap() - 3.0).abs() < 1e-12);
        assert!((optimal_rank1_error(&a, 2.0).unwrap() - 5f64.sqrt()).abs() < 1e-12);
        assert!((optimal_rank1_error(&a, f64::INFINITY).unwrap() - 2.0).abs() < 1e-12);
        let u = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let w = DVector::from_vec(vec![0.5, -1.0]);
        let r1 = &u * w.transpose();
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert!(optimal_rank1_error(&r1, p).unwrap() < 1e-12);
        }
        assert!(schatten_norm(&a, 0.5).is_err());
    }

    #[test]
    fn lra_error_examples() {
        let a = d321();
        assert!((lra_error(&a, &e(3, 0), 2.0).unwrap() - 5f64.sqrt()).abs() < 1e-12);
        assert!((lra_error(&a, &e(3, 1), 2.0).unwrap() - 10f64.sqrt()).abs() < 1e-12);
        let v = (e(3, 0) + e(3, 1)) / 2f64.sqrt();
        let err = lra_error(&a, &v, f64::INFINITY).unwrap();
        assert!((2.0..=3.0).contains(&err));
        // Residual is diag(3,2,1)·(I − vvᵀ); its top singular value solves a 2×2 problem.
        let r = DMatrix::<f64>::from_row_slice(2, 2, &[1.5, -1.5, -1.0, 1.0]);
        let brute = r.singular_values().max().max(1.0);
        assert!((err - brute).abs() < 1e-12);
        assert!(matches!(lra_error(&a, &(e(3, 0) * 1.1), 2.0), Err(Error::NotUnit { .. })));
    }

    #[test]
    fn pythagorean_examples() {
        let (lhs, rhs, res) = pythagorean_check(&d321(), &e(3, 0)).unwrap();
        assert!((lhs - 14.0).abs() < 1e-12 && (rhs - 14.0).abs() < 1e-12 && res < 1e-12);
        let (lhs, rhs, _) = pythagorean_check(&DMatrix::zeros(3, 3), &e(3, 2)).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));
        let mut rng = stream(1, 0, Purpose::Probe);
        let a = gaussian_matrix(&mut rng, 6, 4);
        let w = sphere_vector(&mut rng, 4);
        let (_, rhs, res) = pythagorean_check(&a, &w).unwrap();
        assert!(res <= 1e-9 * rhs);
    }

    #[test]
    fn schatten_pythagorean_examples() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0]));
        let (holds, slack) = schatten_pythagorean_check(&a, &e(2, 0), 2.0).unwrap();
        assert!(holds && slack.abs() < 1e-12);
        let (holds, slack) = schatten_pythagorean_check(&a, &e(2, 0), 1.0).unwrap();
        assert!(holds && slack.abs() < 1e-12);
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(schatten_pythagorean_check(&z, &e(2, 1), 2.0), Err(Error::DegenerateW)));
    }

    #[test]
    fn correlated_vector_examples() {
        let a = d321();
        let r = correlated_vector_to_lra(&a, &e(3, 0), 2.0, 0.01).unwrap();
        assert!((r.v[0].abs() - 1.0).abs() < 1e-12);
        assert!((r.relative_error - 1.0).abs() < 1e-12);
        assert!(matches!(correlated_vector_to_lra(&a, &e(3, 2), 2.0, 0.01), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn unitary_invariance_and_p_monotonicity() {
        let mut rng = stream(2, 0, Purpose::Probe);
        for _ in 0..20 {
            let a = gaussian_matrix(&mut rng, 7, 5);
            let u = crate::operators::haar_orthogonal(7, &mut rng);
            let ua = &u * &a;
            for p in [1.0, 2.0, 3.0, f64::INFINITY] {
                let x = schatten_norm(&a, p).unwrap();
                let y = schatten_norm(&ua, p).unwrap();
                assert!((x - y).abs() <= 1e-9 * x);
            }
            let s_inf = schatten_norm(&a, f64::INFINITY).unwrap();
            let s_one = schatten_norm(&a, 1.0).unwrap();
            for p in [1.0, 1.5, 2.0, 4.0] {
                let s = schatten_norm(&a, p).unwrap();
                assert!(s_inf <= s * (1.0 + 1e-12) && s <= s_one * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn eckart_young_consistency() {
        let mut rng = stream(3, 0, Purpose::Probe);
        for _ in 0..10 {
            let a = gaussian_matrix(&mut rng, 8, 8);
            let svd = a.clone().svd(false, true);
            let idx = svd.singular_values.imax();
            let v = svd.v_t.unwrap().row(idx).transpose();
            for p in [1.0, 2.0, 3.0, f64::INFINITY] {
                let got = lra_error(&a, &v, p).unwrap();
                let opt = optimal_rank1_error(&a, p).unwrap();
                assert!((got - opt).abs() <= 1e-8 * opt, "p={p}: {got} vs {opt}");
            }
        }
    }

    #[test]
    fn eigenbasis_error_matches_dense_svd() {
        let spec = hard_spectrum(41, 0.1, 4).unwrap();
        let inst = build_hard_instance(&spec, &mut stream(4, 0, Purpose::Instance));
        let dense = inst.operator().to_dense();
        let mut rng = stream(4, 0, Purpose::Probe);
        let u1 = inst.planted_top_eigenvector().clone();
        let mut probes: Vec<DVector<f64>> = (0..20).map(|_| sphere_vector(&mut rng, 41)).collect();
        probes.push(u1.clone());
        let mixed = &u1 * 0.9 + sphere_vector(&mut rng, 41) * 0.3;
        probes.push(&mixed / mixed.norm());
        for v in probes {
            let r = hard_instance_report(&inst, &v, 0).unwrap();
            let brute = lra_error(&dense, &v, f64::INFINITY).unwrap();
            assert!((r.achieved_error - brute).abs() <= 1e-9 * brute, "{} vs {brute}", r.achieved_error);
            assert!((r.optimal_error - 1.0).abs() < 1e-12);
        }
        // Distinct values without repeats exercise the secular root.
        let diag = DVector::from_vec(vec![3.0, 2.0, -1.5, 0.5]);
        let c = gaussian_vector(&mut rng, 4);
        let c = &c / c.norm();
        let dense = DMatrix::from_diagonal(&diag);
        let brute = lra_error(&dense, &c, f64::INFINITY).unwrap();
        assert!((op_error_in_eigenbasis(&diag, &c) - brute).abs() <= 1e-10 * brute);
    }

    #[test]
    fn residual_singular_values_match_dense() {
        let mut rng = stream(8, 0, Purpose::Probe);
        let cases = [
            vec![3.0, 2.0, -1.5, 0.5, 0.5, 0.0],
            vec![1.0, 0.97, 0.97, 0.97, 0.01, 0.01, 0.01, 0.01],
            (1..=25).map(|i| 1.0 / (i as f64).sqrt()).collect(),
        ];
        for d in cases {
            let diag = DVector::from_vec(d);
            let len = diag.len();
            for _ in 0..5 {
                let c = sphere_vector(&mut rng, len);
                let got = residual_singular_values(&diag, &c);
                assert_eq!(got.len(), len - 1);
                let dense = DMatrix::from_diagonal(&diag);
                let mut want: Vec<f64> = residual_matrix(&dense, &c).singular_values().iter().copied().collect();
                want.sort_by(|a, b| b.total_cmp(a));
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() <= 1e-10 * want[0], "{g} vs {w}");
                }
                assert!(want[len - 1] <= 1e-10 * want[0]);
            }
        }
        // c along an axis leaves the remaining values untouched.
        let diag = DVector::from_vec(vec![2.0, 1.0, 0.5]);
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert_eq!(residual_singular_values(&diag, &e1), vec![1.0, 0.5]);
    }

    #[test]
    fn gap_witness_examples() {
        let eps = 0.1;
        let spec = hard_spectrum(41, eps, 4).unwrap();
        let inst = build_hard_instance(&spec, &mut stream(5, 0, Purpose::Instance));
        let u1 = inst.planted_top_eigenvector();
        let mut rng = stream(5, 0, Purpose::Probe);
        let g = gaussian_vector(&mut rng, 41);
        let w = &g - u1 * u1.dot(&g);
        let w = &w / w.norm();
        assert!(spectral_gap_witness(inst.operator(), u1, eps, &w).unwrap());
        assert!(!spectral_gap_witness(inst.operator(), u1, eps, u1).unwrap());
        let wrong = SymmetricOperator::dense(DMatrix::identity(3, 3)).unwrap();
        assert!(matches!(spectral_gap_witness(&wrong, &e(3, 0), eps, &e(3, 1)), Err(Error::SpectrumMismatch(_))));
    }
}
