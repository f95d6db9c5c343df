use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::orthonormalize;

const PRE_TOL: f64 = 1e-8;

/// Orthogonal `U` with `Uᵀx = x` on `span(fixed)` and `Uᵀy = z`.
///
/// `Uᵀ` is the rotation of the plane `span{y, z}` taking `y` to `z`, and the
/// identity on the orthogonal complement of that plane. It is a deterministic,
/// continuous function of `(y, z)` away from `z = −y`; in that case the plane
/// is completed with the standard basis vector farthest from `span(fixed, y)`.
pub fn make_uk_rotation(fixed: &[DVector<f64>], y: &DVector<f64>, z: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = y.len();
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: z.len() });
    }
    for v in [y, z] {
        let norm = v.norm();
        if (norm - 1.0).abs() > PRE_TOL {
            return Err(Error::NotUnit { norm });
        }
    }
    if let Some(bad) = fixed.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
    }
    let units: Vec<DVector<f64>> = fixed
        .iter()
        .filter_map(|v| {
            let nv = v.norm();
            (nv > 0.0).then(|| v / nv)
        })
        .collect();
    let (basis, _) = orthonormalize(n, &units);
    if basis.len() + 1 > n {
        return Err(Error::HypothesisViolated("fixed set leaves no room for y".into()));
    }
    for v in [y, z] {
        let residual = basis.projection_norm(v);
        if residual > PRE_TOL {
            return Err(Error::NotOrthogonal { residual });
        }
    }

    let c = y.dot(z).clamp(-1.0, 1.0);
    let w = z - y * c;
    let wn = w.norm();
    let u = if wn > 1e-12 {
        w / wn
    } else if c > 0.0 {
        return Ok(DMatrix::identity(n, n));
    } else {
        let mut with_y = basis.clone();
        with_y.push(y, 0.0).ok_or(Error::RankCollapse)?;
        let mut best: Option<(f64, DVector<f64>)> = None;
        for i in 0..n {
            let r = with_y.residual(&DVector::from_fn(n, |t, _| if t == i { 1.0 } else { 0.0 }));
            let rn = r.norm();
            if best.as_ref().is_none_or(|(b, _)| rn > *b) {
                best = Some((rn, r));
            }
        }
        match best {
            Some((rn, r)) if rn > 1e-6 => r / rn,
            _ => return Err(Error::HypothesisViolated("no plane available for a half turn".into())),
        }
    };
    let s = if wn > 1e-12 { wn } else { 0.0 };
    // R = I + (c − 1)(yyᵀ + uuᵀ) + s(uyᵀ − yuᵀ), so R·y = c·y + s·u = z.
    let mut r = DMatrix::identity(n, n);
    r.ger(c - 1.0, y, y, 1.0);
    r.ger(c - 1.0, &u, &u, 1.0);
    r.ger(s, &u, y, 1.0);
    r.ger(-s, y, &u, 1.0);
    Ok(r.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthogonality_defect;
    use crate::rng::{gaussian_vector, stream, Purpose};

    fn e(n: usize, i: usize) -> DVector<f64> {
        DVector::from_fn(n, |t, _| if t == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn swaps_axes_in_the_plane() {
        let u = make_uk_rotation(&[], &e(2, 0), &e(2, 1)).unwrap();
        assert!((u.tr_mul(&e(2, 0)) - e(2, 1)).norm() < 1e-15);
        assert!((u.determinant().abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_when_y_equals_z() {
        let u = make_uk_rotation(&[e(3, 2)], &e(3, 0), &e(3, 0)).unwrap();
        assert_eq!(u, DMatrix::identity(3, 3));
        assert!((u.tr_mul(&e(3, 2)) - e(3, 2)).norm() < 1e-15);
    }

    #[test]
    fn random_complement_case() {
        let mut rng = stream(11, 0, Purpose::Probe);
        let n = 10;
        let fixed: Vec<DVector<f64>> = (0..3).map(|_| gaussian_vector(&mut rng, n)).collect();
        let (basis, _) = orthonormalize(n, &fixed);
        let unit_perp = |rng: &mut _| {
            let g = basis.residual(&gaussian_vector(rng, n));
            &g / g.norm()
        };
        let y = unit_perp(&mut rng);
        let z = unit_perp(&mut rng);
        let u = make_uk_rotation(&fixed, &y, &z).unwrap();
        assert!(orthogonality_defect(&u) <= 1e-10);
        assert!((u.tr_mul(&y) - &z).norm() <= 1e-8);
        for x in &fixed {
            assert!((u.tr_mul(x) - x).norm() <= 1e-8 * x.norm());
        }
        // Deterministic in its arguments.
        assert_eq!(u, make_uk_rotation(&fixed, &y, &z).unwrap());
        // Half turn.
        let h = make_uk_rotation(&fixed, &y, &(-&y)).unwrap();
        assert!((h.tr_mul(&y) + &y).norm() <= 1e-12);
        assert!(orthogonality_defect(&h) <= 1e-12);
        for x in &fixed {
            assert!((h.tr_mul(x) - x).norm() <= 1e-12 * x.norm());
        }
    }

    #[test]
    fn rejects_non_orthogonal_arguments() {
        let y = DVector::from_vec(vec![1.0, 1.0, 0.0]) / 2f64.sqrt();
        let err = make_uk_rotation(&[e(3, 0)], &y, &e(3, 2)).unwrap_err();
        assert!(matches!(err, Error::NotOrthogonal { .. }));
        assert!(matches!(make_uk_rotation(&[], &(e(3, 0) * 2.0), &e(3, 1)), Err(Error::NotUnit { .. })));
    }
}
