//! Dense helpers shared by the solvers and the evaluation side.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative rank tolerance used when growing Krylov bases.
pub const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis grown one vector at a time with classical Gram–Schmidt
/// applied twice per vector (CGS2), which keeps `QᵀQ = I` to working precision.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    dim: usize,
    cols: Vec<DVector<f64>>,
}

impl OrthoBasis {
    pub fn new(dim: usize) -> Self {
        Self { dim, cols: Vec::new() }
    }

    /// Ambient dimension.
    pub fn ambient(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn columns(&self) -> &[DVector<f64>] {
        &self.cols
    }

    /// Component of `v` orthogonal to the current span.
    pub fn residual(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut r = v.clone();
        for _ in 0..2 {
            let coeffs: Vec<f64> = self.cols.iter().map(|q| q.dot(&r)).collect();
            for (q, c) in self.cols.iter().zip(coeffs) {
                r.axpy(-c, q, 1.0);
            }
        }
        r
    }

    /// Appends the normalized residual of `v` when its norm exceeds
    /// `tol * ‖v‖`. Returns the accepted basis vector.
    pub fn push(&mut self, v: &DVector<f64>, tol: f64) -> Option<DVector<f64>> {
        let scale = v.norm();
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        let r = self.residual(v);
        let rn = r.norm();
        if rn <= tol * scale {
            return None;
        }
        let q = r / rn;
        self.cols.push(q.clone());
        Some(q)
    }

    /// Pushes without any tolerance check. The caller guarantees `q` is unit
    /// and orthogonal to the span.
    pub(crate) fn push_orthonormal(&mut self, q: DVector<f64>) {
        self.cols.push(q);
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        if self.cols.is_empty() {
            return DMatrix::zeros(self.dim, 0);
        }
        DMatrix::from_columns(&self.cols)
    }

    /// `‖Qᵀu‖₂`.
    pub fn projection_norm(&self, u: &DVector<f64>) -> f64 {
        self.cols.iter().map(|q| q.dot(u).powi(2)).sum::<f64>().sqrt()
    }
}

/// Orthonormal basis of the span of `columns`. Columns whose residual falls
/// below `RANK_TOL · max column norm` are dropped; returns the basis and the
/// indices of the kept columns.
pub fn orthonormalize(dim: usize, columns: &[DVector<f64>]) -> (OrthoBasis, Vec<usize>) {
    let max_norm = columns.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut basis = OrthoBasis::new(dim);
    let mut kept = Vec::new();
    if max_norm == 0.0 {
        return (basis, kept);
    }
    for (idx, c) in columns.iter().enumerate() {
        let r = basis.residual(c);
        let rn = r.norm();
        if rn > RANK_TOL * max_norm {
            basis.push_orthonormal(r / rn);
            kept.push(idx);
        }
    }
    (basis, kept)
}

/// Largest eigenvalue of a symmetric matrix and a unit eigenvector for it.
pub fn top_eigenpair(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let (idx, &val) = eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty matrix");
    let v = eig.eigenvectors.column(idx).into_owned();
    (val, v)
}

/// `max |UᵀU − I|`.
pub fn orthogonality_defect(u: &DMatrix<f64>) -> f64 {
    let g = u.tr_mul(u);
    let mut worst: f64 = 0.0;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cgs2_keeps_orthogonality_on_nearly_dependent_columns() {
        let n = 40;
        let base = DVector::from_fn(n, |i, _| (i as f64 + 1.0).sqrt());
        let cols: Vec<DVector<f64>> = (0..10)
            .map(|k| {
                let mut c = base.clone();
                c[k] += 1e-6;
                c
            })
            .collect();
        let (basis, kept) = orthonormalize(n, &cols);
        assert_eq!(kept.len(), 10);
        assert!(orthogonality_defect(&basis.to_matrix()) < 1e-12);
    }

    #[test]
    fn dependent_columns_are_dropped() {
        let a = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let b = DVector::from_vec(vec![0.0, 2.0, 0.0]);
        let c = &a * 3.0 - &b;
        let (basis, kept) = orthonormalize(3, &[a, b, c]);
        assert_eq!(kept, vec![0, 1]);
        assert_eq!(basis.len(), 2);
    }

    #[test]
    fn top_eigenpair_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0, -5.0]));
        let (val, vec) = top_eigenpair(&m);
        assert!((val - 4.0).abs() < 1e-14);
        assert!((vec[1].abs() - 1.0).abs() < 1e-14);
    }
}
