//! Krylov solvers: single-vector iteration, block Krylov, rectangular Krylov,
//! and the good-vector polynomials.

mod block;
mod good_vector;
mod rect;
mod single;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{top_eigenpair, OrthoBasis};

pub use block::{block_krylov, block_krylov_rayleigh_ritz, BlockRitz};
pub use good_vector::{
    classify_case, good_vector_exists, good_vector_polynomial, CaseStats, GoodPolynomial, GoodVectorReport,
};
pub use rect::{rectangular_krylov, RectKrylov, RectSolution};
pub use single::{krylov_iteration, KrylovIteration};

/// Krylov vectors as generated (each scaled to unit norm) and an orthonormal
/// basis of their span.
#[derive(Clone, Debug)]
pub struct KrylovSubspace {
    raw: Vec<DVector<f64>>,
    basis: OrthoBasis,
    block_size: usize,
    iterations: usize,
    queries_used: usize,
}

impl KrylovSubspace {
    pub(crate) fn new(
        raw: Vec<DVector<f64>>,
        basis: OrthoBasis,
        block_size: usize,
        iterations: usize,
        queries_used: usize,
    ) -> Self {
        Self { raw, basis, block_size, iterations, queries_used }
    }

    /// Raw columns, `n × m`.
    pub fn raw_columns(&self) -> DMatrix<f64> {
        if self.raw.is_empty() {
            return DMatrix::zeros(self.basis.ambient(), 0);
        }
        DMatrix::from_columns(&self.raw)
    }

    pub fn raw_len(&self) -> usize {
        self.raw.len()
    }

    pub fn basis(&self) -> &OrthoBasis {
        &self.basis
    }

    pub fn q(&self) -> DMatrix<f64> {
        self.basis.to_matrix()
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.basis.ambient()
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn queries_used(&self) -> usize {
        self.queries_used
    }
}

/// `‖Qᵀu‖₂`, the largest `|⟨v, u⟩|` over unit `v` in the span.
pub fn best_correlation(subspace: &KrylovSubspace, u: &DVector<f64>) -> Result<f64> {
    if u.len() != subspace.ambient() {
        return Err(Error::DimensionMismatch { expected: subspace.ambient(), got: u.len() });
    }
    Ok(subspace.basis().projection_norm(u))
}

/// Result of one rank-1 approximation, scored against the exact optimum.
#[derive(Clone, Debug)]
pub struct LraReport {
    pub v: DVector<f64>,
    pub achieved_error: f64,
    pub optimal_error: f64,
    /// `achieved / optimal`; 1 when both vanish.
    pub relative_error: f64,
    /// `⟨v, u₁⟩²` when a planted top eigenvector is known.
    pub correlation_sq: Option<f64>,
    pub queries: usize,
    /// Schatten index; `f64::INFINITY` for the operator norm.
    pub p: f64,
}

/// Rayleigh–Ritz for `‖A·x‖²` over unit `x = Q·y`, given the images `A·qⱼ`.
/// Returns the top Ritz value and `Q·y₁`, normalized.
pub(crate) fn ritz_from_images(basis: &OrthoBasis, images: &[DVector<f64>]) -> (f64, DVector<f64>) {
    debug_assert_eq!(basis.len(), images.len());
    let aq = DMatrix::from_columns(images);
    let m = aq.tr_mul(&aq);
    let (value, y) = top_eigenpair(&m);
    let mut v = DVector::zeros(basis.ambient());
    for (q, c) in basis.columns().iter().zip(y.iter()) {
        v.axpy(*c, q, 1.0);
    }
    let norm = v.norm();
    (value, v / norm)
}

/// Gaussian start vectors are redrawn never; a zero draw is reported instead.
pub(crate) fn unit_or_collapse(g: &DVector<f64>) -> Result<DVector<f64>> {
    let n = g.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::RankCollapse);
    }
    Ok(g / n)
}
