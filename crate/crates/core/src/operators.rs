//! Operators, the query-counting oracle, Haar rotations and the
//! Chebyshev-spectrum hard instance.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, orthogonality_defect};
use crate::rng::gaussian_matrix;

/// Distinct eigenvalues with multiplicities, stored in nonincreasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSpec {
    entries: Vec<(f64, usize)>,
}

impl SpectrumSpec {
    pub fn new(entries: Vec<(f64, usize)>) -> Result<Self> {
        if entries.iter().any(|&(_, m)| m == 0) {
            return Err(Error::InvalidSpectrum("multiplicities must be at least 1".into()));
        }
        if entries.iter().any(|&(v, _)| !v.is_finite()) {
            return Err(Error::InvalidSpectrum("eigenvalues must be finite".into()));
        }
        if entries.windows(2).any(|w| w[0].0 < w[1].0) {
            return Err(Error::InvalidSpectrum("entries must be in nonincreasing order of value".into()));
        }
        let n: usize = entries.iter().map(|&(_, m)| m).sum();
        if n < 2 {
            return Err(Error::InvalidSpectrum(format!("dimension {n} < 2")));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, usize)] {
        &self.entries
    }

    pub fn dimension(&self) -> usize {
        self.entries.iter().map(|&(_, m)| m).sum()
    }

    pub fn distinct_values(&self) -> Vec<f64> {
        self.entries.iter().map(|&(v, _)| v).collect()
    }

    /// The length-n diagonal, each value repeated by its multiplicity.
    pub fn expand(&self) -> DVector<f64> {
        let values: Vec<f64> = self.entries.iter().flat_map(|&(v, m)| std::iter::repeat_n(v, m)).collect();
        DVector::from_vec(values)
    }

    /// One `value,multiplicity` line per distinct eigenvalue.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &(v, m) in &self.entries {
            writeln!(out, "{v:.16e},{m}").expect("writing to a String cannot fail");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (value, mult) = line
                .split_once(',')
                .ok_or_else(|| Error::InvalidSpectrum(format!("line {}: expected `value,multiplicity`", lineno + 1)))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSpectrum(format!("line {}: bad value '{value}'", lineno + 1)))?;
            let mult: usize = mult
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSpectrum(format!("line {}: bad multiplicity '{mult}'", lineno + 1)))?;
            entries.push((value, mult));
        }
        Self::new(entries)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| Error::Io { path: path.to_path_buf(), source })
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }
}

/// Smallest `n' ≥ n` with `(n' − 1) mod (q + 1) = 0` and room for all `q + 2`
/// distinct eigenvalues.
pub fn nearest_valid_n(n: usize, q: usize) -> usize {
    let block = q + 1;
    let mut m = n.max(q + 2);
    let rem = (m - 1) % block;
    if rem != 0 {
        m += block - rem;
    }
    m
}

/// Top eigenvalue `1 + 2·eps` once, then the `q + 1` extrema `cos(iπ/q)` of
/// `T_q`, each repeated `k = (n − 1)/(q + 1)` times.
pub fn hard_spectrum(n: usize, eps: f64, q: usize) -> Result<SpectrumSpec> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidSpectrum(format!("eps = {eps} outside (0, 0.5)")));
    }
    if q == 0 {
        return Err(Error::InvalidSpectrum("q must be positive".into()));
    }
    if n < q + 2 {
        return Err(Error::InvalidSpectrum(format!("n = {n} cannot hold {} distinct eigenvalues", q + 2)));
    }
    if !(n - 1).is_multiple_of(q + 1) {
        return Err(Error::Divisibility { n, q, nearest: nearest_valid_n(n, q) });
    }
    let k = (n - 1) / (q + 1);
    let mut entries = Vec::with_capacity(q + 2);
    entries.push((1.0 + 2.0 * eps, 1));
    for i in 0..=q {
        entries.push(((i as f64 * std::f64::consts::PI / q as f64).cos(), k));
    }
    SpectrumSpec::new(entries)
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// columns of Q flipped so that diag(R) is positive.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(n >= 1, "haar_orthogonal needs n >= 1");
    let g = gaussian_matrix(rng, n, n);
    let (mut q, r) = g.qr().unpack();
    // A zero pivot is a probability-0 event.
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Access to a linear map through products with vectors.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;
    fn apply_transpose(&self, x: &DVector<f64>) -> DVector<f64>;
    fn is_symmetric(&self) -> bool {
        false
    }
}

/// A symmetric n×n operator, stored dense or as `U·diag(d)·Uᵀ`.
#[derive(Clone, Debug)]
pub enum SymmetricOperator {
    Dense(DMatrix<f64>),
    Factored { basis: DMatrix<f64>, diag: DVector<f64> },
}

impl SymmetricOperator {
    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidOperator(format!(
                "expected a square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidOperator("non-finite entry".into()));
        }
        let asym = max_abs(&(&matrix - matrix.transpose()));
        if asym > 1e-12 * max_abs(&matrix) {
            return Err(Error::InvalidOperator(format!("matrix is not symmetric (defect {asym:e})")));
        }
        Ok(Self::Dense(matrix))
    }

    pub fn factored(basis: DMatrix<f64>, spectrum: &SpectrumSpec) -> Result<Self> {
        let diag = spectrum.expand();
        if basis.nrows() != diag.len() || basis.ncols() != diag.len() {
            return Err(Error::DimensionMismatch { expected: diag.len(), got: basis.ncols() });
        }
        let defect = orthogonality_defect(&basis);
        if defect > 1e-10 {
            return Err(Error::InvalidOperator(format!("basis is not orthonormal (defect {defect:e})")));
        }
        Ok(Self::Factored { basis, diag })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense(m) => m.nrows(),
            Self::Factored { diag, .. } => diag.len(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Dense(m) => m.clone(),
            Self::Factored { basis, diag } => {
                let mut scaled = basis.clone();
                for (j, d) in diag.iter().enumerate() {
                    scaled.column_mut(j).scale_mut(*d);
                }
                let mut dense = scaled * basis.transpose();
                dense = (&dense + dense.transpose()) * 0.5;
                dense
            }
        }
    }
}

impl LinearOperator for SymmetricOperator {
    fn nrows(&self) -> usize {
        self.dim()
    }

    fn ncols(&self) -> usize {
        self.dim()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Dense(m) => m * x,
            Self::Factored { basis, diag } => {
                let coords = basis.tr_mul(x).component_mul(diag);
                basis * coords
            }
        }
    }

    fn apply_transpose(&self, x: &DVector<f64>) -> DVector<f64> {
        self.apply(x)
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// A general n×d matrix.
#[derive(Clone, Debug)]
pub struct RectOperator {
    matrix: DMatrix<f64>,
}

impl RectOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::InvalidOperator("empty matrix".into()));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidOperator("non-finite entry".into()));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl LinearOperator for RectOperator {
    fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    fn apply_transpose(&self, x: &DVector<f64>) -> DVector<f64> {
        self.matrix.tr_mul(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transpose {
    No,
    Yes,
}

/// Wraps an operator, counts every product with `A` or `Aᵀ`, and enforces an
/// optional budget.
pub struct CountingOracle<'a> {
    inner: &'a dyn LinearOperator,
    count: usize,
    budget: Option<usize>,
}

impl<'a> CountingOracle<'a> {
    pub fn new(inner: &'a dyn LinearOperator) -> Self {
        Self { inner, count: 0, budget: None }
    }

    pub fn with_budget(inner: &'a dyn LinearOperator, budget: usize) -> Self {
        Self { inner, count: 0, budget: Some(budget) }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn budget(&self) -> Option<usize> {
        self.budget
    }

    pub fn remaining(&self) -> Option<usize> {
        self.budget.map(|b| b - self.count)
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_symmetric(&self) -> bool {
        self.inner.is_symmetric()
    }

    pub fn matvec(&mut self, x: &DVector<f64>, transpose: Transpose) -> Result<DVector<f64>> {
        let expected = match transpose {
            Transpose::No => self.inner.ncols(),
            Transpose::Yes => self.inner.nrows(),
        };
        if x.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: x.len() });
        }
        if let Some(budget) = self.budget {
            if self.count >= budget {
                return Err(Error::BudgetExceeded { budget });
            }
        }
        self.count += 1;
        Ok(match transpose {
            Transpose::No => self.inner.apply(x),
            Transpose::Yes => self.inner.apply_transpose(x),
        })
    }

    /// `A·x`.
    pub fn apply(&mut self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.matvec(x, Transpose::No)
    }

    /// `Aᵀ·x`.
    pub fn apply_t(&mut self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.matvec(x, Transpose::Yes)
    }
}

/// A hard instance `A = U·Λ·Uᵀ` together with its planted top eigenvector.
/// Solvers receive only the operator (through an oracle); the planted vector
/// is for evaluation.
#[derive(Clone, Debug)]
pub struct HardInstance {
    operator: SymmetricOperator,
    spectrum: SpectrumSpec,
    top: DVector<f64>,
}

impl HardInstance {
    pub fn operator(&self) -> &SymmetricOperator {
        &self.operator
    }

    pub fn spectrum(&self) -> &SpectrumSpec {
        &self.spectrum
    }

    pub fn planted_top_eigenvector(&self) -> &DVector<f64> {
        &self.top
    }

    /// Eigenvector matrix `U`.
    pub fn basis(&self) -> &DMatrix<f64> {
        match &self.operator {
            SymmetricOperator::Factored { basis, .. } => basis,
            SymmetricOperator::Dense(_) => unreachable!("hard instances are factored"),
        }
    }
}

pub fn build_hard_instance<R: Rng + ?Sized>(spec: &SpectrumSpec, rng: &mut R) -> HardInstance {
    let n = spec.dimension();
    let basis = haar_orthogonal(n, rng);
    let top = basis.column(0).into_owned();
    let operator = SymmetricOperator::Factored { basis, diag: spec.expand() };
    HardInstance { operator, spectrum: spec.clone(), top }
}
