use nalgebra::DVector;
use rand::Rng;

use super::{ritz_from_images, unit_or_collapse, KrylovSubspace};
use crate::error::{Error, Result};
use crate::linalg::{OrthoBasis, RANK_TOL};
use crate::operators::CountingOracle;
use crate::rng::gaussian_vector;

/// Single-vector Krylov iteration on a symmetric operator, grown one matvec at
/// a time so that a sweep over `q` can take checkpoints along one ladder.
///
/// Step `i` applies `A` to the newest basis vector (Arnoldi order), so the
/// basis after `q` steps spans `[Ag, …, A^q g]` and every accepted basis vector
/// except possibly the newest already has its image `A·qⱼ` stored.
#[derive(Clone, Debug)]
pub struct KrylovIteration {
    basis: OrthoBasis,
    images: Vec<DVector<f64>>,
    raw: Vec<DVector<f64>>,
    x: DVector<f64>,
    x_in_basis: bool,
    lookahead: Option<DVector<f64>>,
    steps: usize,
    queries: usize,
}

impl KrylovIteration {
    pub fn new<R: Rng + ?Sized>(oracle: &CountingOracle<'_>, rng: &mut R) -> Result<Self> {
        let g = gaussian_vector(rng, oracle.ncols());
        Self::with_start(oracle, &g)
    }

    pub fn with_start(oracle: &CountingOracle<'_>, g: &DVector<f64>) -> Result<Self> {
        if !oracle.is_symmetric() || oracle.nrows() != oracle.ncols() {
            return Err(Error::InvalidOperator("krylov_iteration needs a symmetric operator".into()));
        }
        if g.len() != oracle.ncols() {
            return Err(Error::DimensionMismatch { expected: oracle.ncols(), got: g.len() });
        }
        let n = g.len();
        Ok(Self {
            basis: OrthoBasis::new(n),
            images: Vec::new(),
            raw: Vec::new(),
            x: unit_or_collapse(g)?,
            x_in_basis: false,
            lookahead: None,
            steps: 0,
            queries: 0,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Matvecs charged so far, including any closing product.
    pub fn queries(&self) -> usize {
        self.queries
    }

    fn step(&mut self, oracle: &mut CountingOracle<'_>) -> Result<()> {
        let y = match self.lookahead.take() {
            Some(y) => y,
            None => {
                let y = oracle.apply(&self.x)?;
                self.queries += 1;
                y
            }
        };
        if self.x_in_basis && self.images.len() < self.basis.len() {
            self.images.push(y.clone());
        }
        self.steps += 1;
        let norm = y.norm();
        let scaled = if norm > 0.0 { &y / norm } else { y.clone() };
        match self.basis.push(&y, RANK_TOL) {
            Some(q) => {
                self.x = q;
                self.x_in_basis = true;
            }
            None => {
                self.x = scaled.clone();
                self.x_in_basis = false;
            }
        }
        self.raw.push(scaled);
        Ok(())
    }

    pub fn extend_to(&mut self, oracle: &mut CountingOracle<'_>, q: usize) -> Result<()> {
        while self.steps < q {
            self.step(oracle)?;
        }
        Ok(())
    }

    /// Rayleigh–Ritz on `QᵀA²Q` at the current step. Costs one matvec when the
    /// newest basis vector's image is still missing; that product is reused as
    /// the next ladder step.
    pub fn solution(&mut self, oracle: &mut CountingOracle<'_>) -> Result<(DVector<f64>, KrylovSubspace)> {
        if self.basis.is_empty() {
            return Err(Error::RankCollapse);
        }
        if self.images.len() < self.basis.len() {
            debug_assert!(self.x_in_basis && self.lookahead.is_none());
            let y = oracle.apply(&self.x)?;
            self.queries += 1;
            self.images.push(y.clone());
            self.lookahead = Some(y);
        }
        let (_, v) = ritz_from_images(&self.basis, &self.images);
        let subspace = KrylovSubspace::new(self.raw.clone(), self.basis.clone(), 1, self.steps, self.queries);
        Ok((v, subspace))
    }
}

/// Krylov iteration with `q` ladder matvecs, plus one closing matvec when the
/// last ladder vector enlarged the basis.
pub fn krylov_iteration<R: Rng + ?Sized>(
    oracle: &mut CountingOracle<'_>,
    q: usize,
    rng: &mut R,
) -> Result<(DVector<f64>, KrylovSubspace)> {
    if q == 0 {
        return Err(Error::config("krylov_iteration needs q >= 1"));
    }
    let mut it = KrylovIteration::new(oracle, rng)?;
    it.extend_to(oracle, q)?;
    it.solution(oracle)
}
