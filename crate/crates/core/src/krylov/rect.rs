use nalgebra::DVector;
use rand::Rng;

use super::{ritz_from_images, unit_or_collapse, KrylovSubspace};
use crate::error::{Error, Result};
use crate::linalg::{OrthoBasis, RANK_TOL};
use crate::operators::CountingOracle;
use crate::rng::gaussian_vector;

/// Rectangular Krylov iteration on `AAᵀ` for an n×d operator, grown step by
/// step. The Krylov vectors `(AAᵀ)ⁱg` live in ℝⁿ; each step costs one `Aᵀ`
/// and one `A` product, and the `Aᵀ` images of basis vectors are kept so that
/// `M = (AᵀQ)ᵀ(AᵀQ)` needs at most one further product.
#[derive(Clone, Debug)]
pub struct RectKrylov {
    basis: OrthoBasis,
    at_images: Vec<DVector<f64>>,
    raw: Vec<DVector<f64>>,
    x: DVector<f64>,
    x_in_basis: bool,
    lookahead: Option<DVector<f64>>,
    steps: usize,
    queries: usize,
}

#[derive(Clone, Debug)]
pub struct RectSolution {
    /// Unit vector in ℝ^d.
    pub v: DVector<f64>,
    /// Unit vector in ℝⁿ maximizing `‖Aᵀw‖` over the span.
    pub w: DVector<f64>,
    /// `‖Aᵀw‖`.
    pub at_w_norm: f64,
    pub subspace: KrylovSubspace,
}

impl RectKrylov {
    pub fn new<R: Rng + ?Sized>(oracle: &CountingOracle<'_>, rng: &mut R) -> Result<Self> {
        let g = gaussian_vector(rng, oracle.nrows());
        Self::with_start(oracle, &g)
    }

    pub fn with_start(oracle: &CountingOracle<'_>, g: &DVector<f64>) -> Result<Self> {
        if g.len() != oracle.nrows() {
            return Err(Error::DimensionMismatch { expected: oracle.nrows(), got: g.len() });
        }
        let x = unit_or_collapse(g)?;
        let mut basis = OrthoBasis::new(g.len());
        basis.push_orthonormal(x.clone());
        Ok(Self {
            basis,
            at_images: Vec::new(),
            raw: vec![x.clone()],
            x,
            x_in_basis: true,
            lookahead: None,
            steps: 0,
            queries: 0,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    fn at_of_x(&mut self, oracle: &mut CountingOracle<'_>) -> Result<DVector<f64>> {
        match self.lookahead.take() {
            Some(z) => Ok(z),
            None => {
                let z = oracle.apply_t(&self.x)?;
                self.queries += 1;
                Ok(z)
            }
        }
    }

    fn step(&mut self, oracle: &mut CountingOracle<'_>) -> Result<()> {
        let z = self.at_of_x(oracle)?;
        if self.x_in_basis && self.at_images.len() < self.basis.len() {
            self.at_images.push(z.clone());
        }
        let y = oracle.apply(&z)?;
        self.queries += 1;
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

    pub fn extend_to(&mut self, oracle: &mut CountingOracle<'_>, t: usize) -> Result<()> {
        while self.steps < t {
            self.step(oracle)?;
        }
        Ok(())
    }

    pub fn solution(&mut self, oracle: &mut CountingOracle<'_>) -> Result<RectSolution> {
        if self.at_images.len() < self.basis.len() {
            let z = oracle.apply_t(&self.x)?;
            self.queries += 1;
            self.at_images.push(z.clone());
            self.lookahead = Some(z);
        }
        let (top, w) = ritz_from_images(&self.basis, &self.at_images);
        // AᵀQ·y₁ from the stored images: express w back in basis coordinates.
        let coords: Vec<f64> = self.basis.columns().iter().map(|q| q.dot(&w)).collect();
        let mut atw = DVector::zeros(self.at_images[0].len());
        for (z, c) in self.at_images.iter().zip(coords) {
            atw.axpy(c, z, 1.0);
        }
        let at_w_norm = atw.norm();
        if at_w_norm == 0.0 || top <= 0.0 {
            return Err(Error::DegenerateW);
        }
        let subspace = KrylovSubspace::new(self.raw.clone(), self.basis.clone(), 1, self.steps, self.queries);
        Ok(RectSolution { v: atw / at_w_norm, w, at_w_norm, subspace })
    }
}

/// Rectangular Krylov with `t` steps: `2t` ladder matvecs plus one closing
/// `Aᵀ` product when the newest basis vector's image is missing.
pub fn rectangular_krylov<R: Rng + ?Sized>(
    oracle: &mut CountingOracle<'_>,
    t: usize,
    rng: &mut R,
) -> Result<RectSolution> {
    let mut it = RectKrylov::new(oracle, rng)?;
    it.extend_to(oracle, t)?;
    it.solution(oracle)
}
