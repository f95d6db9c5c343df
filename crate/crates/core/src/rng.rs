//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by
//! `(seed, trial, purpose)`. ChaCha is counter based, so the stream for one
//! trial does not depend on how many draws other trials made or on which
//! thread ran them.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// 64-bit FNV-1a.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// What a stream is used for. Distinct purposes never share draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    Instance,
    StartVector,
    Simulator,
    Strategy,
    Probe,
    Custom(&'static str),
}

impl Purpose {
    fn label(&self) -> &str {
        match self {
            Purpose::Instance => "instance",
            Purpose::StartVector => "start-vector",
            Purpose::Simulator => "simulator",
            Purpose::Strategy => "strategy",
            Purpose::Probe => "probe",
            Purpose::Custom(s) => s,
        }
    }
}

/// Seed material for one experiment. Cheap to copy; derive streams on demand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedKey {
    pub seed: u64,
}

impl SeedKey {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn stream(&self, trial: u64, purpose: Purpose) -> ChaCha8Rng {
        stream(self.seed, trial, purpose)
    }
}

pub fn stream(seed: u64, trial: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut key = trial.to_le_bytes().to_vec();
    key.extend_from_slice(purpose.label().as_bytes());
    rng.set_stream(fnv1a(&key));
    rng
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    // Column-major fill keeps the draw order independent of the storage layout.
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_vec(rows, cols, data)
}

/// Uniform point on the unit sphere S^{n-1}.
pub fn sphere_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let g = gaussian_vector(rng, n);
        let norm = g.norm();
        if norm > 0.0 {
            return g / norm;
        }
    }
}
