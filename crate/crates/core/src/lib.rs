//! Low-rank approximation in the matrix-vector query model.

pub mod calibration;
pub mod chebyshev;
pub mod error;
pub mod experiments;
pub mod krylov;
pub mod lifting;
pub mod linalg;
pub mod operators;
pub mod rng;
pub mod schatten;
pub mod stats;

pub use error::{Error, Result};
