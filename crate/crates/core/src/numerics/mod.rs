//! Dense linear algebra and reproducible randomness shared by every other module.
//!
//! Dimensions in this crate are small (a few to a few dozen coordinates), so all
//! factorizations are straightforward dense routines.

mod linalg;
mod matrix;
mod rng;
mod sampling;
mod vector;

pub use linalg::{cholesky_psd, determinant, householder_qr, inverse, spectral_norm, symmetric_eigenvalues};
pub use matrix::Matrix;
pub use rng::{Purpose, RngStream, StreamId};
pub use sampling::{sample_gaussian_vector, sample_orthogonal_matrix, standard_normal_vector, GaussianSampler};
pub use vector::Vector;
