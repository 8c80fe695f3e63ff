use crate::error::{Error, Result};
use crate::numerics::{standard_normal_vector, Matrix, RngStream, Vector};
use crate::objectives::{Objective, ObjectiveConstants};
use crate::scalar::Scalar;

/// `R(θ) = (θ + ξ)ᵀ A (θ + ξ)` with isotropic Gaussian gradient noise whose
/// covariance has trace `noise_sigma²`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective<T> {
    a: Matrix<T>,
    xi: Vector<T>,
    noise_sigma: T,
}

impl<T: Scalar> QuadraticObjective<T> {
    pub fn new(a: Matrix<T>, xi: Vector<T>, noise_sigma: T) -> Result<Self> {
        let d = a.require_square()?;
        if xi.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: xi.len() });
        }
        if !(noise_sigma >= T::zero()) || !noise_sigma.is_finite() {
            return Err(Error::invalid("noise_sigma must be finite and non-negative"));
        }
        let scale = a.max_abs().max(T::one());
        if !a.is_symmetric(T::lit(1e-9) * scale) {
            return Err(Error::invalid("curvature matrix must be symmetric"));
        }
        let eig = crate::numerics::symmetric_eigenvalues(&a)?;
        if let Some(&lo) = eig.first() {
            if lo < -T::lit(1e-9) * scale {
                return Err(Error::NotPositiveSemiDefinite { row: 0, pivot: lo.to_f64_lossy() });
            }
        }
        Ok(Self { a, xi, noise_sigma })
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn xi(&self) -> &Vector<T> {
        &self.xi
    }

    pub fn noise_sigma(&self) -> T {
        self.noise_sigma
    }

    pub fn with_noise(mut self, noise_sigma: T) -> Self {
        self.noise_sigma = noise_sigma;
        self
    }

    fn shifted(&self, theta: &Vector<T>) -> Result<Vector<T>> {
        self.check_dim(theta)?;
        theta.try_add(&self.xi)
    }
}

impl<T: Scalar> Objective<T> for QuadraticObjective<T> {
    fn dim(&self) -> usize {
        self.xi.len()
    }

    fn excess_loss(&self, theta: &Vector<T>) -> Result<T> {
        let e = self.shifted(theta)?;
        e.dot(&self.a.mul_vec(&e)?)
    }

    fn gradient(&self, theta: &Vector<T>) -> Result<Vector<T>> {
        let e = self.shifted(theta)?;
        Ok(self.a.mul_vec(&e)?.scaled(T::two()))
    }

    fn stochastic_gradient(&self, theta: &Vector<T>, stream: &mut RngStream) -> Result<Vector<T>> {
        let mut g = self.gradient(theta)?;
        if self.noise_sigma > T::zero() {
            let per_coord = self.noise_sigma / T::from_usize_lossy(self.dim()).sqrt();
            g.axpy(per_coord, &standard_normal_vector(stream, self.dim()))?;
        }
        Ok(g)
    }

    fn curvature(&self) -> &Matrix<T> {
        &self.a
    }

    fn minimizer(&self) -> Option<Vector<T>> {
        Some(self.xi.scaled(-T::one()))
    }

    fn constants(&self, _theta0: &Vector<T>, _stream: &mut RngStream) -> Result<ObjectiveConstants<T>> {
        ObjectiveConstants::from_curvature(&self.a, self.noise_sigma)
    }
}
