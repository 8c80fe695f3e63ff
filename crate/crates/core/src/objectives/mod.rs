//! Client loss functions and the constants the convergence analysis needs.

mod heterogeneity;
mod lsr;
mod quadratic;

pub use heterogeneity::{heterogeneity_bounds, validate_heterogeneity, HeterogeneityMatrix, HeterogeneityReport, Violation};
pub use lsr::LsrObjective;
pub use quadratic::QuadraticObjective;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream, Vector};
use crate::scalar::Scalar;

/// Number of probe draws used to estimate the gradient-noise bound of
/// objectives without a closed form.
pub const DEFAULT_NOISE_PROBES: usize = 10_000;

/// Smoothness `beta`, strong-convexity/PL constant `mu` and gradient-noise bound `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConstants<T> {
    pub beta: T,
    pub mu: T,
    pub sigma: T,
}

impl<T: Scalar> ObjectiveConstants<T> {
    pub fn new(beta: T, mu: T, sigma: T) -> Result<Self> {
        if !(beta > T::zero()) || mu < T::zero() || sigma < T::zero() {
            return Err(Error::invalid("constants require beta > 0, mu >= 0, sigma >= 0"));
        }
        if mu > beta {
            return Err(Error::invalid("mu must not exceed beta"));
        }
        Ok(Self { beta, mu, sigma })
    }

    /// `beta = 2 λ_max`, `mu = 2 λ_min` of a symmetric curvature matrix.
    pub(crate) fn from_curvature(curvature: &Matrix<T>, sigma: T) -> Result<Self> {
        let eig = crate::numerics::symmetric_eigenvalues(curvature)?;
        let lo = eig.first().copied().unwrap_or_else(T::zero).max(T::zero());
        let hi = eig.last().copied().unwrap_or_else(T::zero);
        Self::new(T::two() * hi, T::two() * lo, sigma)
    }
}

/// A client loss with exact and stochastic gradient oracles.
///
/// All objectives in this crate have minimum value zero, so the loss returned
/// by [`Objective::excess_loss`] is also the excess loss.
pub trait Objective<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn excess_loss(&self, theta: &Vector<T>) -> Result<T>;

    fn gradient(&self, theta: &Vector<T>) -> Result<Vector<T>>;

    /// Unbiased stochastic gradient drawn from `stream`.
    fn stochastic_gradient(&self, theta: &Vector<T>, stream: &mut RngStream) -> Result<Vector<T>>;

    /// Half the Hessian, i.e. the matrix `A` in `(θ − θ*)ᵀ A (θ − θ*)`.
    fn curvature(&self) -> &Matrix<T>;

    fn minimizer(&self) -> Option<Vector<T>>;

    /// `beta`, `mu` and `sigma`; objectives without a closed-form noise bound
    /// estimate it at `theta0` from `stream`.
    fn constants(&self, theta0: &Vector<T>, stream: &mut RngStream) -> Result<ObjectiveConstants<T>>;

    fn check_dim(&self, theta: &Vector<T>) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: theta.len() });
        }
        Ok(())
    }
}

/// Either of the two objective families, so heterogeneous populations can live
/// in one slice.
#[derive(Debug, Clone)]
pub enum ClientObjective<T> {
    Quadratic(QuadraticObjective<T>),
    Lsr(LsrObjective<T>),
}

impl<T: Scalar> ClientObjective<T> {
    /// The quadratic with the same expected loss.
    pub fn to_quadratic(&self) -> QuadraticObjective<T> {
        match self {
            ClientObjective::Quadratic(q) => q.clone(),
            ClientObjective::Lsr(l) => l.expected_quadratic(),
        }
    }
}

impl<T: Scalar> Objective<T> for ClientObjective<T> {
    fn dim(&self) -> usize {
        match self {
            ClientObjective::Quadratic(o) => o.dim(),
            ClientObjective::Lsr(o) => o.dim(),
        }
    }

    fn excess_loss(&self, theta: &Vector<T>) -> Result<T> {
        match self {
            ClientObjective::Quadratic(o) => o.excess_loss(theta),
            ClientObjective::Lsr(o) => o.excess_loss(theta),
        }
    }

    fn gradient(&self, theta: &Vector<T>) -> Result<Vector<T>> {
        match self {
            ClientObjective::Quadratic(o) => o.gradient(theta),
            ClientObjective::Lsr(o) => o.gradient(theta),
        }
    }

    fn stochastic_gradient(&self, theta: &Vector<T>, stream: &mut RngStream) -> Result<Vector<T>> {
        match self {
            ClientObjective::Quadratic(o) => o.stochastic_gradient(theta, stream),
            ClientObjective::Lsr(o) => o.stochastic_gradient(theta, stream),
        }
    }

    fn curvature(&self) -> &Matrix<T> {
        match self {
            ClientObjective::Quadratic(o) => o.curvature(),
            ClientObjective::Lsr(o) => o.curvature(),
        }
    }

    fn minimizer(&self) -> Option<Vector<T>> {
        match self {
            ClientObjective::Quadratic(o) => o.minimizer(),
            ClientObjective::Lsr(o) => o.minimizer(),
        }
    }

    fn constants(&self, theta0: &Vector<T>, stream: &mut RngStream) -> Result<ObjectiveConstants<T>> {
        match self {
            ClientObjective::Quadratic(o) => o.constants(theta0, stream),
            ClientObjective::Lsr(o) => o.constants(theta0, stream),
        }
    }
}

impl<T> From<QuadraticObjective<T>> for ClientObjective<T> {
    fn from(q: QuadraticObjective<T>) -> Self {
        ClientObjective::Quadratic(q)
    }
}

impl<T> From<LsrObjective<T>> for ClientObjective<T> {
    fn from(l: LsrObjective<T>) -> Self {
        ClientObjective::Lsr(l)
    }
}
