use crate::error::{Error, Result};
use crate::numerics::{GaussianSampler, Matrix, RngStream, Vector};
use crate::objectives::{Objective, ObjectiveConstants, QuadraticObjective, DEFAULT_NOISE_PROBES};
use crate::scalar::Scalar;

/// Online least squares with noiseless labels `y = ⟨x, θ*⟩`, `x ~ N(0, H)`.
///
/// The expected loss is `(θ − θ*)ᵀ H (θ − θ*)`; stochastic gradients come from
/// mini-batches of `batch_size` fresh feature draws, so the only noise is the
/// sampling of the features.
#[derive(Debug, Clone)]
pub struct LsrObjective<T> {
    h: Matrix<T>,
    theta_star: Vector<T>,
    batch_size: usize,
    features: GaussianSampler<T>,
    noise_probes: usize,
}

impl<T: Scalar> LsrObjective<T> {
    pub fn new(h: Matrix<T>, theta_star: Vector<T>, batch_size: usize) -> Result<Self> {
        let d = h.require_square()?;
        if theta_star.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: theta_star.len() });
        }
        if batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        let features = GaussianSampler::new(Vector::zeros(d), &h)?;
        Ok(Self { h, theta_star, batch_size, features, noise_probes: DEFAULT_NOISE_PROBES })
    }

    pub fn with_noise_probes(mut self, probes: usize) -> Self {
        self.noise_probes = probes.max(1);
        self
    }

    pub fn h(&self) -> &Matrix<T> {
        &self.h
    }

    pub fn theta_star(&self) -> &Vector<T> {
        &self.theta_star
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    /// The noiseless quadratic with the same expected loss (`A = H`, `ξ = −θ*`).
    pub fn expected_quadratic(&self) -> QuadraticObjective<T> {
        QuadraticObjective::new(self.h.clone(), self.theta_star.scaled(-T::one()), T::zero())
            .expect("H was validated at construction")
    }

    /// 99th percentile of `‖g − ∇R‖` over `probes` draws at `theta0`.
    pub fn estimate_sigma(&self, theta0: &Vector<T>, stream: &mut RngStream, probes: usize) -> Result<T> {
        let exact = self.gradient(theta0)?;
        let mut devs: Vec<T> = (0..probes.max(1))
            .map(|_| Ok(self.stochastic_gradient(theta0, stream)?.dist_sq(&exact)?.sqrt()))
            .collect::<Result<_>>()?;
        devs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let idx = ((devs.len() as f64) * 0.99).ceil() as usize;
        Ok(devs[idx.clamp(1, devs.len()) - 1])
    }
}

impl<T: Scalar> Objective<T> for LsrObjective<T> {
    fn dim(&self) -> usize {
        self.theta_star.len()
    }

    fn excess_loss(&self, theta: &Vector<T>) -> Result<T> {
        self.check_dim(theta)?;
        let e = theta.try_sub(&self.theta_star)?;
        e.dot(&self.h.mul_vec(&e)?)
    }

    fn gradient(&self, theta: &Vector<T>) -> Result<Vector<T>> {
        self.check_dim(theta)?;
        let e = theta.try_sub(&self.theta_star)?;
        Ok(self.h.mul_vec(&e)?.scaled(T::two()))
    }

    fn stochastic_gradient(&self, theta: &Vector<T>, stream: &mut RngStream) -> Result<Vector<T>> {
        self.check_dim(theta)?;
        let e = theta.try_sub(&self.theta_star)?;
        let mut g = Vector::zeros(self.dim());
        let w = T::two() / T::from_usize_lossy(self.batch_size);
        for _ in 0..self.batch_size {
            let x = self.features.sample(stream);
            // residual ⟨x, θ⟩ − y with y = ⟨x, θ*⟩
            let residual = x.dot(&e)?;
            g.axpy(w * residual, &x)?;
        }
        Ok(g)
    }

    fn curvature(&self) -> &Matrix<T> {
        &self.h
    }

    fn minimizer(&self) -> Option<Vector<T>> {
        Some(self.theta_star.clone())
    }

    fn constants(&self, theta0: &Vector<T>, stream: &mut RngStream) -> Result<ObjectiveConstants<T>> {
        let sigma = self.estimate_sigma(theta0, stream, self.noise_probes)?;
        ObjectiveConstants::from_curvature(&self.h, sigma)
    }
}
