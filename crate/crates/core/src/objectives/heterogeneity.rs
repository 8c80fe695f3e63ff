use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{inverse, spectral_norm, standard_normal_vector, Matrix, RngStream, Vector};
use crate::objectives::{Objective, QuadraticObjective};
use crate::scalar::Scalar;

/// Pairwise constants `(b_ik, c_ik)` such that for every `θ`
/// `‖∇R_i(θ) − ∇R_k(θ)‖² ≤ b_ik² + c_ik ‖∇R_i(θ)‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityMatrix<T> {
    n: usize,
    b: Vec<T>,
    c: Vec<T>,
}

impl<T: Scalar> HeterogeneityMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, b: vec![T::zero(); n * n], c: vec![T::zero(); n * n] }
    }

    /// Row-major `n × n` tables; entries must be non-negative with a zero diagonal.
    pub fn new(n: usize, b: Vec<T>, c: Vec<T>) -> Result<Self> {
        if b.len() != n * n || c.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: b.len().min(c.len()) });
        }
        if b.iter().chain(&c).any(|&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(Error::invalid("heterogeneity constants must be finite and non-negative"));
        }
        if (0..n).any(|i| b[i * n + i] != T::zero() || c[i * n + i] != T::zero()) {
            return Err(Error::invalid("heterogeneity diagonal must be zero"));
        }
        Ok(Self { n, b, c })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> (T, T)) -> Result<Self> {
        let mut b = Vec::with_capacity(n * n);
        let mut c = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                let (bv, cv) = if i == k { (T::zero(), T::zero()) } else { f(i, k) };
                b.push(bv);
                c.push(cv);
            }
        }
        Self::new(n, b, c)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn b(&self, i: usize, k: usize) -> T {
        self.b[i * self.n + k]
    }

    pub fn c(&self, i: usize, k: usize) -> T {
        self.c[i * self.n + k]
    }
}

/// Closed-form heterogeneity constants for quadratics `(θ + ξ)ᵀ A (θ + ξ)`.
///
/// Writing `∇R_i − ∇R_k = (I − A_k A_i⁻¹) ∇R_i + 2 A_k (ξ_i − ξ_k)` and using
/// `‖u + v‖² ≤ 2‖u‖² + 2‖v‖²` gives
/// `b_ik = √2 ‖2 A_k (ξ_i − ξ_k)‖₂` and `c_ik = 2 ‖I − A_k A_i⁻¹‖₂²`.
/// The factor 2 inside `b` is the gradient scale of a loss without the ½.
pub fn heterogeneity_bounds<T: Scalar>(objs: &[QuadraticObjective<T>]) -> Result<HeterogeneityMatrix<T>> {
    let n = objs.len();
    let d = objs.first().map_or(0, |o| o.dim());
    if let Some(bad) = objs.iter().find(|o| o.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
    }
    let inverses: Vec<Matrix<T>> = objs.iter().map(|o| inverse(o.a())).collect::<Result<_>>()?;
    let identity = Matrix::identity(d);
    let sqrt2 = T::two().sqrt();
    let mut b = vec![T::zero(); n * n];
    let mut c = vec![T::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            if i == k {
                continue;
            }
            let dxi = objs[i].xi().try_sub(objs[k].xi())?;
            b[i * n + k] = sqrt2 * objs[k].a().mul_vec(&dxi)?.scaled(T::two()).norm();
            let m = identity.try_sub(&objs[k].a().matmul(&inverses[i])?)?;
            let s = spectral_norm(&m)?;
            c[i * n + k] = T::two() * s * s;
        }
    }
    HeterogeneityMatrix::new(n, b, c)
}

#[derive(Debug, Clone)]
pub struct Violation<T> {
    pub i: usize,
    pub k: usize,
    pub theta: Vector<T>,
    pub excess: T,
}

#[derive(Debug, Clone)]
pub struct HeterogeneityReport<T> {
    /// Largest `lhs − rhs` seen over all probes and ordered pairs.
    pub max_violation: T,
    pub violations: usize,
    pub first_violation: Option<Violation<T>>,
    pub probes: usize,
}

impl<T: Scalar> HeterogeneityReport<T> {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks the bounded-heterogeneity inequality on `probes` random parameters.
///
/// Probes are Gaussian around the origin with a scale covering every client's
/// minimizer. A pair counts as violating when `lhs − rhs > 1e-9 · max(1, rhs)`.
pub fn validate_heterogeneity<T: Scalar, O: Objective<T>>(
    objs: &[O],
    hm: &HeterogeneityMatrix<T>,
    probes: usize,
    stream: &mut RngStream,
) -> Result<HeterogeneityReport<T>> {
    if probes == 0 {
        return Err(Error::invalid("at least one probe is required"));
    }
    if hm.len() != objs.len() {
        return Err(Error::DimensionMismatch { expected: objs.len(), found: hm.len() });
    }
    let d = objs.first().map_or(0, |o| o.dim());
    let spread = objs
        .iter()
        .filter_map(|o| o.minimizer())
        .fold(T::one(), |m, s| m.max(s.norm()));
    let tol = T::lit(1e-9);
    let mut report = HeterogeneityReport { max_violation: T::neg_infinity(), violations: 0, first_violation: None, probes };
    for _ in 0..probes {
        let theta = standard_normal_vector::<T>(stream, d).scaled(T::two() * spread);
        let grads: Vec<Vector<T>> = objs.iter().map(|o| o.gradient(&theta)).collect::<Result<_>>()?;
        for i in 0..objs.len() {
            let gi_sq = grads[i].norm_sq();
            for k in 0..objs.len() {
                let lhs = grads[i].dist_sq(&grads[k])?;
                let rhs = hm.b(i, k) * hm.b(i, k) + hm.c(i, k) * gi_sq;
                let excess = lhs - rhs;
                report.max_violation = report.max_violation.max(excess);
                if excess > tol * rhs.max(T::one()) {
                    report.violations += 1;
                    if report.first_violation.is_none() {
                        report.first_violation = Some(Violation { i, k, theta: theta.clone(), excess });
                    }
                }
            }
        }
    }
    Ok(report)
}
