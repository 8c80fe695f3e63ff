use rayon::prelude::*;

use crate::collaboration::Criterion;
use crate::error::{Error, Result};
use crate::objectives::HeterogeneityMatrix;
use crate::scalar::Scalar;

/// Power applied to `b_ik` in the membership threshold `1 − b^p/(2με) − c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdExponent {
    Linear,
    #[default]
    Squared,
}

impl ThresholdExponent {
    pub fn from_power(p: u8) -> Result<Self> {
        match p {
            1 => Ok(Self::Linear),
            2 => Ok(Self::Squared),
            _ => Err(Error::invalid(format!("threshold_exponent must be 1 or 2, got {p}"))),
        }
    }

    pub fn power(self) -> u8 {
        match self {
            Self::Linear => 1,
            Self::Squared => 2,
        }
    }

    fn apply<T: Scalar>(self, b: T) -> T {
        match self {
            Self::Linear => b,
            Self::Squared => b * b,
        }
    }
}

/// Sufficient cluster of one focal client at precision `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientClusterReport<T> {
    pub focal: usize,
    pub epsilon: T,
    /// Sorted member indices.
    pub members: Vec<usize>,
    /// `+∞` when no client qualifies.
    pub sigma_suf_sq: T,
}

impl<T: Scalar> SufficientClusterReport<T> {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// True when no collaborator suffices at this precision.
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.members.binary_search(&k).is_ok()
    }
}

fn check_inputs<T: Scalar>(focal: usize, hm: &HeterogeneityMatrix<T>, mu: T, sigmas: &[T]) -> Result<()> {
    let n = hm.len();
    if sigmas.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: sigmas.len() });
    }
    if focal >= n {
        return Err(Error::invalid(format!("focal client {focal} out of range for {n} clients")));
    }
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::invalid("mu must be finite and positive"));
    }
    if sigmas.iter().any(|&s| !(s > T::zero()) || !s.is_finite()) {
        return Err(Error::invalid("every sigma_k must be finite and positive"));
    }
    Ok(())
}

/// `ψ((1 − b^p/(2με) − c)₊)`; `ε = 0` keeps only clients with `b = 0`.
fn score<T: Scalar>(b: T, c: T, mu: T, eps: T, crit: &Criterion<T>, exponent: ThresholdExponent) -> T {
    let shift = if b == T::zero() { T::zero() } else { exponent.apply(b) / (T::two() * mu * eps) };
    let x = (T::one() - shift - c).max(T::zero());
    crit.psi(x)
}

fn build<T: Scalar>(
    focal: usize,
    eps: T,
    hm: &HeterogeneityMatrix<T>,
    mu: T,
    sigmas: &[T],
    crit: &Criterion<T>,
    exponent: ThresholdExponent,
) -> SufficientClusterReport<T> {
    let mut members = Vec::new();
    let mut precision = T::zero();
    for (k, &s) in sigmas.iter().enumerate() {
        let w = score(hm.b(focal, k), hm.c(focal, k), mu, eps, crit, exponent);
        if w > T::zero() {
            members.push(k);
            precision = precision + w / (s * s);
        }
    }
    let sigma_suf_sq = if precision > T::zero() { T::one() / precision } else { T::infinity() };
    SufficientClusterReport { focal, epsilon: eps, members, sigma_suf_sq }
}

/// Clients whose collaboration provably suffices to reach excess loss `eps`,
/// together with the sufficient variance
/// `(Σ_k σ_k⁻² ψ((1 − b_ik^p/(2με) − c_ik)₊))⁻¹`.
pub fn sufficient_cluster<T: Scalar>(
    focal: usize,
    eps: T,
    hm: &HeterogeneityMatrix<T>,
    mu: T,
    sigmas: &[T],
    crit: &Criterion<T>,
    exponent: ThresholdExponent,
) -> Result<SufficientClusterReport<T>> {
    check_inputs(focal, hm, mu, sigmas)?;
    if !(eps > T::zero()) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    Ok(build(focal, eps, hm, mu, sigmas, crit, exponent))
}

/// Evaluates [`sufficient_cluster`] over a grid of precisions in parallel.
pub fn sufficient_cluster_sweep<T: Scalar>(
    focal: usize,
    eps_grid: &[T],
    hm: &HeterogeneityMatrix<T>,
    mu: T,
    sigmas: &[T],
    crit: &Criterion<T>,
    exponent: ThresholdExponent,
) -> Result<Vec<SufficientClusterReport<T>>> {
    check_inputs(focal, hm, mu, sigmas)?;
    if eps_grid.iter().any(|&e| !(e > T::zero())) {
        return Err(Error::invalid("epsilon grid must be strictly positive"));
    }
    Ok(eps_grid.par_iter().map(|&e| build(focal, e, hm, mu, sigmas, crit, exponent)).collect())
}

/// Large-precision limit `(Σ_k σ_k⁻² ψ((1 − c_ik)₊))⁻¹`.
pub fn limit_sufficient_variance<T: Scalar>(
    focal: usize,
    hm: &HeterogeneityMatrix<T>,
    sigmas: &[T],
    crit: &Criterion<T>,
) -> Result<T> {
    check_inputs(focal, hm, T::one(), sigmas)?;
    let precision: T = sigmas
        .iter()
        .enumerate()
        .map(|(k, &s)| crit.psi((T::one() - hm.c(focal, k)).max(T::zero())) / (s * s))
        .sum();
    Ok(if precision > T::zero() { T::one() / precision } else { T::infinity() })
}

#[derive(Debug, Clone, PartialEq)]
pub enum NestingViolation<T> {
    /// `client` belongs to the cluster at `eps_small` but not at `eps_large`.
    Membership { index: usize, eps_large: T, eps_small: T, client: usize },
    /// `σ²_suf(eps_small) < σ²_suf(eps_large)`.
    Variance { index: usize, eps_large: T, eps_small: T, small: T, large: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestingReport<T> {
    pub reports: Vec<SufficientClusterReport<T>>,
    pub first_violation: Option<NestingViolation<T>>,
}

impl<T: Scalar> NestingReport<T> {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Checks that clusters shrink and sufficient variances grow along a
/// non-increasing precision grid.
pub fn nesting_check<T: Scalar>(
    focal: usize,
    eps_grid: &[T],
    hm: &HeterogeneityMatrix<T>,
    mu: T,
    sigmas: &[T],
    crit: &Criterion<T>,
    exponent: ThresholdExponent,
) -> Result<NestingReport<T>> {
    if eps_grid.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::invalid("epsilon grid must be non-increasing"));
    }
    let reports = sufficient_cluster_sweep(focal, eps_grid, hm, mu, sigmas, crit, exponent)?;
    let mut first_violation = None;
    'scan: for (j, pair) in reports.windows(2).enumerate() {
        let (large, small) = (&pair[0], &pair[1]);
        for &k in &small.members {
            if !large.contains(k) {
                first_violation = Some(NestingViolation::Membership {
                    index: j + 1,
                    eps_large: large.epsilon,
                    eps_small: small.epsilon,
                    client: k,
                });
                break 'scan;
            }
        }
        if small.sigma_suf_sq < large.sigma_suf_sq {
            first_violation = Some(NestingViolation::Variance {
                index: j + 1,
                eps_large: large.epsilon,
                eps_small: small.epsilon,
                small: small.sigma_suf_sq,
                large: large.sigma_suf_sq,
            });
            break;
        }
    }
    Ok(NestingReport { reports, first_violation })
}

/// Runtime inclusion of the sufficient cluster at the current excess loss in
/// the active set. Returns the members of `𝒩_i*(ε_i^t)` missing from `active`.
#[allow(clippy::too_many_arguments)]
pub fn inclusion_check<T: Scalar>(
    focal: usize,
    excess_loss: T,
    hm: &HeterogeneityMatrix<T>,
    mu: T,
    sigmas: &[T],
    crit: &Criterion<T>,
    exponent: ThresholdExponent,
    active: &[usize],
) -> Result<Vec<usize>> {
    check_inputs(focal, hm, mu, sigmas)?;
    if !(excess_loss >= T::zero()) {
        return Err(Error::invalid("excess loss must be non-negative"));
    }
    let report = build(focal, excess_loss, hm, mu, sigmas, crit, exponent);
    Ok(report.members.into_iter().filter(|k| !active.contains(k)).collect())
}
