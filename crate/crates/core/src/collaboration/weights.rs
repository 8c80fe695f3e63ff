use crate::collaboration::{Criterion, SimilarityRatios};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Collaboration weights of one focal client for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct CollaborationState<T> {
    pub focal: usize,
    pub alpha: Vec<T>,
    /// `σ²_{i,ψ}`, the effective variance.
    pub sigma_eff_sq: T,
    /// `σ²_{i,φ}`
    pub sigma_phi_sq: T,
    /// Clients with a strictly positive weight.
    pub active_set: Vec<usize>,
}

impl<T: Scalar> CollaborationState<T> {
    /// Fixed weights (baselines). The effective variance is the variance proxy
    /// `Σ α_k² σ_k²` of the aggregated gradient and `σ²_φ` is set so that
    /// `σ²_φ / σ²_ψ = 1 / Σ α_k`, matching the identity of adaptive weights.
    pub fn from_weights(focal: usize, alpha: Vec<T>, sigmas: &[T]) -> Result<Self> {
        if alpha.len() != sigmas.len() {
            return Err(Error::DimensionMismatch { expected: alpha.len(), found: sigmas.len() });
        }
        if focal >= alpha.len() {
            return Err(Error::invalid(format!("focal client {focal} out of range")));
        }
        if alpha.iter().any(|&a| !(a >= T::zero()) || !a.is_finite()) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
        let mass: T = alpha.iter().copied().sum();
        if mass == T::zero() {
            return Err(Error::NoAdmissibleCollaborator);
        }
        let variance: T = alpha.iter().zip(sigmas).map(|(&a, &s)| a * a * s * s).sum();
        let active_set = active(&alpha);
        Ok(Self { focal, alpha, sigma_eff_sq: variance, sigma_phi_sq: variance / mass, active_set })
    }

    /// Pure local step: weight 1 on the focal client only.
    pub fn local(focal: usize, n: usize, sigma: T) -> Self {
        let mut alpha = vec![T::zero(); n];
        alpha[focal] = T::one();
        let sigma_sq = sigma * sigma;
        Self { focal, alpha, sigma_eff_sq: sigma_sq, sigma_phi_sq: sigma_sq, active_set: vec![focal] }
    }

    /// Uniform weights `1/|members|` on `members`.
    pub fn uniform(focal: usize, members: &[usize], sigmas: &[T]) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::NoAdmissibleCollaborator);
        }
        let w = T::one() / T::from_usize_lossy(members.len());
        let mut alpha = vec![T::zero(); sigmas.len()];
        for &k in members {
            *alpha
                .get_mut(k)
                .ok_or_else(|| Error::invalid(format!("cluster member {k} out of range")))? = w;
        }
        Self::from_weights(focal, alpha, sigmas)
    }

    pub fn weight_mass(&self) -> T {
        self.alpha.iter().copied().sum()
    }

    /// Realized `σ²_{i,φ} / σ²_{i,ψ}`.
    pub fn step_ratio(&self) -> T {
        if self.sigma_eff_sq == T::zero() {
            return T::one() / self.weight_mass();
        }
        self.sigma_phi_sq / self.sigma_eff_sq
    }

    /// `Σ_k α_k² σ_k²`
    pub fn variance_proxy(&self, sigmas: &[T]) -> T {
        self.alpha.iter().zip(sigmas).map(|(&a, &s)| a * a * s * s).sum()
    }
}

fn active<T: Scalar>(alpha: &[T]) -> Vec<usize> {
    alpha.iter().enumerate().filter(|(_, &a)| a > T::zero()).map(|(k, _)| k).collect()
}

fn check_sigmas<T: Scalar>(n: usize, sigmas: &[T]) -> Result<()> {
    if sigmas.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: sigmas.len() });
    }
    if sigmas.iter().any(|&s| !(s > T::zero()) || !s.is_finite()) {
        return Err(Error::invalid("every sigma_k must be finite and positive"));
    }
    Ok(())
}

/// Adaptive weights `α_ik = φ(r_ik) σ²_{i,ψ} / σ_k²`.
///
/// Fails with [`Error::NoAdmissibleCollaborator`] when every `ψ(r_ik)` is zero,
/// in which case `σ²_{i,ψ}` is undefined.
pub fn compute_weights<T: Scalar>(
    ratios: &SimilarityRatios<T>,
    sigmas: &[T],
    crit: &Criterion<T>,
) -> Result<CollaborationState<T>> {
    check_sigmas(ratios.len(), sigmas)?;
    let mut inv_psi = T::zero();
    let mut inv_phi = T::zero();
    for (&r, &s) in ratios.values().iter().zip(sigmas) {
        let s2 = s * s;
        inv_psi = inv_psi + crit.psi(r) / s2;
        inv_phi = inv_phi + crit.phi(r) / s2;
    }
    if inv_psi == T::zero() {
        return Err(Error::NoAdmissibleCollaborator);
    }
    let sigma_eff_sq = T::one() / inv_psi;
    let sigma_phi_sq = T::one() / inv_phi;
    let alpha: Vec<T> = ratios
        .values()
        .iter()
        .zip(sigmas)
        .map(|(&r, &s)| crit.phi(r) * sigma_eff_sq / (s * s))
        .collect();
    let active_set = active(&alpha);
    Ok(CollaborationState { focal: ratios.focal(), alpha, sigma_eff_sq, sigma_phi_sq, active_set })
}

/// Analytic bracket `[lower, 1]` for the realized ratio `σ²_φ / σ²_ψ`:
/// `λ` for the binary criterion, `σ_i⁻² (Σ_k σ_k⁻²)⁻¹` for the continuous one.
pub fn step_size_ratio_bounds<T: Scalar>(
    state: &CollaborationState<T>,
    crit: &Criterion<T>,
    sigmas: &[T],
) -> Result<(T, T)> {
    check_sigmas(state.alpha.len(), sigmas)?;
    let lower = match *crit {
        Criterion::Binary { lambda } => lambda,
        Criterion::Continuous => {
            let total: T = sigmas.iter().map(|&s| T::one() / (s * s)).sum();
            let own = sigmas[state.focal];
            T::one() / (own * own) / total
        }
    };
    Ok((lower, T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratios(focal: usize, r: &[f64]) -> SimilarityRatios<f64> {
        SimilarityRatios::new(focal, r.to_vec()).unwrap()
    }

    #[test]
    fn single_client_is_local_sgd() {
        let s = compute_weights(&ratios(0, &[1.0]), &[1.0], &Criterion::Continuous).unwrap();
        assert_eq!(s.alpha, vec![1.0]);
        assert_eq!(s.sigma_eff_sq, 1.0);
        assert_eq!(s.active_set, vec![0]);
    }

    #[test]
    fn symmetric_pair_halves_variance() {
        let s = compute_weights(&ratios(0, &[1.0, 1.0]), &[1.0, 1.0], &Criterion::Continuous).unwrap();
        assert_eq!(s.alpha, vec![0.5, 0.5]);
        assert_eq!(s.sigma_eff_sq, 0.5);
    }

    #[test]
    fn half_similar_peer() {
        // ψ = (1, 0.25) ⇒ σ²_ψ = 1/1.25 = 0.8, α = φ·σ²_ψ = (0.8, 0.4)
        let s = compute_weights(&ratios(0, &[1.0, 0.5]), &[1.0, 1.0], &Criterion::Continuous).unwrap();
        assert!((s.sigma_eff_sq - 0.8).abs() < 1e-15);
        assert!((s.alpha[0] - 0.8).abs() < 1e-15 && (s.alpha[1] - 0.4).abs() < 1e-15);
        assert!((s.weight_mass() - s.sigma_eff_sq / s.sigma_phi_sq).abs() < 1e-15);
    }

    #[test]
    fn no_admissible_collaborator() {
        let err = compute_weights(&ratios(0, &[0.0, 0.3]), &[1.0, 1.0], &Criterion::binary(0.5).unwrap());
        assert!(matches!(err, Err(Error::NoAdmissibleCollaborator)));
    }

    #[test]
    fn sigma_validation() {
        assert!(compute_weights(&ratios(0, &[1.0, 1.0]), &[1.0, 0.0], &Criterion::Continuous).is_err());
        assert!(compute_weights(&ratios(0, &[1.0, 1.0]), &[1.0], &Criterion::Continuous).is_err());
    }

    #[test]
    fn binary_activation_at_threshold() {
        let crit = Criterion::binary(0.5).unwrap();
        let below = compute_weights(&ratios(0, &[1.0, 0.49]), &[1.0, 1.0], &crit).unwrap();
        let at = compute_weights(&ratios(0, &[1.0, 0.5]), &[1.0, 1.0], &crit).unwrap();
        assert_eq!(below.active_set, vec![0]);
        assert_eq!(at.active_set, vec![0, 1]);
    }

    #[test]
    fn ratio_bounds() {
        let crit = Criterion::binary(0.2).unwrap();
        let s = compute_weights(&ratios(0, &[1.0, 0.25, 0.9]), &[1.0, 2.0, 0.5], &crit).unwrap();
        let (lo, hi) = step_size_ratio_bounds(&s, &crit, &[1.0, 2.0, 0.5]).unwrap();
        assert_eq!((lo, hi), (0.2, 1.0));
        assert!(s.step_ratio() >= lo && s.step_ratio() <= hi);

        let single = compute_weights(&ratios(0, &[1.0, 0.0]), &[1.0, 1.0], &Criterion::Continuous).unwrap();
        assert!((single.step_ratio() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn baseline_constructors() {
        let u: CollaborationState<f64> = CollaborationState::uniform(1, &[1, 3], &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(u.alpha, vec![0.0, 0.5, 0.0, 0.5]);
        assert_eq!(u.sigma_eff_sq, 0.5);
        assert!((u.step_ratio() - 1.0).abs() < 1e-15);
        let l = CollaborationState::local(2, 3, 2.0);
        assert_eq!(l.alpha, vec![0.0, 0.0, 1.0]);
        assert_eq!(l.sigma_eff_sq, 4.0);
        assert!(CollaborationState::uniform(0, &[], &[1.0]).is_err());
    }
}
