use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theory::{table1_bound, BoundRegime};

/// Step size as a function of the iteration index `t ≥ 1`.
///
/// The realized step is further capped per client and per iteration by
/// `(σ²_φ/σ²_ψ)/β_i`, see [`crate::optimizer::run_experiment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule<T> {
    Constant { eta: T },
    /// `η = ln(2Tμ²ε⁰/(βσ²_suf)) / (μT)`, constant over the horizon.
    HorizonDependent { horizon: u64, mu: T, beta: T, eps0: T, sigma_suf_sq: T },
    /// `η_t = C/(μt)`
    Decreasing { c: T, mu: T },
}

impl<T: Scalar> StepSchedule<T> {
    /// Checks the regime constraints. `mu` is the focal strong-convexity
    /// constant used for the constant-step condition `η ≤ 1/μ` (skipped when 0).
    pub fn validate(&self, mu: T) -> Result<()> {
        match *self {
            StepSchedule::Constant { eta } => {
                if !(eta > T::zero()) || !eta.is_finite() {
                    return Err(Error::constraint(format!("eta > 0 (got {eta})")));
                }
                if mu > T::zero() && eta * mu > T::one() {
                    return Err(Error::constraint(format!("eta <= 1/mu (got eta={eta}, mu={mu})")));
                }
                Ok(())
            }
            StepSchedule::HorizonDependent { horizon, mu, beta, eps0, sigma_suf_sq } => {
                table1_bound(BoundRegime::HorizonDependent, beta, mu, eps0, sigma_suf_sq, horizon, T::zero()).map(|_| ())
            }
            StepSchedule::Decreasing { c, mu } => {
                if !(c > T::one()) || !c.is_finite() {
                    return Err(Error::constraint(format!("C > 1 (got {c})")));
                }
                if !(mu > T::zero()) || !mu.is_finite() {
                    return Err(Error::constraint(format!("mu > 0 (got {mu})")));
                }
                Ok(())
            }
        }
    }

    /// Scheduled step at iteration `t ≥ 1`.
    pub fn eta(&self, t: u64) -> T {
        let t = T::from_u64(t.max(1)).unwrap_or_else(T::max_value);
        match *self {
            StepSchedule::Constant { eta } => eta,
            StepSchedule::HorizonDependent { horizon, mu, beta, eps0, sigma_suf_sq } => {
                let h = T::from_u64(horizon).unwrap_or_else(T::max_value);
                (T::two() * h * mu * mu * eps0 / (beta * sigma_suf_sq)).ln() / (mu * h)
            }
            StepSchedule::Decreasing { c, mu } => c / (mu * t),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            StepSchedule::Constant { .. } => "constant",
            StepSchedule::HorizonDependent { .. } => "horizon_dependent",
            StepSchedule::Decreasing { .. } => "decreasing",
        }
    }
}

impl<T: Scalar> fmt::Display for StepSchedule<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSchedule::Constant { eta } => write!(f, "constant(eta={eta})"),
            StepSchedule::HorizonDependent { horizon, .. } => {
                write!(f, "horizon_dependent(T={horizon}, eta={})", self.eta(1))
            }
            StepSchedule::Decreasing { c, mu } => write!(f, "decreasing(C={c}, mu={mu})"),
        }
    }
}
