use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundRegime {
    /// `η ≤ 1/μ`
    Constant,
    /// `η = ln(2Tμ²ε⁰/(βσ²)) / (μT)`
    HorizonDependent,
    /// `η_t = C/(μt)` with `C > 1`
    Decreasing,
}

impl BoundRegime {
    pub fn label(self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::HorizonDependent => "horizon_dependent",
            Self::Decreasing => "decreasing",
        }
    }
}

impl fmt::Display for BoundRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs<T> {
    pub beta: T,
    pub mu: T,
    pub eps0: T,
    pub sigma_suf_sq: T,
    pub horizon: u64,
    /// `η` for the constant regime, `C` for the decreasing one, the derived
    /// step for the horizon-dependent one.
    pub eta_or_c: T,
}

/// Upper bound on the expected excess loss after `T` iterations.
///
/// `bias + variance == bound_at_t` except in the decreasing regime where the
/// bound is `max(variance, bias)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEvaluation<T> {
    pub regime: BoundRegime,
    pub bound_at_t: T,
    pub bias: T,
    pub variance: T,
    pub inputs: BoundInputs<T>,
}

fn positive<T: Scalar>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::constraint(format!("{name} > 0 (got {x})")))
    }
}

fn non_negative<T: Scalar>(name: &str, x: T) -> Result<()> {
    if x >= T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::constraint(format!("{name} >= 0 (got {x})")))
    }
}

fn powu<T: Scalar>(base: T, exp: u64) -> T {
    match i32::try_from(exp) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(T::from_u64(exp).unwrap_or_else(T::max_value)),
    }
}

/// Evaluates the excess-loss bound of one step-size regime.
///
/// The constraints of each regime are enforced and reported by name:
/// `η ≤ 1/μ` (constant), a log argument `2Tμ²ε⁰/(βσ²) > 1` together with the
/// derived `η ≤ 1/μ` (horizon-dependent) and `C > 1` (decreasing).
pub fn table1_bound<T: Scalar>(
    regime: BoundRegime,
    beta: T,
    mu: T,
    eps0: T,
    sigma_suf_sq: T,
    horizon: u64,
    eta_or_c: T,
) -> Result<BoundEvaluation<T>> {
    positive("beta", beta)?;
    positive("mu", mu)?;
    non_negative("eps0", eps0)?;
    if !(sigma_suf_sq >= T::zero()) {
        return Err(Error::constraint(format!("sigma_suf_sq >= 0 (got {sigma_suf_sq})")));
    }
    if mu > beta {
        return Err(Error::constraint(format!("mu <= beta (got mu={mu}, beta={beta})")));
    }
    let two = T::two();
    let t = T::from_u64(horizon).unwrap_or_else(T::max_value);
    let mut inputs = BoundInputs { beta, mu, eps0, sigma_suf_sq, horizon, eta_or_c };
    let (bias, variance, bound) = match regime {
        BoundRegime::Constant => {
            positive("eta", eta_or_c)?;
            if eta_or_c * mu > T::one() {
                return Err(Error::constraint(format!("eta <= 1/mu (got eta={eta_or_c}, 1/mu={})", T::one() / mu)));
            }
            let bias = powu(T::one() - eta_or_c * mu, horizon) * eps0;
            let variance = if sigma_suf_sq == T::zero() {
                T::zero()
            } else {
                eta_or_c * beta * sigma_suf_sq / (two * mu)
            };
            (bias, variance, bias + variance)
        }
        BoundRegime::HorizonDependent => {
            if horizon == 0 {
                return Err(Error::constraint("T >= 1 for the horizon-dependent step"));
            }
            positive("sigma_suf_sq", sigma_suf_sq)?;
            positive("eps0", eps0)?;
            let arg = two * t * mu * mu * eps0 / (beta * sigma_suf_sq);
            if !(arg > T::one()) {
                return Err(Error::constraint(format!("2 T mu^2 eps0 / (beta sigma_suf^2) > 1 (got {arg})")));
            }
            let eta = arg.ln() / (mu * t);
            if eta * mu > T::one() {
                return Err(Error::constraint(format!(
                    "horizon-dependent eta <= 1/mu (got eta={eta}, 1/mu={})",
                    T::one() / mu
                )));
            }
            inputs.eta_or_c = eta;
            let scale = beta * sigma_suf_sq / (two * mu * mu * t);
            let log_term = (two * t * mu * mu * eps0 / sigma_suf_sq).ln();
            (scale * log_term, scale, scale * (log_term + T::one()))
        }
        BoundRegime::Decreasing => {
            if !(eta_or_c > T::one()) || !eta_or_c.is_finite() {
                return Err(Error::constraint(format!("C > 1 (got {eta_or_c})")));
            }
            if horizon == 0 {
                return Err(Error::constraint("T >= 1 for the decreasing step"));
            }
            let c = eta_or_c;
            let variance = beta * sigma_suf_sq * c * c / (two * mu * mu * (c - T::one())) / t;
            let bias = eps0 / t;
            (bias, variance, variance.max(bias))
        }
    };
    Ok(BoundEvaluation { regime, bound_at_t: bound, bias, variance, inputs })
}

/// Iterations needed by the decreasing schedule to reach `eps`:
/// `⌈βσ²_suf 𝒞 / (2μ²ε)⌉` with `𝒞 = C²/(C − 1)`. Saturates at `u64::MAX`.
pub fn sample_complexity<T: Scalar>(eps: T, beta: T, mu: T, sigma_suf_sq: T, c: T) -> Result<u64> {
    positive("eps", eps)?;
    positive("beta", beta)?;
    positive("mu", mu)?;
    if !(sigma_suf_sq >= T::zero()) {
        return Err(Error::constraint(format!("sigma_suf_sq >= 0 (got {sigma_suf_sq})")));
    }
    if !(c > T::one()) || !c.is_finite() {
        return Err(Error::constraint(format!("C > 1 (got {c})")));
    }
    let cc = c * c / (c - T::one());
    let t = (beta * sigma_suf_sq * cc / (T::two() * mu * mu * eps)).ceil();
    Ok(t.to_u64().unwrap_or(u64::MAX))
}

/// `2 √(2 ε⁰ β σ²_suf / T)` bound on the average squared gradient norm
/// without strong convexity.
pub fn nonconvex_rate_bound<T: Scalar>(eps0: T, beta: T, sigma_suf_sq: T, horizon: u64) -> Result<T> {
    if horizon == 0 {
        return Err(Error::constraint("T >= 1"));
    }
    non_negative("eps0", eps0)?;
    positive("beta", beta)?;
    if !(sigma_suf_sq >= T::zero()) {
        return Err(Error::constraint(format!("sigma_suf_sq >= 0 (got {sigma_suf_sq})")));
    }
    let t = T::from_u64(horizon).unwrap_or_else(T::max_value);
    Ok(T::two() * (T::two() * eps0 * beta * sigma_suf_sq / t).sqrt())
}
