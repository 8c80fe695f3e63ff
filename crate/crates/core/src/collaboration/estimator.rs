use crate::collaboration::ratios::clipped_ratio;
use crate::collaboration::SimilarityRatios;
use crate::error::{Error, Result};
use crate::numerics::{RngStream, Vector};
use crate::objectives::Objective;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct RatioEstimate<T> {
    pub ratios: SimilarityRatios<T>,
    /// The focal client's averaged gradient was exactly zero; every peer ratio
    /// was set to 0 and the self ratio to 1.
    pub degenerate: bool,
    pub gradient_evaluations: usize,
}

/// Stochastic similarity ratios from `b_alpha` extra gradients per client.
///
/// With `m_k` the mean of `b_alpha` fresh stochastic gradients of client `k`
/// at `theta`, `Z_ik = ‖m_i − m_k‖²`, `Z_i = ‖m_i‖²` and
/// `r̂_ik = (1 − Z_ik / Z_i)₊`. The self ratio is always 1 since `Z_ii = 0`.
///
/// Running means are used so that identical draws (noiseless oracles) average
/// to themselves exactly and the estimate matches the exact ratio bit for bit.
pub fn estimate_ratios<T: Scalar, O: Objective<T>>(
    focal: usize,
    theta: &Vector<T>,
    oracles: &[O],
    b_alpha: usize,
    stream: &mut RngStream,
) -> Result<RatioEstimate<T>> {
    if b_alpha == 0 {
        return Err(Error::invalid("b_alpha must be at least 1"));
    }
    if focal >= oracles.len() {
        return Err(Error::invalid(format!("focal client {focal} out of range")));
    }
    let n = oracles.len();
    let mut means = vec![Vector::zeros(theta.len()); n];
    for j in 0..b_alpha {
        let w = T::one() / T::from_usize_lossy(j + 1);
        for (k, oracle) in oracles.iter().enumerate() {
            let g = oracle.stochastic_gradient(theta, stream)?;
            let delta = g.try_sub(&means[k])?;
            means[k].axpy(w, &delta)?;
        }
    }
    let z_i = means[focal].norm_sq();
    let degenerate = z_i == T::zero();
    let values = (0..n)
        .map(|k| {
            if k == focal {
                Ok(T::one())
            } else if degenerate {
                Ok(T::zero())
            } else {
                Ok(clipped_ratio(means[focal].dist_sq(&means[k])?, z_i))
            }
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(RatioEstimate {
        ratios: SimilarityRatios::new(focal, values)?,
        degenerate,
        gradient_evaluations: n * b_alpha,
    })
}
