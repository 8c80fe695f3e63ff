use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::scalar::Scalar;

/// Right-hand side of the one-step descent bound
/// `(η/2) Σ_k α_k (‖∇R_k − ∇R_i‖² − G) + ηβ Σ_k σ_k² α_k²`.
///
/// `grads` are the exact gradients of every client at `θ_i^{t−1}` and
/// `grad_sq_term` is the `G` term: either `‖∇R_i(θ_i^{t−1})‖²` or the
/// expected `‖∇R_i(θ_i^t)‖²` at the new iterate. Requires `η < 1/(β Σ α_k)`.
pub fn descent_bound_rhs<T: Scalar>(
    eta: T,
    alpha: &[T],
    grads: &[Vector<T>],
    focal: usize,
    grad_sq_term: T,
    sigmas: &[T],
    beta: T,
) -> Result<T> {
    let n = alpha.len();
    if grads.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: grads.len() });
    }
    if sigmas.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: sigmas.len() });
    }
    if focal >= n {
        return Err(Error::invalid(format!("focal client {focal} out of range")));
    }
    if alpha.iter().any(|&a| !(a >= T::zero())) {
        return Err(Error::invalid("weights must be non-negative"));
    }
    if !(eta > T::zero()) || !(beta > T::zero()) {
        return Err(Error::invalid("eta and beta must be positive"));
    }
    let mass: T = alpha.iter().copied().sum();
    if !(eta * beta * mass < T::one()) {
        return Err(Error::constraint(format!(
            "eta < 1/(beta * sum alpha) (got eta={eta}, limit={})",
            T::one() / (beta * mass)
        )));
    }
    let own = &grads[focal];
    let mut drift = T::zero();
    let mut noise = T::zero();
    for ((&a, g), &s) in alpha.iter().zip(grads).zip(sigmas) {
        if a == T::zero() {
            continue;
        }
        drift = drift + a * (g.dist_sq(own)? - grad_sq_term);
        noise = noise + s * s * a * a;
    }
    Ok(eta / T::two() * drift + eta * beta * noise)
}
