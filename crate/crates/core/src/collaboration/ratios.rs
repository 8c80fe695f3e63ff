use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::scalar::Scalar;

/// Ratios `r_ik` for one focal client `i`, indexed by peer `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRatios<T> {
    focal: usize,
    values: Vec<T>,
}

impl<T: Scalar> SimilarityRatios<T> {
    pub fn new(focal: usize, values: Vec<T>) -> Result<Self> {
        if focal >= values.len() {
            return Err(Error::invalid(format!("focal client {focal} out of range for {} ratios", values.len())));
        }
        if values.iter().any(|&r| !(r >= T::zero() && r <= T::one())) {
            return Err(Error::invalid("similarity ratios must lie in [0, 1]"));
        }
        Ok(Self { focal, values })
    }

    pub fn focal(&self) -> usize {
        self.focal
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `(1 − diff_sq / own_sq)₊`, with the zero-gradient convention handled by callers.
pub(crate) fn clipped_ratio<T: Scalar>(diff_sq: T, own_sq: T) -> T {
    (T::one() - diff_sq / own_sq).max(T::zero()).min(T::one())
}

/// `r_ik = (1 − ‖g_k − g_i‖² / ‖g_i‖²)₊`.
///
/// When `g_i = 0` the ratio is 1 if `g_k = 0` as well and 0 otherwise: a client
/// sitting at its optimum only gains bias from collaborating.
pub fn similarity_ratio<T: Scalar>(grad_i: &Vector<T>, grad_k: &Vector<T>) -> Result<T> {
    let diff_sq = grad_i.dist_sq(grad_k)?;
    let own_sq = grad_i.norm_sq();
    if own_sq == T::zero() {
        return Ok(if grad_k.norm_sq() == T::zero() { T::one() } else { T::zero() });
    }
    Ok(clipped_ratio(diff_sq, own_sq))
}

/// Exact ratios of `focal` against every client, from gradients all evaluated
/// at the focal client's parameters.
pub fn exact_ratios<T: Scalar>(focal: usize, grads_at_focal: &[Vector<T>]) -> Result<SimilarityRatios<T>> {
    let own = grads_at_focal
        .get(focal)
        .ok_or_else(|| Error::invalid(format!("focal client {focal} out of range")))?;
    let values = grads_at_focal.iter().map(|g| similarity_ratio(own, g)).collect::<Result<_>>()?;
    SimilarityRatios::new(focal, values)
}
