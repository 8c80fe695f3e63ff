//! Collaboration weights of the All-for-one update.
//!
//! For a focal client `i`, each peer `k` gets a similarity ratio
//! `r_ik = (1 − ‖∇R_k − ∇R_i‖² / ‖∇R_i‖²)₊` evaluated at `θ_i`, and a weight
//! `α_ik = φ(r_ik) σ²_{i,ψ} / σ_k²` where `ψ(x) = x φ(x)` and
//! `σ_{i,f}⁻² = Σ_k f(r_ik) / σ_k²`.
//!
//! This normalisation makes `Σ_k α_ik (‖∇R_k − ∇R_i‖² − ‖∇R_i‖²) = −‖∇R_i‖²`
//! for every admissible ratio vector, which is what turns the generic descent
//! bound into a plain SGD bound with effective variance `σ²_{i,ψ}`.

mod criterion;
mod estimator;
mod ratios;
mod weights;

pub use criterion::{Criterion, DEFAULT_BINARY_LAMBDA};
pub use estimator::{estimate_ratios, RatioEstimate};
pub use ratios::{exact_ratios, similarity_ratio, SimilarityRatios};
pub use weights::{compute_weights, step_size_ratio_bounds, CollaborationState};
