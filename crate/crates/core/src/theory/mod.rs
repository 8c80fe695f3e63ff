//! Closed-form theory objects used to cross-check simulations: sufficient
//! clusters, excess-loss bounds for the three step-size regimes, sample
//! complexity, the non-convex rate and the one-step descent bound.

mod bounds;
mod cluster;
mod descent;

pub use bounds::{nonconvex_rate_bound, sample_complexity, table1_bound, BoundEvaluation, BoundInputs, BoundRegime};
pub use cluster::{
    inclusion_check, limit_sufficient_variance, nesting_check, sufficient_cluster, sufficient_cluster_sweep,
    NestingReport, NestingViolation, SufficientClusterReport, ThresholdExponent,
};
pub use descent::descent_bound_rhs;
