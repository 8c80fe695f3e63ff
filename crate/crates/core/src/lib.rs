//! Online personalized decentralized learning with the All-for-one
//! weighted-gradient-aggregation rule.
//!
//! Every client `i` keeps its own model and updates it with a weighted sum of
//! stochastic gradients evaluated *at its own parameters* by all the clients it
//! collaborates with. The weights are derived on the fly from gradient
//! similarity ratios, so that clients whose gradients agree with the focal
//! client's gradient reduce its variance while dissimilar clients are dropped.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: dense vectors and matrices, small symmetric eigen solvers and
//!   seedable per-client random streams.
//! * [`objectives`]: quadratic and online least-squares client losses with exact
//!   and stochastic gradient oracles, smoothness constants and heterogeneity bounds.
//! * [`collaboration`]: criterion functions, similarity ratios, collaboration
//!   weights and their stochastic estimator.
//! * [`theory`]: sufficient clusters, excess-loss bounds, sample complexity and the
//!   one-step descent bound.
//! * [`optimizer`]: the training loop with All-for-one, oracle All-for-one,
//!   Local SGD and FedAvg.
//! * [`harness`]: configuration, CSV/manifest persistence and the experiment
//!   generators used by the `allforone` binary.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the harness uses.

pub mod collaboration;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod objectives;
pub mod optimizer;
pub mod scalar;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Vector = numerics::Vector<f64>;
pub type Matrix = numerics::Matrix<f64>;
pub type QuadraticObjective = objectives::QuadraticObjective<f64>;
pub type LsrObjective = objectives::LsrObjective<f64>;
pub type ClientObjective = objectives::ClientObjective<f64>;
pub type ObjectiveConstants = objectives::ObjectiveConstants<f64>;
pub type HeterogeneityMatrix = objectives::HeterogeneityMatrix<f64>;
pub type Criterion = collaboration::Criterion<f64>;
pub type SimilarityRatios = collaboration::SimilarityRatios<f64>;
pub type CollaborationState = collaboration::CollaborationState<f64>;
pub type SufficientClusterReport = theory::SufficientClusterReport<f64>;
pub type BoundEvaluation = theory::BoundEvaluation<f64>;
pub type AlgorithmSpec = optimizer::AlgorithmSpec<f64>;
pub type StepSchedule = optimizer::StepSchedule<f64>;
pub type RunRecord = optimizer::RunRecord<f64>;
