//! The training loop: adaptive All-for-one, oracle All-for-one, Local SGD and
//! FedAvg, step-size schedules and per-iteration metric capture.

mod algorithm;
mod run;
mod schedule;

pub use algorithm::{afo_step, fedavg_round, oracle_afo_step, AlgorithmSpec, Estimation};
pub use run::{
    run_experiment, run_experiment_with_observer, Problem, RunRecord, RunRow, RunStatus, StepObservation,
    DIVERGENCE_THRESHOLD,
};
pub use schedule::StepSchedule;
