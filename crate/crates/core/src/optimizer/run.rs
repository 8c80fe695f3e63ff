use crate::collaboration::{compute_weights, estimate_ratios, exact_ratios, CollaborationState, SimilarityRatios};
use crate::error::{Error, Result};
use crate::numerics::{Purpose, RngStream, Vector};
use crate::objectives::{ClientObjective, Objective, ObjectiveConstants};
use crate::optimizer::{afo_step, fedavg_round, AlgorithmSpec, Estimation, StepSchedule};
use crate::scalar::Scalar;

/// A loss above this value aborts the run.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Noise levels below this are floored when computing adaptive weights.
const SIGMA_FLOOR: f64 = 1e-12;

/// A client population with starting points, cluster labels and constants.
#[derive(Debug, Clone)]
pub struct Problem<T, O = ClientObjective<T>> {
    objectives: Vec<O>,
    labels: Vec<usize>,
    theta0: Vec<Vector<T>>,
    constants: Vec<ObjectiveConstants<T>>,
}

impl<T: Scalar, O: Objective<T>> Problem<T, O> {
    pub fn new(
        objectives: Vec<O>,
        labels: Vec<usize>,
        theta0: Vec<Vector<T>>,
        constants: Vec<ObjectiveConstants<T>>,
    ) -> Result<Self> {
        let n = objectives.len();
        if n == 0 {
            return Err(Error::invalid("a problem needs at least one client"));
        }
        for len in [labels.len(), theta0.len(), constants.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        let d = objectives[0].dim();
        for (o, t) in objectives.iter().zip(&theta0) {
            if o.dim() != d || t.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: o.dim().min(t.len()) });
            }
        }
        Ok(Self { objectives, labels, theta0, constants })
    }

    /// Computes every client's constants at its starting point, drawing any
    /// probes from the client's `Probe` stream of `seed`.
    pub fn with_estimated_constants(
        objectives: Vec<O>,
        labels: Vec<usize>,
        theta0: Vec<Vector<T>>,
        seed: u64,
    ) -> Result<Self> {
        let constants = objectives
            .iter()
            .zip(&theta0)
            .enumerate()
            .map(|(k, (o, t))| o.constants(t, &mut RngStream::for_client(seed, k, Purpose::Probe)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(objectives, labels, theta0, constants)
    }

    pub fn len(&self) -> usize {
        self.objectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objectives.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.objectives[0].dim()
    }

    pub fn objectives(&self) -> &[O] {
        &self.objectives
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn theta0(&self) -> &[Vector<T>] {
        &self.theta0
    }

    pub fn constants(&self) -> &[ObjectiveConstants<T>] {
        &self.constants
    }

    pub fn sigmas(&self) -> Vec<T> {
        self.constants.iter().map(|c| c.sigma).collect()
    }

    /// Ground-truth clusters as lists of members, ordered by label.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut labels: Vec<usize> = self.labels.clone();
        labels.sort_unstable();
        labels.dedup();
        labels
            .iter()
            .map(|&l| (0..self.len()).filter(|&k| self.labels[k] == l).collect())
            .collect()
    }
}

/// Metrics of one client after one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow<T> {
    pub iter: u64,
    pub client: usize,
    pub excess_loss: T,
    /// Expected loss under the true data distribution; equal to the excess
    /// loss for the objectives in this crate.
    pub test_loss: T,
    pub grad_sq_norm: T,
    pub active_set_size: usize,
    pub weight_mass: T,
    pub sigma_eff_sq: T,
    pub in_cluster_weight: T,
    pub out_cluster_weight: T,
    /// Gradient evaluations spent on this client's updates so far, ratio
    /// estimation included.
    pub grad_evals_total: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    Diverged { iter: u64, client: usize, loss: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord<T> {
    pub algo: String,
    pub schedule: String,
    pub seed: u64,
    pub iterations: u64,
    pub log_every: u64,
    pub n_clients: usize,
    pub initial_excess_loss: Vec<T>,
    pub rows: Vec<RunRow<T>>,
    pub status: RunStatus,
    /// Steps where the scheduled step exceeded `(σ²_φ/σ²_ψ)/β_i`.
    pub cap_activations: u64,
    /// Weight computations that found no admissible collaborator.
    pub fallbacks: u64,
    /// Largest realized `η β_i σ²_ψ/σ²_φ`; at most 1 up to rounding.
    pub max_cap_utilization: T,
}

impl<T: Scalar> RunRecord<T> {
    pub fn diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }

    /// Rows of the last logged iteration.
    pub fn final_rows(&self) -> &[RunRow<T>] {
        let last = self.rows.last().map(|r| r.iter);
        let start = self.rows.iter().position(|r| Some(r.iter) == last).unwrap_or(self.rows.len());
        &self.rows[start..]
    }

    /// Mean over clients of the test loss at a logged iteration.
    pub fn mean_test_loss_at(&self, iter: u64) -> Option<T> {
        let rows: Vec<&RunRow<T>> = self.rows.iter().filter(|r| r.iter == iter).collect();
        if rows.is_empty() {
            return None;
        }
        Some(rows.iter().map(|r| r.test_loss).sum::<T>() / T::from_usize_lossy(rows.len()))
    }
}

/// What an observer sees right before client `client` takes step `iter`.
#[derive(Debug)]
pub struct StepObservation<'a, T> {
    pub iter: u64,
    pub client: usize,
    pub theta_prev: &'a Vector<T>,
    pub weights: &'a CollaborationState<T>,
    pub eta: T,
}

/// Runs `spec` on every client for `iterations` synchronous rounds.
pub fn run_experiment<T: Scalar, O: Objective<T>>(
    spec: &AlgorithmSpec<T>,
    problem: &Problem<T, O>,
    schedule: &StepSchedule<T>,
    iterations: u64,
    log_every: u64,
    seed: u64,
) -> Result<RunRecord<T>> {
    run_experiment_with_observer(spec, problem, schedule, iterations, log_every, seed, |_| {})
}

fn cluster_weights<T: Scalar>(alpha: &[T], labels: &[usize], focal: usize) -> (T, T) {
    let (mut s_in, mut n_in, mut s_out, mut n_out) = (T::zero(), 0usize, T::zero(), 0usize);
    for (k, &a) in alpha.iter().enumerate() {
        if k == focal {
            continue;
        }
        if labels[k] == labels[focal] {
            s_in = s_in + a;
            n_in += 1;
        } else {
            s_out = s_out + a;
            n_out += 1;
        }
    }
    let mean = |s: T, c: usize| if c == 0 { T::zero() } else { s / T::from_usize_lossy(c) };
    (mean(s_in, n_in), mean(s_out, n_out))
}

/// [`run_experiment`] calling `observer` before every client update.
///
/// All clients read the previous iterate before any of them is updated. Each
/// client draws its update gradients from its own `Step` stream and its ratio
/// estimates from its own `Estimate` stream, so the record depends only on
/// the inputs and `seed`.
pub fn run_experiment_with_observer<T: Scalar, O: Objective<T>>(
    spec: &AlgorithmSpec<T>,
    problem: &Problem<T, O>,
    schedule: &StepSchedule<T>,
    iterations: u64,
    log_every: u64,
    seed: u64,
    mut observer: impl FnMut(&StepObservation<'_, T>),
) -> Result<RunRecord<T>> {
    let n = problem.len();
    if iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    if log_every == 0 {
        return Err(Error::invalid("log_every must be at least 1"));
    }
    spec.validate(n)?;
    let consts = problem.constants();
    let max_mu = consts.iter().map(|c| c.mu).fold(T::zero(), T::max);
    schedule.validate(max_mu)?;

    let objs = problem.objectives();
    let sigmas = problem.sigmas();
    let floor = T::lit(SIGMA_FLOOR);
    let weight_sigmas: Vec<T> = sigmas.iter().map(|&s| s.max(floor)).collect();
    let labels = problem.labels();
    let threshold = T::lit(DIVERGENCE_THRESHOLD);

    let mut thetas: Vec<Vector<T>> = problem.theta0().to_vec();
    let mut step_streams: Vec<RngStream> =
        (0..n).map(|i| RngStream::for_client(seed, i, Purpose::Step)).collect();
    let mut est_streams: Vec<RngStream> =
        (0..n).map(|i| RngStream::for_client(seed, i, Purpose::Estimate)).collect();

    let fixed: Option<Vec<CollaborationState<T>>> = match spec {
        AlgorithmSpec::Local => Some((0..n).map(|i| CollaborationState::local(i, n, sigmas[i])).collect()),
        AlgorithmSpec::OracleAllForOne { clusters } => Some(
            (0..n)
                .map(|i| {
                    let members = clusters.iter().find(|c| c.contains(&i)).expect("validated partition");
                    CollaborationState::uniform(i, members, &sigmas)
                })
                .collect::<Result<_>>()?,
        ),
        AlgorithmSpec::FedAvg { .. } => {
            let all: Vec<usize> = (0..n).collect();
            Some((0..n).map(|i| CollaborationState::uniform(i, &all, &sigmas)).collect::<Result<_>>()?)
        }
        AlgorithmSpec::AllForOne { .. } => None,
    };
    let mut states: Vec<CollaborationState<T>> =
        fixed.unwrap_or_else(|| (0..n).map(|i| CollaborationState::local(i, n, sigmas[i])).collect());

    let initial_excess_loss = objs
        .iter()
        .zip(&thetas)
        .map(|(o, t)| o.excess_loss(t))
        .collect::<Result<Vec<T>>>()?;
    let mut record = RunRecord {
        algo: spec.label(),
        schedule: schedule.to_string(),
        seed,
        iterations,
        log_every,
        n_clients: n,
        initial_excess_loss,
        rows: Vec::new(),
        status: RunStatus::Completed,
        cap_activations: 0,
        fallbacks: 0,
        max_cap_utilization: T::zero(),
    };
    let mut evals = vec![0u64; n];

    for t in 1..=iterations {
        let scheduled = schedule.eta(t);
        let mut next = Vec::with_capacity(n);
        match spec {
            AlgorithmSpec::FedAvg { local_steps } => {
                let etas: Vec<T> = consts
                    .iter()
                    .map(|c| {
                        let cap = T::one() / c.beta;
                        if scheduled > cap {
                            record.cap_activations += 1;
                        }
                        let eta = scheduled.min(cap);
                        record.max_cap_utilization = record.max_cap_utilization.max(eta * c.beta);
                        eta
                    })
                    .collect();
                for i in 0..n {
                    observer(&StepObservation { iter: t, client: i, theta_prev: &thetas[i], weights: &states[i], eta: etas[i] });
                }
                let global = fedavg_round(&thetas[0], objs, &etas, *local_steps, &mut step_streams)?;
                for e in evals.iter_mut() {
                    *e += *local_steps as u64;
                }
                next.resize(n, global);
            }
            _ => {
                for i in 0..n {
                    if let AlgorithmSpec::AllForOne { criterion, estimation, inner_iterations } = spec {
                        if (t - 1) % *inner_iterations as u64 == 0 {
                            let ratios: SimilarityRatios<T> = match estimation {
                                Estimation::Exact => {
                                    let grads = objs.iter().map(|o| o.gradient(&thetas[i])).collect::<Result<Vec<_>>>()?;
                                    evals[i] += n as u64;
                                    exact_ratios(i, &grads)?
                                }
                                Estimation::Stochastic { b_alpha } => {
                                    let est = estimate_ratios(i, &thetas[i], objs, *b_alpha, &mut est_streams[i])?;
                                    evals[i] += est.gradient_evaluations as u64;
                                    est.ratios
                                }
                            };
                            states[i] = match compute_weights(&ratios, &weight_sigmas, criterion) {
                                Ok(s) => s,
                                Err(Error::NoAdmissibleCollaborator) => {
                                    record.fallbacks += 1;
                                    log::debug!("client {i} iteration {t}: no admissible collaborator, local step");
                                    CollaborationState::local(i, n, weight_sigmas[i])
                                }
                                Err(e) => return Err(e),
                            };
                        }
                    }
                    let state = &states[i];
                    let beta = consts[i].beta;
                    let cap = state.step_ratio() / beta;
                    if scheduled > cap {
                        record.cap_activations += 1;
                    }
                    let eta = scheduled.min(cap);
                    record.max_cap_utilization = record.max_cap_utilization.max(eta * beta / state.step_ratio());
                    observer(&StepObservation { iter: t, client: i, theta_prev: &thetas[i], weights: state, eta });
                    next.push(afo_step(&thetas[i], state, objs, eta, &mut step_streams[i])?);
                    evals[i] += state.active_set.len() as u64;
                }
            }
        }
        thetas = next;

        let log_now = t % log_every == 0;
        let mut rows = Vec::new();
        for i in 0..n {
            let loss = objs[i].excess_loss(&thetas[i])?;
            if !loss.is_finite() || loss > threshold {
                record.status = RunStatus::Diverged { iter: t, client: i, loss: loss.to_f64_lossy() };
                log::warn!("{} diverged at iteration {t} on client {i} (loss {loss})", record.algo);
                return Ok(record);
            }
            if log_now {
                let state = &states[i];
                let (in_w, out_w) = cluster_weights(&state.alpha, labels, i);
                rows.push(RunRow {
                    iter: t,
                    client: i,
                    excess_loss: loss,
                    test_loss: loss,
                    grad_sq_norm: objs[i].gradient(&thetas[i])?.norm_sq(),
                    active_set_size: state.active_set.len(),
                    weight_mass: state.weight_mass(),
                    sigma_eff_sq: state.sigma_eff_sq,
                    in_cluster_weight: in_w,
                    out_cluster_weight: out_w,
                    grad_evals_total: evals[i],
                });
            }
        }
        record.rows.extend(rows);
    }
    Ok(record)
}
