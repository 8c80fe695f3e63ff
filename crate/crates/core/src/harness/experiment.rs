use crate::collaboration::Criterion;
use crate::error::{Error, Result};
use crate::harness::config::{
    AlgorithmConfig, CriterionKind, EstimationKind, ExperimentConfig, ObjectiveConfig, ScheduleConfig,
    SufficientClusterConfig,
};
use crate::numerics::{sample_orthogonal_matrix, standard_normal_vector, Matrix, Purpose, RngStream, Vector};
use crate::objectives::{heterogeneity_bounds, ClientObjective, LsrObjective, Objective, QuadraticObjective};
use crate::optimizer::{AlgorithmSpec, Estimation, Problem, StepSchedule};
use crate::theory::{sufficient_cluster_sweep, SufficientClusterReport, ThresholdExponent};

/// Builds the client population of `cfg` for one seed. Problem draws come
/// from the `Problem` stream of client 0, noise-bound probes from each
/// client's `Probe` stream.
pub fn build_problem(cfg: &ExperimentConfig, seed: u64) -> Result<Problem<f64>> {
    let objective = cfg.objective.as_ref().ok_or_else(|| Error::Config("objective: missing".into()))?;
    let mut stream = RngStream::for_client(seed, 0, Purpose::Problem);
    let (objs, labels): (Vec<ClientObjective<f64>>, Vec<usize>) = match objective {
        ObjectiveConfig::LsrTwoCluster { clients, dim, batch_size, noise_probes } => {
            let centers: Vec<Vector<f64>> = (0..2).map(|_| standard_normal_vector(&mut stream, *dim)).collect();
            let objs = (0..*clients)
                .map(|k| {
                    let mut o = LsrObjective::new(Matrix::identity(*dim), centers[k % 2].clone(), *batch_size)?;
                    if let Some(p) = noise_probes {
                        o = o.with_noise_probes(*p);
                    }
                    Ok(o.into())
                })
                .collect::<Result<_>>()?;
            (objs, (0..*clients).map(|k| k % 2).collect())
        }
        ObjectiveConfig::QuadraticTwoCluster { clients, dim, curvature, rotate, center_scale, noise_sigma } => {
            let eigs = curvature.clone().unwrap_or_else(|| vec![1.0; *dim]);
            let mut a = Matrix::from_diagonal(&eigs);
            if *rotate {
                let q = sample_orthogonal_matrix(&mut stream, *dim)?;
                a = q.matmul(&a)?.matmul(&q.transpose())?;
                a = Matrix::from_fn(*dim, *dim, |r, c| 0.5 * (a[(r, c)] + a[(c, r)]));
            }
            let centers: Vec<Vector<f64>> = (0..2)
                .map(|_| standard_normal_vector(&mut stream, *dim).scaled(*center_scale))
                .collect();
            let objs = (0..*clients)
                .map(|k| Ok(QuadraticObjective::new(a.clone(), centers[k % 2].scaled(-1.0), *noise_sigma)?.into()))
                .collect::<Result<_>>()?;
            (objs, (0..*clients).map(|k| k % 2).collect())
        }
        ObjectiveConfig::Quadratic { clients } => {
            let objs = clients
                .iter()
                .map(|c| {
                    let a = Matrix::from_rows(c.a.clone())?;
                    Ok(QuadraticObjective::new(a, Vector::from(c.xi.clone()), c.noise_sigma)?.into())
                })
                .collect::<Result<_>>()?;
            (objs, clients.iter().map(|c| c.cluster).collect())
        }
    };
    let d = objs.first().map_or(0, |o: &ClientObjective<f64>| o.dim());
    let theta0 = vec![Vector::zeros(d); objs.len()];
    Problem::with_estimated_constants(objs, labels, theta0, seed)
}

fn criterion_for(kind: CriterionKind, lambda: Option<f64>, cfg: &ExperimentConfig) -> Result<Criterion<f64>> {
    match kind {
        CriterionKind::Continuous => Ok(Criterion::Continuous),
        CriterionKind::Binary => {
            let l = lambda
                .or(cfg.criterion.as_ref().map(|c| c.lambda))
                .ok_or_else(|| Error::Config("criterion.lambda: required by the binary criterion".into()))?;
            Criterion::binary(l)
        }
    }
}

pub fn build_algorithm(algo: &AlgorithmConfig, cfg: &ExperimentConfig, problem: &Problem<f64>) -> Result<AlgorithmSpec<f64>> {
    Ok(match algo {
        AlgorithmConfig::AllForOne { criterion, estimation, b_alpha, lambda, inner_iterations, .. } => {
            AlgorithmSpec::AllForOne {
                criterion: criterion_for(*criterion, *lambda, cfg)?,
                estimation: match estimation {
                    EstimationKind::Exact => Estimation::Exact,
                    EstimationKind::Stochastic => Estimation::Stochastic { b_alpha: *b_alpha },
                },
                inner_iterations: inner_iterations.unwrap_or(cfg.inner_iterations),
            }
        }
        AlgorithmConfig::Oracle { .. } => AlgorithmSpec::OracleAllForOne { clusters: problem.clusters() },
        AlgorithmConfig::Local { .. } => AlgorithmSpec::Local,
        AlgorithmConfig::Fedavg { local_steps, .. } => AlgorithmSpec::FedAvg { local_steps: *local_steps },
    })
}

pub fn build_schedule(cfg: &ExperimentConfig, problem: &Problem<f64>) -> Result<StepSchedule<f64>> {
    let sched = cfg.schedule.as_ref().ok_or_else(|| Error::Config("schedule: missing".into()))?;
    let consts = problem.constants();
    let beta_max = consts.iter().map(|c| c.beta).fold(0.0, f64::max);
    let mu_min = consts.iter().map(|c| c.mu).fold(f64::INFINITY, f64::min);
    let schedule = match sched {
        ScheduleConfig::Constant { eta, eta_beta } => StepSchedule::Constant {
            eta: match (eta, eta_beta) {
                (Some(e), _) => *e,
                (None, Some(f)) => f / beta_max,
                (None, None) => return Err(Error::Config("schedule: constant needs eta or eta_beta".into())),
            },
        },
        ScheduleConfig::Decreasing { c, mu } => {
            let mu = mu.unwrap_or(mu_min);
            if !(mu > 0.0) {
                return Err(Error::Config("schedule.mu: the population is not strongly convex; set mu".into()));
            }
            StepSchedule::Decreasing { c: *c, mu }
        }
        ScheduleConfig::HorizonDependent { eps0, sigma_suf_sq, mu, beta } => {
            let init_max = problem
                .objectives()
                .iter()
                .zip(problem.theta0())
                .map(|(o, t)| o.excess_loss(t))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let sigma_max = consts.iter().map(|c| c.sigma * c.sigma).fold(0.0, f64::max);
            StepSchedule::HorizonDependent {
                horizon: cfg.iterations,
                mu: mu.unwrap_or(mu_min),
                beta: beta.unwrap_or(beta_max),
                eps0: eps0.unwrap_or(init_max),
                sigma_suf_sq: sigma_suf_sq.unwrap_or(sigma_max),
            }
        }
    };
    let mu_max = consts.iter().map(|c| c.mu).fold(0.0, f64::max);
    schedule.validate(mu_max).map_err(|e| Error::Config(format!("schedule: {e}")))?;
    Ok(schedule)
}

/// `points` values log-spaced from `lo` to `hi`, ascending.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..points)
        .map(|j| {
            if j == 0 {
                lo
            } else if j == points - 1 {
                hi
            } else {
                10f64.powf(a + (b - a) * j as f64 / (points - 1) as f64)
            }
        })
        .collect()
}

/// One sufficient-cluster curve per heterogeneity level `v`.
#[derive(Debug, Clone)]
pub struct SweepCurve {
    pub v: f64,
    pub reports: Vec<SufficientClusterReport<f64>>,
}

/// Sufficient-cluster sizes over an ascending precision grid for clients with
/// identity curvature and minimizers `θ* + v z_k`, `z_k ~ N(0, I)` drawn from
/// client `k`'s `Problem` stream. The same `z_k` are reused for every `v`.
pub fn sufficient_cluster_curves(
    sc: &SufficientClusterConfig,
    seed: u64,
    exponent: ThresholdExponent,
) -> Result<Vec<SweepCurve>> {
    let z: Vec<Vector<f64>> = (0..sc.clients)
        .map(|k| standard_normal_vector(&mut RngStream::for_client(seed, k, Purpose::Problem), sc.dim))
        .collect();
    let crit = match sc.lambda {
        Some(l) => Criterion::binary(l)?,
        None => Criterion::Continuous,
    };
    let grid = log_grid(sc.eps_min, sc.eps_max, sc.points);
    let sigmas = vec![sc.sigma; sc.clients];
    sc.v.iter()
        .map(|&v| {
            let objs: Vec<QuadraticObjective<f64>> = z
                .iter()
                .map(|zk| QuadraticObjective::new(Matrix::identity(sc.dim), zk.scaled(-v), sc.sigma))
                .collect::<Result<_>>()?;
            let hm = heterogeneity_bounds(&objs)?;
            let mu = objs[sc.focal].constants(&Vector::zeros(sc.dim), &mut RngStream::for_client(seed, 0, Purpose::Probe))?.mu;
            let reports = sufficient_cluster_sweep(sc.focal, &grid, &hm, mu, &sigmas, &crit, exponent)?;
            Ok(SweepCurve { v, reports })
        })
        .collect()
}
