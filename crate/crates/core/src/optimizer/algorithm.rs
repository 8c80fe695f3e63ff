use crate::collaboration::{CollaborationState, Criterion};
use crate::error::{Error, Result};
use crate::numerics::{RngStream, Vector};
use crate::objectives::Objective;
use crate::scalar::Scalar;

/// How All-for-one obtains its similarity ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimation {
    /// Exact gradients of every client at the focal parameters.
    Exact,
    /// Means of `b_alpha` extra stochastic gradients per client.
    Stochastic { b_alpha: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmSpec<T> {
    AllForOne {
        criterion: Criterion<T>,
        estimation: Estimation,
        /// Updates between two weight re-estimations.
        inner_iterations: usize,
    },
    /// Uniform weights inside known clusters.
    OracleAllForOne { clusters: Vec<Vec<usize>> },
    Local,
    FedAvg { local_steps: usize },
}

impl<T: Scalar> AlgorithmSpec<T> {
    /// Short name used in the `algo` output column.
    pub fn label(&self) -> String {
        match self {
            AlgorithmSpec::AllForOne { criterion, estimation, .. } => match estimation {
                Estimation::Stochastic { .. } => format!("afo_{}", criterion.label()),
                Estimation::Exact => format!("afo_{}_exact", criterion.label()),
            },
            AlgorithmSpec::OracleAllForOne { .. } => "oracle".into(),
            AlgorithmSpec::Local => "local".into(),
            AlgorithmSpec::FedAvg { .. } => "fedavg".into(),
        }
    }

    /// Checks parameters against a population of `n` clients.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            AlgorithmSpec::AllForOne { estimation, inner_iterations, .. } => {
                if *inner_iterations == 0 {
                    return Err(Error::invalid("inner_iterations must be at least 1"));
                }
                if let Estimation::Stochastic { b_alpha: 0 } = estimation {
                    return Err(Error::invalid("b_alpha must be at least 1"));
                }
                Ok(())
            }
            AlgorithmSpec::OracleAllForOne { clusters } => {
                let mut seen = vec![false; n];
                for &k in clusters.iter().flatten() {
                    match seen.get_mut(k) {
                        None => return Err(Error::invalid(format!("oracle cluster member {k} out of range"))),
                        Some(true) => return Err(Error::invalid(format!("client {k} appears in two oracle clusters"))),
                        Some(s) => *s = true,
                    }
                }
                if let Some(k) = seen.iter().position(|s| !s) {
                    return Err(Error::invalid(format!("client {k} is in no oracle cluster")));
                }
                Ok(())
            }
            AlgorithmSpec::Local => Ok(()),
            AlgorithmSpec::FedAvg { local_steps } => {
                if *local_steps == 0 {
                    return Err(Error::invalid("local_steps must be at least 1"));
                }
                Ok(())
            }
        }
    }
}

/// One All-for-one update `θ − η Σ_k α_k g_k(θ)`.
///
/// Every client with a positive weight contributes one fresh stochastic
/// gradient at `theta`, drawn from `stream` in increasing client order.
pub fn afo_step<T: Scalar, O: Objective<T>>(
    theta: &Vector<T>,
    weights: &CollaborationState<T>,
    oracles: &[O],
    eta: T,
    stream: &mut RngStream,
) -> Result<Vector<T>> {
    if weights.alpha.len() != oracles.len() {
        return Err(Error::DimensionMismatch { expected: oracles.len(), found: weights.alpha.len() });
    }
    let mut next = theta.clone();
    for &k in &weights.active_set {
        let g = oracles[k].stochastic_gradient(theta, stream)?;
        next.axpy(-eta * weights.alpha[k], &g)?;
    }
    Ok(next)
}

/// All-for-one with uniform weights on the cluster containing `focal`.
pub fn oracle_afo_step<T: Scalar, O: Objective<T>>(
    focal: usize,
    theta: &Vector<T>,
    clusters: &[Vec<usize>],
    oracles: &[O],
    sigmas: &[T],
    eta: T,
    stream: &mut RngStream,
) -> Result<Vector<T>> {
    let cluster = clusters
        .iter()
        .find(|c| c.contains(&focal))
        .ok_or_else(|| Error::invalid(format!("client {focal} is in no oracle cluster")))?;
    let weights = CollaborationState::uniform(focal, cluster, sigmas)?;
    afo_step(theta, &weights, oracles, eta, stream)
}

/// One FedAvg round: every client runs `local_steps` SGD steps from `global`
/// with its own step size and stream, and the results are averaged uniformly.
pub fn fedavg_round<T: Scalar, O: Objective<T>>(
    global: &Vector<T>,
    oracles: &[O],
    etas: &[T],
    local_steps: usize,
    streams: &mut [RngStream],
) -> Result<Vector<T>> {
    let n = oracles.len();
    if n == 0 {
        return Err(Error::invalid("FedAvg needs at least one client"));
    }
    if etas.len() != n || streams.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: etas.len().min(streams.len()) });
    }
    let mut sum = Vector::zeros(global.len());
    for ((oracle, &eta), stream) in oracles.iter().zip(etas).zip(streams.iter_mut()) {
        let mut theta = global.clone();
        for _ in 0..local_steps {
            let g = oracle.stochastic_gradient(&theta, stream)?;
            theta.axpy(-eta, &g)?;
        }
        sum.axpy(T::one(), &theta)?;
    }
    Ok(sum.scaled(T::one() / T::from_usize_lossy(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Matrix, Purpose};
    use crate::objectives::QuadraticObjective;

    fn quad(a: Vec<Vec<f64>>, xi: Vec<f64>, sigma: f64) -> QuadraticObjective<f64> {
        QuadraticObjective::new(Matrix::from_rows(a).unwrap(), xi.into(), sigma).unwrap()
    }

    #[test]
    fn single_noiseless_client_is_gradient_descent() {
        let a = vec![vec![2.0, 0.5], vec![0.5, 1.0]];
        let q = quad(a.clone(), vec![0.3, -1.0], 0.0);
        let theta: Vector<f64> = vec![1.0, 2.0].into();
        let w = CollaborationState::local(0, 1, 0.0);
        let mut s = RngStream::for_client(1, 0, Purpose::Step);
        let next = afo_step(&theta, &w, &[q.clone()], 0.1, &mut s).unwrap();
        let e = [1.3, 1.0];
        for r in 0..2 {
            let expect = theta[r] - 0.2 * (a[r][0] * e[0] + a[r][1] * e[1]);
            assert!((next[r] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_pair_matches_local() {
        let q = quad(vec![vec![1.0, 0.0], vec![0.0, 3.0]], vec![0.5, 0.5], 0.0);
        let theta: Vector<f64> = vec![-1.0, 0.25].into();
        let mut s = RngStream::for_client(1, 0, Purpose::Step);
        let pair = CollaborationState::from_weights(0, vec![0.5, 0.5], &[1.0, 1.0]).unwrap();
        let a = afo_step(&theta, &pair, &[q.clone(), q.clone()], 0.1, &mut s).unwrap();
        let b = afo_step(&theta, &CollaborationState::local(0, 1, 1.0), &[q.clone()], 0.1, &mut s).unwrap();
        assert!(a.dist_sq(&b).unwrap() < 1e-30);
    }

    #[test]
    fn oracle_singleton_is_local() {
        let q = quad(vec![vec![1.0]], vec![0.0], 0.4);
        let theta: Vector<f64> = vec![1.0].into();
        let clusters = vec![vec![0], vec![1]];
        let mut s1 = RngStream::for_client(5, 0, Purpose::Step);
        let mut s2 = RngStream::for_client(5, 0, Purpose::Step);
        let a = oracle_afo_step(0, &theta, &clusters, &[q.clone(), q.clone()], &[0.4, 0.4], 0.1, &mut s1).unwrap();
        let b = afo_step(&theta, &CollaborationState::local(0, 2, 0.4), &[q.clone(), q], 0.1, &mut s2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fedavg_single_step_is_gd_on_average() {
        let qs = vec![
            quad(vec![vec![1.0, 0.0], vec![0.0, 2.0]], vec![1.0, 0.0], 0.0),
            quad(vec![vec![3.0, 1.0], vec![1.0, 1.0]], vec![-1.0, 0.5], 0.0),
        ];
        let theta: Vector<f64> = vec![0.2, -0.4].into();
        let mut streams: Vec<_> = (0..2).map(|k| RngStream::for_client(3, k, Purpose::Step)).collect();
        let next = fedavg_round(&theta, &qs, &[0.05, 0.05], 1, &mut streams).unwrap();
        let mut avg = qs[0].gradient(&theta).unwrap();
        avg.axpy(1.0, &qs[1].gradient(&theta).unwrap()).unwrap();
        let mut expect = theta.clone();
        expect.axpy(-0.025, &avg).unwrap();
        assert!(next.dist_sq(&expect).unwrap() < 1e-28);
    }

    #[test]
    fn spec_validation_and_labels() {
        let afo = AlgorithmSpec::AllForOne {
            criterion: Criterion::<f64>::Continuous,
            estimation: Estimation::Stochastic { b_alpha: 1 },
            inner_iterations: 1,
        };
        assert_eq!(afo.label(), "afo_cont");
        assert!(afo.validate(3).is_ok());
        let oracle = AlgorithmSpec::<f64>::OracleAllForOne { clusters: vec![vec![0, 2], vec![1]] };
        assert!(oracle.validate(3).is_ok());
        assert!(oracle.validate(4).is_err());
        let overlap = AlgorithmSpec::<f64>::OracleAllForOne { clusters: vec![vec![0, 1], vec![1, 2]] };
        assert!(overlap.validate(3).is_err());
        assert!(AlgorithmSpec::<f64>::FedAvg { local_steps: 0 }.validate(2).is_err());
    }
}
