use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

fn default_log_every() -> u64 {
    1
}

fn default_one() -> usize {
    1
}

fn default_exponent() -> u8 {
    2
}

/// One experiment file: a population, algorithms, a step-size schedule and
/// seeds, and/or a sufficient-cluster sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub iterations: u64,
    #[serde(default = "default_log_every")]
    pub log_every: u64,
    #[serde(default = "default_exponent")]
    pub threshold_exponent: u8,
    /// Updates between two All-for-one weight re-estimations.
    #[serde(default = "default_one")]
    pub inner_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sufficient_cluster: Option<SufficientClusterConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveConfig {
    /// Online least squares `y = ⟨x, θ*_{k mod 2}⟩`, `x ~ N(0, I)`, with the
    /// two centers drawn from `N(0, I)`.
    LsrTwoCluster {
        clients: usize,
        dim: usize,
        batch_size: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        noise_probes: Option<usize>,
    },
    /// Quadratics `(θ + ξ_k)ᵀ A (θ + ξ_k)` with `ξ_k = −θ*_{k mod 2}`.
    QuadraticTwoCluster {
        clients: usize,
        dim: usize,
        /// Eigenvalues of `A`; defaults to all ones.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        curvature: Option<Vec<f64>>,
        /// Rotate `A` by a random orthogonal matrix shared by every client.
        #[serde(default)]
        rotate: bool,
        #[serde(default = "default_center_scale")]
        center_scale: f64,
        noise_sigma: f64,
    },
    /// Explicit list of quadratic clients.
    Quadratic { clients: Vec<QuadraticClientConfig> },
}

fn default_center_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticClientConfig {
    pub a: Vec<Vec<f64>>,
    pub xi: Vec<f64>,
    pub noise_sigma: f64,
    #[serde(default)]
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionConfig {
    /// Threshold of the binary criterion.
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    /// Either an absolute `eta` or `eta_beta`, giving `η = eta_beta / β_max`.
    Constant {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta_beta: Option<f64>,
    },
    /// `η_t = C/(μt)`; `mu` defaults to the smallest client constant.
    Decreasing {
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
    },
    /// Constant step tuned to the horizon. Least-squares populations need
    /// `eps0` and `sigma_suf_sq` explicitly.
    HorizonDependent {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma_suf_sq: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmConfig {
    AllForOne {
        criterion: CriterionKind,
        #[serde(default)]
        estimation: EstimationKind,
        #[serde(default = "default_one")]
        b_alpha: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inner_iterations: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Oracle {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Local {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Fedavg {
        #[serde(default = "default_one")]
        local_steps: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationKind {
    #[default]
    Stochastic,
    Exact,
}

/// Sweep of sufficient-cluster sizes for clients with optima
/// `θ* + ξ_k`, `ξ_k ~ N(0, v² I)`, identity curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SufficientClusterConfig {
    pub v: Vec<f64>,
    pub clients: usize,
    pub dim: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub points: usize,
    /// `None` selects the continuous criterion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub focal: usize,
}

fn default_sigma() -> f64 {
    1.0
}

impl AlgorithmConfig {
    pub fn custom_label(&self) -> Option<&str> {
        match self {
            AlgorithmConfig::AllForOne { label, .. }
            | AlgorithmConfig::Oracle { label }
            | AlgorithmConfig::Local { label }
            | AlgorithmConfig::Fedavg { label, .. } => label.as_deref(),
        }
    }

    /// Name written to the `algo` column.
    pub fn label(&self) -> String {
        if let Some(l) = self.custom_label() {
            return l.to_string();
        }
        match self {
            AlgorithmConfig::AllForOne { criterion, estimation, .. } => {
                let c = match criterion {
                    CriterionKind::Binary => "bin",
                    CriterionKind::Continuous => "cont",
                };
                match estimation {
                    EstimationKind::Stochastic => format!("afo_{c}"),
                    EstimationKind::Exact => format!("afo_{c}_exact"),
                }
            }
            AlgorithmConfig::Oracle { .. } => "oracle".into(),
            AlgorithmConfig::Local { .. } => "local".into(),
            AlgorithmConfig::Fedavg { .. } => "fedavg".into(),
        }
    }
}

fn finite_positive(issues: &mut Vec<String>, field: &str, x: f64) {
    if !(x > 0.0 && x.is_finite()) {
        issues.push(format!("{field}: must be finite and positive (got {x})"));
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn has_training(&self) -> bool {
        self.objective.is_some() || !self.algorithms.is_empty()
    }

    /// Number of clients of the training population.
    pub fn clients(&self) -> Option<usize> {
        self.objective.as_ref().map(|o| match o {
            ObjectiveConfig::LsrTwoCluster { clients, .. } | ObjectiveConfig::QuadraticTwoCluster { clients, .. } => {
                *clients
            }
            ObjectiveConfig::Quadratic { clients } => clients.len(),
        })
    }

    /// Field-level validation; every problem found is reported at once.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            issues.push(format!("name: must be non-empty and use only [A-Za-z0-9_-] (got {:?})", self.name));
        }
        if self.seeds.is_empty() {
            issues.push("seeds: at least one seed is required".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            issues.push("seeds: duplicate seeds".into());
        }
        if self.log_every == 0 {
            issues.push("log_every: must be at least 1".into());
        }
        if !matches!(self.threshold_exponent, 1 | 2) {
            issues.push(format!("threshold_exponent: must be 1 or 2 (got {})", self.threshold_exponent));
        }
        if self.inner_iterations == 0 {
            issues.push("inner_iterations: must be at least 1".into());
        }
        if let Some(c) = &self.criterion {
            if !(c.lambda > 0.0 && c.lambda <= 1.0) {
                issues.push(format!("criterion.lambda: must lie in (0, 1] (got {})", c.lambda));
            }
        }
        if !self.has_training() && self.sufficient_cluster.is_none() {
            issues.push("config: needs an [objective] with [[algorithms]] or a [sufficient_cluster] table".into());
        }
        if self.has_training() {
            self.validate_training(&mut issues);
        }
        if let Some(sc) = &self.sufficient_cluster {
            validate_sweep(sc, &mut issues);
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues.join("\n")))
        }
    }

    fn validate_training(&self, issues: &mut Vec<String>) {
        if self.iterations == 0 {
            issues.push("iterations: must be at least 1".into());
        }
        match &self.objective {
            None => issues.push("objective: missing [objective] table".into()),
            Some(ObjectiveConfig::LsrTwoCluster { clients, dim, batch_size, noise_probes }) => {
                if *clients == 0 {
                    issues.push("objective.clients: must be at least 1".into());
                }
                if *dim == 0 {
                    issues.push("objective.dim: must be at least 1".into());
                }
                if *batch_size == 0 {
                    issues.push("objective.batch_size: must be at least 1".into());
                }
                if *noise_probes == Some(0) {
                    issues.push("objective.noise_probes: must be at least 1".into());
                }
            }
            Some(ObjectiveConfig::QuadraticTwoCluster { clients, dim, curvature, center_scale, noise_sigma, .. }) => {
                if *clients == 0 {
                    issues.push("objective.clients: must be at least 1".into());
                }
                if *dim == 0 {
                    issues.push("objective.dim: must be at least 1".into());
                }
                if let Some(eigs) = curvature {
                    if eigs.len() != *dim {
                        issues.push(format!("objective.curvature: expected {dim} eigenvalues, got {}", eigs.len()));
                    }
                    if eigs.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
                        issues.push("objective.curvature: eigenvalues must be finite and positive".into());
                    }
                }
                if !(*center_scale >= 0.0 && center_scale.is_finite()) {
                    issues.push("objective.center_scale: must be finite and non-negative".into());
                }
                if !(*noise_sigma >= 0.0 && noise_sigma.is_finite()) {
                    issues.push("objective.noise_sigma: must be finite and non-negative".into());
                }
            }
            Some(ObjectiveConfig::Quadratic { clients }) => {
                if clients.is_empty() {
                    issues.push("objective.clients: at least one client is required".into());
                }
                let d = clients.first().map_or(0, |c| c.xi.len());
                for (k, c) in clients.iter().enumerate() {
                    if c.xi.len() != d || c.a.len() != d || c.a.iter().any(|r| r.len() != d) {
                        issues.push(format!("objective.clients[{k}]: a must be {d}x{d} and xi of length {d}"));
                    }
                    if !(c.noise_sigma >= 0.0 && c.noise_sigma.is_finite()) {
                        issues.push(format!("objective.clients[{k}].noise_sigma: must be finite and non-negative"));
                    }
                }
            }
        }
        if self.algorithms.is_empty() {
            issues.push("algorithms: at least one [[algorithms]] entry is required".into());
        }
        let mut labels = Vec::new();
        for (j, a) in self.algorithms.iter().enumerate() {
            let label = a.label();
            if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                issues.push(format!("algorithms[{j}].label: must use only [A-Za-z0-9_-] (got {label:?})"));
            }
            if labels.contains(&label) {
                issues.push(format!("algorithms[{j}]: duplicate label {label:?}; set `label` to disambiguate"));
            }
            labels.push(label);
            match a {
                AlgorithmConfig::AllForOne { criterion, b_alpha, lambda, inner_iterations, .. } => {
                    if *b_alpha == 0 {
                        issues.push(format!("algorithms[{j}].b_alpha: must be at least 1"));
                    }
                    if *inner_iterations == Some(0) {
                        issues.push(format!("algorithms[{j}].inner_iterations: must be at least 1"));
                    }
                    if let Some(l) = lambda {
                        if !(*l > 0.0 && *l <= 1.0) {
                            issues.push(format!("algorithms[{j}].lambda: must lie in (0, 1] (got {l})"));
                        }
                    }
                    if *criterion == CriterionKind::Binary && lambda.is_none() && self.criterion.is_none() {
                        issues.push(format!(
                            "algorithms[{j}]: the binary criterion needs `lambda` here or in [criterion]"
                        ));
                    }
                }
                AlgorithmConfig::Fedavg { local_steps, .. } => {
                    if *local_steps == 0 {
                        issues.push(format!("algorithms[{j}].local_steps: must be at least 1"));
                    }
                }
                AlgorithmConfig::Oracle { .. } | AlgorithmConfig::Local { .. } => {}
            }
        }
        match &self.schedule {
            None => issues.push("schedule: missing [schedule] table".into()),
            Some(ScheduleConfig::Constant { eta, eta_beta }) => match (eta, eta_beta) {
                (Some(e), None) => finite_positive(issues, "schedule.eta", *e),
                (None, Some(e)) => finite_positive(issues, "schedule.eta_beta", *e),
                _ => issues.push("schedule: constant schedule needs exactly one of `eta` or `eta_beta`".into()),
            },
            Some(ScheduleConfig::Decreasing { c, mu }) => {
                if !(*c > 1.0 && c.is_finite()) {
                    issues.push(format!("schedule.c: must be finite and > 1 (got {c})"));
                }
                if let Some(m) = mu {
                    finite_positive(issues, "schedule.mu", *m);
                }
            }
            Some(ScheduleConfig::HorizonDependent { eps0, sigma_suf_sq, mu, beta }) => {
                for (name, v) in [("eps0", eps0), ("sigma_suf_sq", sigma_suf_sq), ("mu", mu), ("beta", beta)] {
                    if let Some(v) = v {
                        finite_positive(issues, &format!("schedule.{name}"), *v);
                    }
                }
                if matches!(self.objective, Some(ObjectiveConfig::LsrTwoCluster { .. }))
                    && (eps0.is_none() || sigma_suf_sq.is_none())
                {
                    issues.push(
                        "schedule: horizon_dependent on least-squares objectives needs explicit `eps0` and `sigma_suf_sq`"
                            .into(),
                    );
                }
            }
        }
    }

    /// The configuration with seeds and output location removed.
    fn hashed_view(&self) -> Self {
        let mut c = self.clone();
        c.seeds.clear();
        c.output_dir = None;
        c
    }

    /// Content hash embedded in every output row: the first 16 hex digits of
    /// the SHA-256 of the canonical JSON form, seeds and output directory
    /// excluded so that a single-seed rerun reproduces the same rows.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_string(&self.hashed_view()).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }
}

fn validate_sweep(sc: &SufficientClusterConfig, issues: &mut Vec<String>) {
    if sc.v.is_empty() {
        issues.push("sufficient_cluster.v: at least one value is required".into());
    }
    if sc.v.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        issues.push("sufficient_cluster.v: values must be finite and non-negative".into());
    }
    if sc.clients == 0 {
        issues.push("sufficient_cluster.clients: must be at least 1".into());
    }
    if sc.focal >= sc.clients.max(1) {
        issues.push(format!("sufficient_cluster.focal: must be below clients ({})", sc.clients));
    }
    if sc.dim == 0 {
        issues.push("sufficient_cluster.dim: must be at least 1".into());
    }
    finite_positive(issues, "sufficient_cluster.sigma", sc.sigma);
    finite_positive(issues, "sufficient_cluster.eps_min", sc.eps_min);
    finite_positive(issues, "sufficient_cluster.eps_max", sc.eps_max);
    if sc.eps_max < sc.eps_min {
        issues.push("sufficient_cluster.eps_max: must not be below eps_min".into());
    }
    if sc.points < 2 {
        issues.push("sufficient_cluster.points: must be at least 2".into());
    }
    if let Some(l) = sc.lambda {
        if !(l > 0.0 && l <= 1.0) {
            issues.push(format!("sufficient_cluster.lambda: must lie in (0, 1] (got {l})"));
        }
    }
}
