//! Configuration files, experiment orchestration, CSV and manifest output,
//! and the command-line front end.

pub mod cli;
mod config;
mod experiment;
mod output;
pub mod presets;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use config::{
    AlgorithmConfig, CriterionConfig, CriterionKind, EstimationKind, ExperimentConfig, ObjectiveConfig,
    QuadraticClientConfig, ScheduleConfig, SufficientClusterConfig,
};
pub use experiment::{
    build_algorithm, build_problem, build_schedule, log_grid, sufficient_cluster_curves, SweepCurve,
};
pub use output::{
    fmt_float, run_csv_bytes, sha256_hex, sweep_csv_bytes, write_atomic, DivergenceDiagnostic, FileEntry, Manifest,
    RunEntry, SweepEntry, RUN_HEADER, SWEEP_HEADER,
};

use crate::error::{Error, Result};
use crate::optimizer::{run_experiment, AlgorithmSpec, Problem, RunRecord, RunStatus, StepSchedule};
use crate::theory::ThresholdExponent;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Files written by [`execute`].
#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
    /// Diagnostic files of diverged runs.
    pub diverged: Vec<PathBuf>,
}

struct Task<'a> {
    run_id: String,
    label: String,
    seed: u64,
    spec: AlgorithmSpec<f64>,
    schedule: StepSchedule<f64>,
    problem: &'a Problem<f64>,
}

fn as_config_error(context: &str, e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(format!("{context}: {other}")),
    }
}

/// Runs every (algorithm, seed) pair and sweep of `cfg`, writing one CSV per
/// run plus `manifest.json` into `out_dir`.
///
/// Everything that depends only on the configuration is built before the
/// output directory is touched, so an invalid configuration leaves no files.
/// Runs execute on at most `jobs` threads; the manifest is written last.
pub fn execute(cfg: &ExperimentConfig, out_dir: &Path, jobs: usize) -> Result<Outcome> {
    cfg.validate()?;
    let hash = cfg.content_hash();
    let exponent = ThresholdExponent::from_power(cfg.threshold_exponent).map_err(|e| as_config_error("threshold_exponent", e))?;

    let problems: Vec<(u64, Problem<f64>)> = if cfg.has_training() {
        cfg.seeds
            .iter()
            .map(|&s| build_problem(cfg, s).map(|p| (s, p)).map_err(|e| as_config_error("objective", e)))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let mut tasks = Vec::new();
    for algo in &cfg.algorithms {
        let label = algo.label();
        for (seed, problem) in &problems {
            let spec = build_algorithm(algo, cfg, problem).map_err(|e| as_config_error("algorithms", e))?;
            spec.validate(problem.len()).map_err(|e| as_config_error("algorithms", e))?;
            let schedule = build_schedule(cfg, problem)?;
            tasks.push(Task {
                run_id: format!("{}-{label}-s{seed}", cfg.name),
                label: label.clone(),
                seed: *seed,
                spec,
                schedule,
                problem,
            });
        }
    }
    let sweeps: Vec<(u64, SweepCurve)> = match &cfg.sufficient_cluster {
        Some(sc) => {
            let mut all = Vec::new();
            for &seed in &cfg.seeds {
                for curve in sufficient_cluster_curves(sc, seed, exponent).map_err(|e| as_config_error("sufficient_cluster", e))? {
                    all.push((seed, curve));
                }
            }
            all
        }
        None => Vec::new(),
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let records: Vec<RunRecord<f64>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|t| {
                let mut rec = run_experiment(&t.spec, t.problem, &t.schedule, cfg.iterations, cfg.log_every, t.seed)?;
                rec.algo = t.label.clone();
                Ok(rec)
            })
            .collect::<Result<_>>()
    })?;

    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let mut runs = Vec::new();
    let mut diverged = Vec::new();
    let emit = |name: String, bytes: &[u8], files: &mut Vec<FileEntry>| -> Result<String> {
        write_atomic(&out_dir.join(&name), bytes)?;
        files.push(FileEntry { path: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(name)
    };
    for (task, rec) in tasks.iter().zip(&records) {
        let bytes = run_csv_bytes(&task.run_id, &hash, rec)?;
        let file = emit(format!("{}.csv", task.run_id), &bytes, &mut files)?;
        let diagnostic = match rec.status {
            RunStatus::Completed => None,
            RunStatus::Diverged { iter, client, loss } => {
                let diag = DivergenceDiagnostic {
                    run_id: task.run_id.clone(),
                    algo: rec.algo.clone(),
                    seed: rec.seed,
                    iter,
                    client,
                    loss,
                    rows_written: rec.rows.len(),
                };
                let json = serde_json::to_vec_pretty(&diag).map_err(|e| Error::Io(std::io::Error::other(e)))?;
                let name = emit(format!("{}.diverged.json", task.run_id), &json, &mut files)?;
                diverged.push(out_dir.join(&name));
                Some(name)
            }
        };
        runs.push(RunEntry {
            run_id: task.run_id.clone(),
            algo: rec.algo.clone(),
            seed: rec.seed,
            schedule: rec.schedule.clone(),
            file,
            rows: rec.rows.len(),
            status: output::status_label(&rec.status).into(),
            cap_activations: rec.cap_activations,
            fallbacks: rec.fallbacks,
            diagnostic,
        });
    }
    let mut sweep_entries = Vec::new();
    for (seed, curve) in &sweeps {
        let run_id = format!("{}-v{}-s{seed}", cfg.name, curve.v);
        let bytes = sweep_csv_bytes(curve)?;
        let file = emit(format!("{run_id}.csv"), &bytes, &mut files)?;
        sweep_entries.push(SweepEntry { run_id, v: curve.v, seed: *seed, file, rows: curve.reports.len() });
    }
    let manifest = Manifest {
        name: cfg.name.clone(),
        config_hash: hash,
        config: cfg.clone(),
        runs,
        sweeps: sweep_entries,
        files,
    };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    write_atomic(&manifest_path, &json)?;
    Ok(Outcome { out_dir: out_dir.to_path_buf(), manifest_path, manifest, diverged })
}
