use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::experiment::SweepCurve;
use crate::optimizer::{RunRecord, RunStatus};

pub const RUN_HEADER: [&str; 15] = [
    "run_id",
    "config_hash",
    "algo",
    "seed",
    "iter",
    "client",
    "excess_loss",
    "test_loss",
    "grad_sq_norm",
    "active_set_size",
    "weight_mass",
    "sigma_eff_sq",
    "in_cluster_weight",
    "out_cluster_weight",
    "grad_evals_total",
];

pub const SWEEP_HEADER: [&str; 4] = ["v", "epsilon", "cluster_size", "sigma_suf_sq"];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn run_csv_bytes(run_id: &str, config_hash: &str, record: &RunRecord<f64>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RUN_HEADER).map_err(csv_error)?;
    let seed = record.seed.to_string();
    for r in &record.rows {
        w.write_record([
            run_id,
            config_hash,
            &record.algo,
            &seed,
            &r.iter.to_string(),
            &r.client.to_string(),
            &fmt_float(r.excess_loss),
            &fmt_float(r.test_loss),
            &fmt_float(r.grad_sq_norm),
            &r.active_set_size.to_string(),
            &fmt_float(r.weight_mass),
            &fmt_float(r.sigma_eff_sq),
            &fmt_float(r.in_cluster_weight),
            &fmt_float(r.out_cluster_weight),
            &r.grad_evals_total.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn sweep_csv_bytes(curve: &SweepCurve) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).map_err(csv_error)?;
    for r in &curve.reports {
        w.write_record([fmt_float(curve.v), fmt_float(r.epsilon), r.size().to_string(), fmt_float(r.sigma_suf_sq)])
            .map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunEntry {
    pub run_id: String,
    pub algo: String,
    pub seed: u64,
    pub schedule: String,
    pub file: String,
    pub rows: usize,
    pub status: String,
    pub cap_activations: u64,
    pub fallbacks: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub run_id: String,
    pub v: f64,
    pub seed: u64,
    pub file: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub name: String,
    pub config_hash: String,
    pub config: crate::harness::ExperimentConfig,
    pub runs: Vec<RunEntry>,
    pub sweeps: Vec<SweepEntry>,
    pub files: Vec<FileEntry>,
}

/// Diagnostic written next to the CSV of a diverged run.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceDiagnostic {
    pub run_id: String,
    pub algo: String,
    pub seed: u64,
    pub iter: u64,
    pub client: usize,
    pub loss: f64,
    pub rows_written: usize,
}

pub fn status_label(status: &RunStatus) -> &'static str {
    match status {
        RunStatus::Completed => "completed",
        RunStatus::Diverged { .. } => "diverged",
    }
}
