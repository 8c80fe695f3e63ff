#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use allforone::collaboration::Criterion;
use allforone::numerics::{sample_orthogonal_matrix, Matrix, Purpose, RngStream, Vector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, d: usize) -> Vector<f64> {
    Vector::from_fn(d, |_| rng.sample::<f64, _>(StandardNormal))
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo..hi))
}

pub fn random_criterion(rng: &mut ChaCha8Rng) -> Criterion<f64> {
    if rng.gen_bool(0.5) {
        Criterion::binary(rng.gen_range(0.05..=1.0)).unwrap()
    } else {
        Criterion::Continuous
    }
}

/// Symmetric positive-definite matrix with eigenvalues in `[lo, hi]`.
pub fn random_spd(seed: u64, tag: u16, d: usize, lo: f64, hi: f64) -> Matrix<f64> {
    let mut s = RngStream::for_client(seed, 0, Purpose::Custom(tag));
    let q: Matrix<f64> = sample_orthogonal_matrix(&mut s, d).unwrap();
    let mut r = rng(seed ^ (tag as u64) << 32);
    let eigs: Vec<f64> = (0..d).map(|_| r.gen_range(lo..=hi)).collect();
    let a = q.matmul(&Matrix::from_diagonal(&eigs)).unwrap().matmul(&q.transpose()).unwrap();
    Matrix::from_fn(d, d, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_allforone")
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

pub fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}
