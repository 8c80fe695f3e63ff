mod common;

use std::fs;

use common::{cli, manifest, read_csv};

const MINIMAL: &str = r#"
name = "mini"
seeds = [3]
iterations = 10
log_every = 2

[objective]
kind = "quadratic"
clients = [{ a = [[1.0, 0.0], [0.0, 2.0]], xi = [0.5, -0.5], noise_sigma = 0.1 }]

[schedule]
kind = "constant"
eta = 0.1

[[algorithms]]
kind = "local"
"#;

#[test]
fn minimal_run_writes_schema_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mini.toml");
    fs::write(&cfg, MINIMAL).unwrap();
    let out = dir.path().join("out");
    let res = cli(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let (header, rows) = read_csv(&out.join("mini-local-s3.csv"));
    assert_eq!(
        header,
        [
            "run_id", "config_hash", "algo", "seed", "iter", "client", "excess_loss", "test_loss", "grad_sq_norm",
            "active_set_size", "weight_mass", "sigma_eff_sq", "in_cluster_weight", "out_cluster_weight",
            "grad_evals_total"
        ]
    );
    assert_eq!(rows.len(), 5);
    let iters: Vec<&str> = rows.iter().map(|r| r[4].as_str()).collect();
    assert_eq!(iters, ["2", "4", "6", "8", "10"]);
    assert_eq!(rows[4][14], "10");
    let m = manifest(&out);
    assert_eq!(m["runs"].as_array().unwrap().len(), 1);
    assert_eq!(m["runs"][0]["status"], "completed");
    assert_eq!(m["config_hash"].as_str().unwrap(), rows[0][1]);
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, MINIMAL.replace("eta = 0.1", "eta = -0.1")).unwrap();
    let out = dir.path().join("out");
    let res = cli(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("schedule.eta"));
    assert!(!out.exists());

    fs::write(&cfg, "name = [").unwrap();
    let res = cli(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());

    let res = cli(&["run", "--preset", "nope", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn validate_config_reports_run_count() {
    let res = cli(&["validate-config", "--preset", "fig2_d10"]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stdout).contains("18 runs"));
}

#[test]
fn fig2_preset_writes_every_run() {
    let dir = tempfile::tempdir().unwrap();
    let res = cli(&["run", "--preset", "fig2_d2", "--out", dir.path().to_str().unwrap()]);
    assert!(res.status.success());
    let m = manifest(dir.path());
    let csvs = fs::read_dir(dir.path()).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv")).count();
    assert_eq!(csvs, 18);
    assert_eq!(m["files"].as_array().unwrap().len(), 18);
    for f in m["files"].as_array().unwrap() {
        let bytes = fs::read(dir.path().join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
}

#[test]
fn unstable_step_exits_3_with_diagnostic() {
    let cfg = r#"
name = "boom"
seeds = [1]
iterations = 400

[objective]
kind = "lsr_two_cluster"
clients = 2
dim = 10
batch_size = 1

[schedule]
kind = "constant"
eta_beta = 1.0

[[algorithms]]
kind = "local"
"#;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("boom.toml");
    fs::write(&path, cfg).unwrap();
    let out = dir.path().join("out");
    let res = cli(&["run", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("boom-local-s1.diverged.json").exists());
    assert_eq!(manifest(&out)["runs"][0]["status"], "diverged");
}

#[test]
fn bounds_prints_sample_complexity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let res = cli(&[
        "bounds", "--regime", "decreasing", "--beta", "2", "--mu", "1", "--eps0", "1", "--sigma-suf-sq", "1", "--c", "2",
        "--epsilon", "0.2", "--t-max", "50", "--points", "5", "--out", out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stdout).contains("sample_complexity epsilon=0.2 T=20"));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["regime", "t", "eta", "bound", "bias", "variance"]);
    assert_eq!(rows.len(), 5);
}

#[test]
fn sufficient_cluster_flags_without_config() {
    let dir = tempfile::tempdir().unwrap();
    let res = cli(&[
        "sufficient-cluster", "--v", "0.01", "--v", "1", "--clients", "5", "--points", "7", "--lambda", "0.5", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(manifest(dir.path())["sweeps"].as_array().unwrap().len(), 2);
}
