use std::path::Path;
use std::process::{Command, Output};

use scarchain_cli::output::sha256_hex;
use scarchain_cli::{execute, ExperimentConfig, Mode};

fn scarchain(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scarchain")).args(args).current_dir(cwd).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_TRANSFER: &str = r#"{"experiment":"fig2-transfer",
  "chain":{"n_sites":6,"local_dim":2,"omega":0.0,"lambda":1.0,"seed":3},
  "time_grid":{"samples":50,"t_max_lambda":9.5}}"#;

#[test]
fn transfer_run_writes_six_traces_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL_TRANSFER);
    let out = scarchain(&["run", "--config", &cfg, "--output", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let root = dir.path().join("out");
    for v in ["pst", "thermal", "scar"] {
        for b in ["zeros", "ones"] {
            let text = std::fs::read_to_string(root.join(format!("transfer_{v}_{b}.csv"))).unwrap();
            let mut lines = text.lines();
            assert_eq!(lines.next(), Some("t_lambda,fidelity"));
            assert_eq!(lines.count(), 50);
        }
    }
    let manifest = json(&root.join("manifest.json"));
    assert_eq!(manifest["config"]["chain"]["seed"], 3);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 7);
    for f in files {
        let bytes = std::fs::read(root.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes));
    }
}

#[test]
fn outputs_are_write_once() {
    let dir = tempfile::tempdir().unwrap();
    let out = scarchain(&["run", "--preset", "classify", "--output", "o"], dir.path());
    assert!(out.status.success());
    let before = std::fs::read(dir.path().join("o/classify.json")).unwrap();
    let again = scarchain(&["run", "--preset", "classify", "--output", "o", "--format", "json"], dir.path());
    assert_eq!(again.status.code(), Some(2));
    assert_eq!(std::fs::read(dir.path().join("o/classify.json")).unwrap(), before);
}

#[test]
fn classify_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = scarchain(&["check", "--preset", "classify", "--output", "o", "--format", "json"], dir.path());
    assert!(out.status.success());
    let v = json(&dir.path().join("o/classify.json"));
    assert_eq!((v["annihilated"].as_u64(), v["fixed"].as_u64(), v["other"].as_u64()), (Some(45), Some(36), Some(0)));
    assert!(!dir.path().join("o/classify.csv").exists());
    let check = json(&dir.path().join("o/check.json"));
    assert_eq!(check["passed"], true);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"experiment":"fig2-transfer","bogus":1}"#,
        r#"{"experiment":"fig7"}"#,
        r#"{"experiment":"fig3-spectral","chain":{"n_sites":6,"local_dim":2,"omega":0.0,"lambda":1.0,"seed":1}}"#,
        r#"{"experiment":"fig2-spectral","chain":{"n_sites":16,"local_dim":2,"omega":0.0,"lambda":1.0,"seed":1}}"#,
        r#"{"experiment":"fig4-perturbation","epsilons":[0.1,0.01]}"#,
        "not json",
    ];
    for (i, text) in cases.iter().enumerate() {
        let name = write(dir.path(), &format!("bad{i}.json"), text);
        let out = scarchain(&["run", "--config", &name, "--output", &format!("o{i}")], dir.path());
        assert_eq!(out.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!dir.path().join(format!("o{i}")).exists(), "case {i} wrote output");
    }
    assert_eq!(scarchain(&["run", "--config", "missing.json"], dir.path()).status.code(), Some(2));
    assert_eq!(scarchain(&["run"], dir.path()).status.code(), Some(2));
    assert_eq!(scarchain(&["frobnicate"], dir.path()).status.code(), Some(2));
    let threads = Command::new(env!("CARGO_BIN_EXE_scarchain"))
        .args(["run", "--preset", "classify", "--output", "t"])
        .current_dir(dir.path())
        .env("SCARCHAIN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn uniform_couplings_fail_the_transfer_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "u.json",
        r#"{"experiment":"fig2-transfer","coupling":"uniform","variants":["pst"],
            "chain":{"n_sites":8,"local_dim":2,"omega":0.0,"lambda":1.0,"seed":1}}"#,
    );
    let out = scarchain(&["check", "--config", &cfg, "--output", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let summary = json(&dir.path().join("o/transfer_summary.json"));
    let f1 = summary["traces"][0]["at_transfer_times"][0]["fidelity"].as_f64().unwrap();
    assert!(f1 < 0.99, "{f1}");
    let check = json(&dir.path().join("o/check.json"));
    assert_eq!(check["criteria"][0]["id"], "1");
    assert_eq!(check["criteria"][0]["passed"], false);

    // the same chain with engineered couplings passes
    let good = write(dir.path(), "g.json", &std::fs::read_to_string(dir.path().join(&cfg)).unwrap().replace("uniform", "engineered"));
    assert!(scarchain(&["check", "--config", &good, "--output", "g"], dir.path()).status.success());
}

#[test]
fn thermal_census_expects_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_json(
        r#"{"experiment":"fig2-spectral","variants":["thermal"],
            "chain":{"n_sites":8,"local_dim":2,"omega":0.0,"lambda":1.0,"seed":2},
            "gue_oracle":{"dim":100,"samples":4,"seed":1}}"#,
    )
    .unwrap();
    cfg.output_dir = Some(dir.path().join("o"));
    let report = execute(&cfg.resolve().unwrap(), Mode::Check).unwrap().check.unwrap();
    let census = report.criteria.iter().find(|c| c.id == "5").unwrap();
    assert!(census.passed, "{}", census.detail);
    assert!(census.detail.contains("0 eigenstates"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL_TRANSFER);
    for (seed, out) in [("3", "a"), ("11", "b")] {
        assert!(scarchain(&["run", "--config", &cfg, "--seed", seed, "--output", out], dir.path()).status.success());
    }
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(json(&dir.path().join("b/manifest.json"))["config"]["interaction"]["seed"], 11);
    // PST has no random terms; thermal does
    assert_eq!(read("a/transfer_pst_zeros.csv"), read("b/transfer_pst_zeros.csv"));
    assert_ne!(read("a/transfer_thermal_zeros.csv"), read("b/transfer_thermal_zeros.csv"));
    let a = json(&dir.path().join("a/manifest.json"));
    let b = json(&dir.path().join("b/manifest.json"));
    assert_ne!(a["config_hash"], b["config_hash"]);
}

#[test]
fn schema_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = scarchain(&["schema"], dir.path());
    assert!(out.status.success());
    let schema: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(schema["properties"]["experiment"].is_object());
    assert!(schema.to_string().contains("fig3-transfer"));
    assert!(scarchain(&["schema", "--output", "s.json"], dir.path()).status.success());
    assert_eq!(json(&dir.path().join("s.json")), schema);
}

#[test]
fn appendix_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.json",
        r#"{"experiment":"appendix-checks","chain":{"n_sites":7,"local_dim":2,"omega":0.0,"lambda":1.0,"seed":1}}"#,
    );
    let out = scarchain(&["check", "--config", &cfg, "--output", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report = json(&dir.path().join("o/appendix.json"));
    assert_eq!(report["projector_embedding"]["jx_window_commutators"].as_array().unwrap().len(), 5);
    let dims: Vec<u64> =
        report["trivial_embedding"].as_array().unwrap().iter().map(|r| r["trivial_kernel_dim"].as_u64().unwrap()).collect();
    assert_eq!(dims, vec![8, 16]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS [9]") && stdout.contains("PASS [10]"));
}
