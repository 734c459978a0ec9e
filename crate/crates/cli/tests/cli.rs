use std::path::Path;
use std::process::{Command, Output};

use mlab_core::domain::{CuspProfile, GraphDomain};
use mlab_core::jacobi::JacobiParams;
use mlab_core::markov::extremal_ratio;
use mlab_core::quad::GradedMesh;
use serde_json::{json, Value};
use tempfile::TempDir;

fn mlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlab")).args(args).output().expect("mlab runs")
}

fn write_config(dir: &Path, name: &str, value: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn run(experiment: &str, config: &str, out: &Path, jobs: usize) -> Output {
    mlab(&[experiment, "--config", config, "--jobs", &jobs.to_string(), "--out", out.to_str().unwrap()])
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        ("markov-sweep", json!({"band": null}), vec!["markov-sweep.csv", "markov-sweep.json"]),
        (
            "eigen-sweep",
            json!({"p": 3.0, "n_range": {"values": [1, 2, 3]}, "restarts": 4, "seed": 9, "band": null}),
            vec!["eigen-sweep.csv", "eigen-sweep.json"],
        ),
        ("construct", json!({"n_max": 24, "secant_samples": 2000}), vec!["construct.csv", "construct.json", "profile.json"]),
    ];
    for (exp, cfg, files) in cases {
        let config = write_config(tmp.path(), &format!("{exp}.json"), &cfg);
        let mut outputs = Vec::new();
        for jobs in [1, 3] {
            let out = tmp.path().join(format!("{exp}-{jobs}"));
            let status = run(exp, &config, &out, jobs).status.code();
            assert!(matches!(status, Some(0) | Some(2)), "{exp}: {status:?}");
            outputs.push(files.iter().map(|f| read(out.join(f))).collect::<Vec<_>>());
        }
        assert_eq!(outputs[0], outputs[1], "{exp}");
    }
}

#[test]
fn sweep_csv_has_the_documented_header() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "c.json", &json!({"band": null}));
    assert_eq!(run("markov-sweep", &config, tmp.path(), 1).status.code(), Some(0));
    let csv = read(tmp.path().join("markov-sweep.csv"));
    assert_eq!(csv.lines().next().unwrap(), "n,factor,epsilon_n,n2_over_eps,ratio_to_law");
    assert_eq!(csv.lines().count(), 5);
    let report: Value = serde_json::from_str(&read(tmp.path().join("markov-sweep.json"))).unwrap();
    assert_eq!(report["schema"], 1);
}

#[test]
fn csv_rows_are_recomputable_from_the_library() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "c.json", &json!({"alpha": 7.5, "band": null, "n_range": {"values": [8, 20]}}));
    assert_eq!(run("markov-sweep", &config, tmp.path(), 2).status.code(), Some(0));
    let domain = GraphDomain::upper(CuspProfile::power(2.0).unwrap()).unwrap();
    let params = JacobiParams::new(7.5, 0.0).unwrap();
    for line in read(tmp.path().join("markov-sweep.csv")).lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let n: usize = cells[0].parse().unwrap();
        let factor: f64 = cells[1].parse().unwrap();
        let direct = extremal_ratio(&domain, &params, n, 2.0, &GradedMesh::default()).unwrap();
        assert_eq!(factor.to_bits(), direct.to_bits(), "n = {n}");
        let eps: f64 = cells[2].parse().unwrap();
        assert_eq!(eps.to_bits(), domain.solve_epsilon_n(n).unwrap().epsilon_n.to_bits());
    }
}

#[test]
fn exit_codes_separate_band_failures_from_errors() {
    let tmp = TempDir::new().unwrap();
    let pass = write_config(tmp.path(), "pass.json", &json!({"band": [0.0, 100.0]}));
    let fail = write_config(tmp.path(), "fail.json", &json!({"band": [100.0, 200.0]}));
    let unknown = write_config(tmp.path(), "unknown.json", &json!({"bnad": [0.0, 1.0]}));
    let bad_p = write_config(tmp.path(), "bad-p.json", &json!({"p": 0.5}));
    assert_eq!(run("markov-sweep", &pass, tmp.path(), 1).status.code(), Some(0));
    let out = run("markov-sweep", &fail, tmp.path(), 1);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    assert_eq!(run("markov-sweep", &unknown, tmp.path(), 1).status.code(), Some(1));
    assert_eq!(run("markov-sweep", &bad_p, tmp.path(), 1).status.code(), Some(1));
    assert_eq!(run("markov-sweep", "/nonexistent/config.json", tmp.path(), 1).status.code(), Some(1));
}

#[test]
fn precondition_errors_name_their_module() {
    let tmp = TempDir::new().unwrap();
    let weak = write_config(tmp.path(), "weak.json", &json!({"alpha": 0.5}));
    let out = run("lemma31", &weak, tmp.path(), 1);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[markov]") && err.contains("precondition"), "{err}");
}

#[test]
fn print_config_shows_every_default_and_round_trips() {
    let tmp = TempDir::new().unwrap();
    let out = mlab(&["logcusp", "--print-config"]);
    assert_eq!(out.status.code(), Some(0));
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["schema", "experiment", "domain", "p", "n_range", "alpha", "mesh", "seed", "band", "fit", "output"] {
        assert!(printed.get(key).is_some(), "missing {key}");
    }
    assert_eq!(printed["experiment"], "logcusp");
    let path = write_config(tmp.path(), "printed.json", &printed);
    let again = mlab(&["logcusp", "--config", &path, "--print-config"]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn config_for_another_experiment_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "c.json", &json!({"experiment": "construct"}));
    let out = run("markov-sweep", &config, tmp.path(), 1);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn domain_info_on_the_log_cusp() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "c.json", &json!({"domain": {"kind": "log", "parameters": {"iota": 1.0}}}));
    assert_eq!(run("domain-info", &config, tmp.path(), 1).status.code(), Some(0));
    let report: Value = serde_json::from_str(&read(tmp.path().join("domain-info.json"))).unwrap();
    assert_eq!(report["regular"], true);
    assert!(report["i_conv_estimate"].as_f64().unwrap() < 64.0);
    let omega = report["omega"].as_array().unwrap();
    assert_eq!(omega.len(), 12);
    assert!(omega.windows(2).all(|w| w[1]["omega"].as_f64() < w[0]["omega"].as_f64()));
}

#[test]
fn constructed_profile_can_be_loaded_back() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "c.json", &json!({"n_max": 32, "n_range": {"values": [4, 8]}, "band": null}));
    let out = run("construct", &config, tmp.path(), 1);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let exported: Value = serde_json::from_str(&read(tmp.path().join("profile.json"))).unwrap();
    assert_eq!(exported["schema"], 1);
    assert_eq!(exported["profile"]["knots"].as_array().unwrap().len(), 32);
    let info = write_config(tmp.path(), "info.json", &json!({"domain": exported["profile"], "n_range": {"values": [4, 8]}}));
    let out = run("domain-info", &info, &tmp.path().join("info"), 1);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(tmp.path().join("info/domain-info.csv"));
    let eps4: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((eps4 / (4f64).powi(-2) - 1.0).abs() < 0.1, "{eps4}");
}

#[test]
fn sequence_files_resolve_next_to_the_config() {
    let tmp = TempDir::new().unwrap();
    let eps: Vec<f64> = (1..=16).map(|n| (n as f64).powi(-2)).collect();
    std::fs::write(tmp.path().join("seq.json"), json!({"epsilons": eps, "constants": vec![4.0; 16]}).to_string()).unwrap();
    let config = write_config(
        tmp.path(),
        "c.json",
        &json!({"sequence": {"file": "seq.json"}, "n_max": 16, "n_range": {"values": [4, 8]}, "band": null}),
    );
    let out = run("construct", &config, &tmp.path().join("o"), 1);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn selftest_passes_and_is_idempotent() {
    let a = mlab(&["selftest"]);
    let b = mlab(&["selftest"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn corrupted_weights_fail_selftest_naming_quad() {
    let out = mlab(&["selftest", "--inject-fault", "quad-weights"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("quad/"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL quad/"));
}
