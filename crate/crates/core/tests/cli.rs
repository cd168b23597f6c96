//! End-to-end runs of the command-line pipelines.

use std::fs;
use std::path::Path;
use std::process::Command;

use bubble_tower::cli::main_with_io;

fn run_captured(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with_io(
        std::iter::once("bubbletower").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn run(args: &[&str]) -> i32 {
    run_captured(args).0
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn json(file: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(file).unwrap()).unwrap()
}

#[test]
fn constants_writes_table_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path(), "c");
    assert_eq!(run(&["constants", "--out", &out]), 0);
    let csv = fs::read_to_string(Path::new(&out).join("constants.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("name,value,err"));
    let a1: f64 = lines
        .next()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((a1 - 0.680174761587832).abs() < 1e-12);
    let manifest = json(Path::new(&out).join("manifest.json"));
    assert_eq!(manifest["command"], "constants");
    assert_eq!(manifest["inputs"]["N"], 3);
    assert!(manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .any(|f| f == "constants.csv"));
}

#[test]
fn predictions_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (path(tmp.path(), "a"), path(tmp.path(), "b"));
    for out in [&a, &b] {
        assert_eq!(
            run(&["predict", "--k", "3", "--eps", "1e-3", "--out", out]),
            0
        );
    }
    let read = |d: &str| fs::read(Path::new(d).join("predict.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    let v = json(Path::new(&a).join("predict.json"));
    assert_eq!(v["tower"]["lambda"].as_array().unwrap().len(), 3);
}

#[test]
fn sweeps_with_one_seed_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (path(tmp.path(), "a"), path(tmp.path(), "b"));
    assert_eq!(
        run(&[
            "sweep",
            "--eps-list",
            "0.05,0.02",
            "--seed",
            "5",
            "--workers",
            "2",
            "--out",
            &a
        ]),
        0
    );
    assert_eq!(
        run(&[
            "sweep",
            "--eps-list",
            "0.05,0.02",
            "--seed",
            "5",
            "--workers",
            "1",
            "--out",
            &b
        ]),
        0
    );
    let read = |d: &str| fs::read_to_string(Path::new(d).join("sweep.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let report = json(Path::new(&a).join("sweep.json"));
    assert!(report["slopes"]["residual_star_norm"].as_f64().unwrap() > 0.5);
    assert!(Path::new(&a).join("point_000").join("point.json").exists());
}

#[test]
fn summary_goes_to_stdout_and_errors_to_stderr() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, out, err) = run_captured(&["predict", "--out", &path(tmp.path(), "p")]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["tower"]["xi"][0].as_f64().unwrap() > 0.0);
    assert!(err.starts_with("wrote "));
    let (code, out, err) =
        run_captured(&["reduce", "--V", "const:1", "--out", &path(tmp.path(), "r")]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(
        err.contains("stage hypotheses") && err.contains("sub regime"),
        "{err}"
    );
}

#[test]
fn single_epsilon_sweep_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&[
            "sweep",
            "--eps-list",
            "0.01",
            "--out",
            &path(tmp.path(), "s")
        ]),
        2
    );
    assert_eq!(
        run(&[
            "sweep",
            "--eps-list",
            "0.01,0.02",
            "--out",
            &path(tmp.path(), "s")
        ]),
        2
    );
}

#[test]
fn positive_potential_violates_the_hypothesis() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path(), "r");
    assert_eq!(run(&["reduce", "--V", "const:1", "--out", &out]), 2);
    assert_eq!(run(&["predict", "--V=2", "--out", &out]), 2);
}

#[test]
fn non_finite_inputs_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path(), "x");
    for args in [
        vec!["predict", "--eps", "NaN"],
        vec!["predict", "--h", "nan"],
        vec!["predict", "--width", "inf"],
        vec!["predict", "--V", "const:nan"],
        vec!["sweep", "--eps-list", "0.1,NaN"],
        vec!["predict", "--q", "5"],
    ] {
        let mut full = args.clone();
        full.extend(["--out", &out]);
        assert_eq!(run(&full), 2, "{args:?}");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "k = 2\neps = 0.002\nV = \"const:-2\"\n").unwrap();
    let out = path(tmp.path(), "p");
    assert_eq!(
        run(&[
            "predict",
            "--config",
            cfg.to_str().unwrap(),
            "--eps",
            "0.001",
            "--out",
            &out
        ]),
        0
    );
    let m = json(Path::new(&out).join("manifest.json"));
    assert_eq!(m["inputs"]["k"], 2);
    assert_eq!(m["inputs"]["eps"], 0.001);
    assert_eq!(m["inputs"]["V"], "const:-2");
    fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(
        run(&["predict", "--config", cfg.to_str().unwrap(), "--out", &out]),
        2
    );
}

#[test]
fn reduce_writes_profiles_with_small_multipliers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path(), "r");
    assert_eq!(run(&["reduce", "--eps", "0.05", "--out", &out]), 0);
    let r = json(Path::new(&out).join("reduction.json"));
    assert!(r["solved"]["max_abs_c"].as_f64().unwrap() < 1e-8);
    let csv = fs::read_to_string(Path::new(&out).join("profile.csv")).unwrap();
    assert!(csv.starts_with("x,ubar,phi,v\n"));
}

#[test]
fn binary_uses_the_output_environment_variable() {
    let tmp = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_bubbletower"))
        .args(["predict", "--eps", "0.01"])
        .env("BUBBLETOWER_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    assert!(tmp.path().join("predict").join("predict.json").exists());
    let bad = Command::new(env!("CARGO_BIN_EXE_bubbletower"))
        .arg("nonsense")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
