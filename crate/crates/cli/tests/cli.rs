use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qreg"))
        .args(args)
        .output()
        .expect("run qreg")
}

fn run_ok(args: &[&str]) {
    let out = qreg(args);
    assert!(
        out.status.success(),
        "qreg {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == name)
        .expect("column");
    r.records()
        .map(|rec| rec.unwrap()[idx].parse().unwrap())
        .collect()
}

#[test]
fn uniform_encoding_has_no_entanglement() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u");
    run_ok(&[
        "encode",
        "--dist",
        "uniform",
        "--m",
        "8",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(column(&out.join("entropy.csv"), "entropy")
        .iter()
        .all(|&s| s.abs() < 1e-12));
    let sizes = json(&out.join("sizes.json"));
    assert_eq!(sizes["max_bond"], 1);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["study"], "encoding");
    assert_eq!(manifest["parameters"]["dist"], "uniform");
    assert!(out.join("state.mps").exists());
}

#[test]
fn unknown_config_key_lists_valid_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "dist = gaussian\nsigmaa = 2\n").unwrap();
    let out = qreg(&[
        "encode",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sigmaa"), "{err}");
    assert!(
        err.contains("sigma") && err.contains("representation") && err.contains("tolerance"),
        "{err}"
    );
}

#[test]
fn config_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# test\nm = 7\nsigma = 2\n").unwrap();
    let out = dir.path().join("o");
    run_ok(&[
        "encode",
        "--config",
        cfg.to_str().unwrap(),
        "--m",
        "6",
        "--output",
        out.to_str().unwrap(),
    ]);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["parameters"]["m"], "6");
    assert_eq!(manifest["parameters"]["sigma"], "2");
    assert_eq!(column(&out.join("entropy.csv"), "entropy").len(), 5);
}

#[test]
fn runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        run_ok(&[
            "entropy-study",
            "--m-max",
            "10",
            "--output",
            d.to_str().unwrap(),
        ]);
    }
    for f in ["profiles.csv", "summary.csv", "decay.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn split_step_variance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fp");
    run_ok(&[
        "solve-fp",
        "--method",
        "split-step",
        "--D",
        "0.1",
        "--mu",
        "0.5",
        "--m",
        "14",
        "--t",
        "3",
        "--output",
        out.to_str().unwrap(),
    ]);
    let s = json(&out.join("summary.json"));
    let var = s["variance"].as_f64().unwrap();
    assert!((var - 1.6).abs() / 1.6 < 1e-4, "variance {var}");
    assert!(s["max_bond"].as_u64().unwrap() <= 16);
    assert_eq!(s["wrapped"], false);
    let times = column(&out.join("trajectory.csv"), "time");
    assert_eq!(times.len(), 11);
    assert!((times[10] - 3.0).abs() < 1e-12);
}

#[test]
fn finite_difference_moments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fd");
    run_ok(&[
        "solve-fp",
        "--t",
        "0.5",
        "--every",
        "5",
        "--output",
        out.to_str().unwrap(),
    ]);
    let traj = out.join("trajectory.csv");
    let (t, mean, var) = (
        column(&traj, "time"),
        column(&traj, "mean"),
        column(&traj, "variance"),
    );
    assert_eq!(t.len(), 11);
    for i in 0..t.len() {
        assert!(
            (mean[i] - 0.2 * t[i]).abs() < 1e-8,
            "mean at {}: {}",
            t[i],
            mean[i]
        );
        assert!(
            (var[i] - (1.0 + 0.2 * t[i])).abs() < 1e-8,
            "variance at {}: {}",
            t[i],
            var[i]
        );
    }
}

#[test]
fn one_dimensional_entropy_stays_below_one_bit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e");
    run_ok(&[
        "entropy-study",
        "--dist",
        "gaussian,lognormal,lorentzian",
        "--m-min",
        "14",
        "--output",
        out.to_str().unwrap(),
    ]);
    for v in column(&out.join("summary.csv"), "max_entropy") {
        assert!(v < 1.0, "{v}");
    }
    let decay = json(&out.join("decay.json"));
    let g = decay["gaussian"]["gamma"].as_f64().unwrap();
    assert!((1.5..=2.0).contains(&g), "gamma {g}");
}

#[test]
fn bounds_hold() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    run_ok(&["verify-bounds", "--output", out.to_str().unwrap()]);
    let mut r = csv::Reader::from_path(out.join("bounds.csv")).unwrap();
    let idx = r
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == "holds")
        .unwrap();
    let rows: Vec<String> = r.records().map(|x| x.unwrap()[idx].to_string()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|h| h == "true"));
}

#[test]
fn interpolation_and_qft_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let (i, q) = (dir.path().join("i"), dir.path().join("q"));
    run_ok(&["interpolate", "--output", i.to_str().unwrap()]);
    let s = json(&i.join("summary.json"));
    let (peak, f, l) = (
        s["peak"].as_f64().unwrap(),
        s["fourier_max_error"].as_f64().unwrap(),
        s["linear_max_error"].as_f64().unwrap(),
    );
    assert!(f < 1e-3 * peak && l > 10.0 * f);
    assert_eq!(column(&i.join("values.csv"), "x").len(), 1024);

    run_ok(&["qft-study", "--output", q.to_str().unwrap()]);
    let s = json(&q.join("summary.json"));
    let (folded, plain) = (
        s["folded_max_entropy"].as_f64().unwrap(),
        s["transformed_max_entropy"].as_f64().unwrap(),
    );
    assert!(folded < plain && folded < 0.5);
}

#[test]
fn two_dimensional_study_writes_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("2d");
    run_ok(&[
        "entropy-2d",
        "--ratios",
        "0.1",
        "--thetas",
        "pi/4",
        "--m",
        "5",
        "--output",
        out.to_str().unwrap(),
    ]);
    let sum = out.join("summary.csv");
    let ent = column(&sum, "max_entropy");
    assert_eq!(ent.len(), 2);
    assert!(column(&sum, "parameters").iter().all(|&p| p > 0.0));
    assert_eq!(json(&out.join("manifest.json"))["study"], "entropy-2d");
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = qreg(&["solve-fp", "--dt", "-1", "--output", "/dev/null/x"]);
    assert!(!out.status.success());
    let out = qreg(&["entropy-2d", "--thetas", "tau"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("angle"));
}
