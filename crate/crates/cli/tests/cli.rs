use std::path::Path;
use std::process::{Command, Output};

fn bolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bolab")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = vec!["run"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out-dir", dir.to_str().unwrap()]);
    bolab(&all)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn result(dir: &Path, stem: &str) -> serde_json::Value {
    json(&dir.join(format!("{stem}.json")))["result"].clone()
}

fn stderr_report(o: &Output) -> serde_json::Value {
    serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).expect("error report is JSON")
}

#[test]
fn list_names_every_experiment() {
    let o = bolab(&["--list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in [
        "bo travelling-wave",
        "bo evolve",
        "bo convexity",
        "gibbs sample",
        "solitons evolve",
        "solitons calibrate",
        "gas partition",
        "gas equilibrium",
        "gas clt",
        "transport geodesic",
        "transport inequalities",
        "euler evolve",
        "euler cosec",
        "euler entropy",
    ] {
        assert!(text.contains(&format!("{name}:")), "{name}");
    }
    assert!(text.contains("--modes <256>"));
}

#[test]
fn missing_experiment_is_a_validation_error() {
    let o = bolab(&["run"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_report(&o)["error"], "validation");
    assert_eq!(bolab(&[]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.conf");
    std::fs::write(&cfg, "# nothing here\n").unwrap();
    assert_eq!(bolab(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unknown_keys_and_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["bo", "travelling-wave", "--radius", "0.5"][..],
        &["bo", "nope"],
        &["bo", "travelling-wave", "--r", "half"],
        &["bo", "travelling-wave", "--r", "1.5"],
        &["bo", "evolve", "--scheme", "euler"],
        &["gas", "partition", "--n-list", "8,4"],
        &["bo", "travelling-wave", "--threads", "0"],
    ] {
        let o = run_in(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "experiment = bo travelling-wave\nwidth = 3\n").unwrap();
    assert_eq!(run_in(dir.path(), &["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unreadable_config_and_unwritable_output_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.conf");
    let o = bolab(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_report(&o)["error"], "io");
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = run_in(&blocker, &["euler", "cosec", "--n", "10"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn blow_up_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["bo", "evolve", "--modes", "8", "--amp", "50", "--dt", "0.05", "--t-end", "10"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stderr_report(&o)["error"], "numerical");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# wave\nexperiment = bo travelling-wave\nr = 0.3\nmodes = 32\nt_end = 0.1\nseed = 5\n").unwrap();
    let o = run_in(dir.path(), &["--config", cfg.to_str().unwrap(), "--r", "0.5", "--seed", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = result(dir.path(), "bo-travelling-wave-summary");
    assert!((summary["speed"].as_f64().unwrap() - 5.0 / 3.0).abs() < 1e-12);
    let manifest = json(&dir.path().join("bo-travelling-wave-manifest.json"));
    assert_eq!(manifest["seed"], 6);
    assert_eq!(manifest["config"]["modes"], "32");
    assert_eq!(manifest["config"]["t-end"], "0.1");
    assert_eq!(manifest["artifacts"].as_array().unwrap().len(), 2);
}

#[test]
fn artifacts_carry_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["gas", "equilibrium", "--points", "8", "--seed", "3"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("gas-equilibrium-density.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# bolab gas equilibrium seed=3"));
    assert_eq!(lines.next(), Some("theta,rho"));
    assert_eq!(lines.count(), 8);
    let doc = json(&dir.path().join("gas-equilibrium-summary.json"));
    assert_eq!(doc["comment"], "bolab gas equilibrium seed=3");
    assert!(doc["result"]["residual"].as_f64().unwrap() < 1e-8);
    let printed = String::from_utf8(o.stdout).unwrap();
    assert_eq!(printed.lines().count(), 2);
}

#[test]
fn seed_changes_random_experiments() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (d, s) in [(&a, "1"), (&b, "2")] {
        assert!(run_in(d.path(), &["bo", "evolve", "--modes", "8", "--t-end", "0.05", "--save-every", "10", "--seed", s]).status.success());
    }
    let read = |d: &Path| std::fs::read_to_string(d.join("bo-evolve-history.csv")).unwrap();
    let (x, y) = (read(a.path()), read(b.path()));
    assert_ne!(x.lines().nth(2), y.lines().nth(2));
}

#[test]
fn thread_count_does_not_change_results() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["gas", "clt", "--n", "5", "--samples", "200", "--burn-in", "10", "--chains", "4"];
    for (d, t) in [(&a, "1"), (&b, "3")] {
        let mut v = args.to_vec();
        v.extend(["--threads", t]);
        assert!(run_in(d.path(), &v).status.success());
    }
    let read = |d: &Path| std::fs::read(d.join("gas-clt-values.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn experiments_report_expected_values() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ok = |args: &[&str]| {
        let o = run_in(d, args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    };
    ok(&["bo", "travelling-wave", "--modes", "64", "--t-end", "0.2"]);
    let s = result(d, "bo-travelling-wave-summary");
    assert!(s["residual"].as_f64().unwrap() < 1e-8 && s["translate_error"].as_f64().unwrap() < 1e-6);

    ok(&["bo", "evolve", "--modes", "16", "--t-end", "0.1", "--save-every", "10"]);
    assert!(result(d, "bo-evolve-summary")["mass_drift"].as_f64().unwrap() < 1e-10);

    ok(&["bo", "convexity", "--modes", "128", "--trials", "2", "--low-modes", "8"]);
    assert_eq!(result(d, "bo-convexity-summary")["negative_direction"], true);

    ok(&["gibbs", "sample", "--modes", "2", "--steps", "4000", "--burn-in", "500"]);
    let csv = std::fs::read_to_string(d.join("gibbs-sample-variances.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);

    ok(&["solitons", "evolve", "--n", "2", "--t-end", "0.2"]);
    let s = result(d, "solitons-evolve-summary");
    assert!(s["k_relative_drift"].as_f64().unwrap() < 1e-8 && s["bo_residual"].as_f64().unwrap() < 1e-4);

    ok(&["solitons", "calibrate", "--t-end", "0.3"]);
    let s = result(d, "solitons-calibrate-calibration");
    assert_eq!(s["orientation"], "Reversed");
    assert!((s["beta"].as_f64().unwrap() - 0.5).abs() < 1e-6);

    ok(&["gas", "partition", "--g", "0.2", "--n-list", "8,16,24"]);
    let s = result(d, "gas-partition-summary");
    assert!(s["relative_gap"].as_f64().unwrap() < 0.05);

    ok(&["gas", "clt", "--n", "8", "--samples", "2000", "--burn-in", "50", "--chains", "2"]);
    let s = result(d, "gas-clt-summary");
    assert!((s["clt"]["variance"].as_f64().unwrap() / s["clt"]["classical_variance"].as_f64().unwrap() - 1.0).abs() < 0.25);

    ok(&["transport", "geodesic", "--steps", "2", "--points", "8"]);
    let s = result(d, "transport-geodesic-summary");
    assert!((s["kinetic_action"].as_f64().unwrap() - s["w2_sq_arc"].as_f64().unwrap()).abs() < 1e-6);
    assert!(s["w2_sq_chordal"].as_f64().unwrap() <= 0.5 * s["w2_sq_arc"].as_f64().unwrap());

    ok(&["transport", "inequalities", "--samples", "3"]);
    let s = result(d, "transport-inequalities-summary");
    assert_eq!((s["transport_holds"].as_u64(), s["hwi_holds"].as_u64()), (Some(3), Some(3)));

    ok(&["euler", "evolve", "--n", "32", "--t-end", "0.1", "--save-every", "20"]);
    assert!(result(d, "euler-evolve-summary")["energy_relative_drift"].as_f64().unwrap() < 1e-8);

    ok(&["euler", "evolve", "--n", "32", "--dt", "0.01", "--t-end", "0.02", "--scheme", "variational"]);

    ok(&["euler", "cosec", "--n", "200", "--amp", "0"]);
    let s = result(d, "euler-cosec-summary");
    assert_eq!(s["uniform_sum"].as_f64().unwrap().round() as u64, s["uniform_exact"].as_u64().unwrap());

    ok(&["euler", "entropy", "--n", "32", "--t-end", "0.04", "--save-every", "4"]);
    let s = result(d, "euler-entropy-summary");
    assert_eq!((s["entropy_holds"].as_bool(), s["w2_holds"].as_bool()), (Some(true), Some(true)));
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let runs: [&[&str]; 3] = [
        &["bo", "evolve", "--modes", "8", "--t-end", "0.05", "--save-every", "10"],
        &["gibbs", "sample", "--modes", "3", "--steps", "2000", "--burn-in", "200"],
        &["transport", "inequalities", "--samples", "2"],
    ];
    for d in [&a, &b] {
        for r in runs {
            let mut v = r.to_vec();
            v.extend(["--seed", "17"]);
            assert!(run_in(d.path(), &v).status.success());
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.retain(|n| !n.to_string_lossy().ends_with("-manifest.json"));
    assert_eq!(names.len(), 6);
    for n in names {
        assert_eq!(std::fs::read(a.path().join(&n)).unwrap(), std::fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}
