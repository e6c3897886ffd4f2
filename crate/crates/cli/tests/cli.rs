use std::process::{Command, Output};

fn varbesov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varbesov")).args(args).output().expect("binary runs")
}

const SMALL: [&str; 4] = ["--grid", "512,16", "--scales", "8,4"];

fn run(args: &[&str], out: &std::path::Path) -> Output {
    let mut all = vec!["run"];
    all.extend_from_slice(args);
    all.extend_from_slice(&SMALL);
    all.extend_from_slice(&["--out", out.to_str().unwrap()]);
    varbesov(&all)
}

#[test]
fn passing_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["independence", "--plots"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["report.json", "report.csv", "plots/plot.py", "plots/ratios.csv", "plots/kernels/dyadic.csv"] {
        assert!(dir.path().join(file).is_file(), "missing {file}");
    }
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn threshold_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["discrete-vs-continuous", "--threshold", "1.0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("report.json").is_file());
}

#[test]
fn hypothesis_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["local-means-vs-discrete", "--moments", "-1"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["peetre-vs-continuous", "--peetre-a", "0.25"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["no-such-experiment"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["independence", "--exponents", "nope"], dir.path()).status.code(), Some(2));
    let out = varbesov(&["run", "independence", "--grid", "1000,16"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("power of two"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "experiment = \"independence\"\nseed = 3\n[thresholds]\nindependence = 1.0\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["--config", cfg.to_str().unwrap(), "--seed", "5"], &out_dir);
    assert_eq!(out.status.code(), Some(1));
    let json = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(json.contains("\"seed\": 5"));
    std::fs::write(&cfg, "bogus_key = 1\n").unwrap();
    assert_eq!(run(&["independence", "--config", cfg.to_str().unwrap()], &out_dir).status.code(), Some(2));
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&["peetre-vs-continuous", "--threads", "2"], a.path());
    run(&["peetre-vs-continuous", "--threads", "2"], b.path());
    for file in ["report.json", "report.csv"] {
        assert_eq!(std::fs::read(a.path().join(file)).unwrap(), std::fs::read(b.path().join(file)).unwrap());
    }
}

#[test]
fn listing_commands() {
    let out = varbesov(&["corpus", "list"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 11);
    let out = varbesov(&["experiments"]);
    assert!(String::from_utf8_lossy(&out.stdout).lines().any(|l| l == "lemma:rychkov"));
    let dir = tempfile::tempdir().unwrap();
    let out = varbesov(&["kernels", "export", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(dir.path().join("pair-mollifier.csv").is_file());
}
