//! End-to-end tests of the `slowent` binary: exit codes, output files,
//! and run-to-run determinism.

use std::path::Path;
use std::process::{Command, Output};

fn slowent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slowent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn verify_suite_passes_and_writes_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = slowent(&["--out", dir, "verify", "inequalities"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("metric-inequalities"), "{text}");
    assert!(text.contains("2/2 checks passed"), "{text}");
    let manifest = read(tmp.path(), "verify-manifest.txt");
    assert!(
        manifest.contains("check.metric-inequalities = pass"),
        "{manifest}"
    );
    assert!(
        manifest.contains("check.oracle-equivalence = pass"),
        "{manifest}"
    );
    assert!(
        manifest.contains("config.verify.target = inequalities"),
        "{manifest}"
    );
}

#[test]
fn unknown_verify_target_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = slowent(&[
        "--out",
        tmp.path().to_str().unwrap(),
        "verify",
        "everything",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let text = stderr(&out);
    assert!(text.contains("unknown verify target"), "{text}");
    assert!(text.contains("star-to-bowen"), "{text}");
}

#[test]
fn invalid_flag_values_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = slowent(&["--out", dir, "analyze", "--deltas", "abc"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    let out = slowent(&["--out", dir, "analyze", "--system", "pendulum"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    let out = slowent(&["--out", dir, "verify", "all", "--blocks", "7..3"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    let out = slowent(&["--out", dir, "analyze", "--count", "48"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("--sampler"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn toeplitz_regular_dump_matches_the_trailing_zeros_rule() {
    let out = slowent(&["toeplitz", "--regular", "--depth", "6", "--print", "1..8"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("symbols = 1,0,1,1,1,0,1,0"), "{text}");
    assert!(text.contains("sequence = regular"), "{text}");
    assert!(text.contains("periodic densities:"), "{text}");
}

#[test]
fn empty_print_range_gives_only_the_header() {
    let out = slowent(&["toeplitz", "--depth", "6", "--print", "10..2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1, "{text}");
    assert!(text.starts_with("sequence = toeplitz"), "{text}");
}

#[test]
fn uncovered_position_exits_with_the_depth_code() {
    let out = slowent(&["toeplitz", "--depth", "4", "--print", "100003..100003"]);
    assert_eq!(out.status.code(), Some(4), "stdout: {}", stdout(&out));
    assert!(stderr(&out).contains("depth"), "{}", stderr(&out));
}

#[test]
fn analyze_is_deterministic_across_reruns_and_thread_counts() {
    let args = |dir: &str, threads: &str| {
        [
            "--out".to_string(),
            dir.to_string(),
            "--threads".to_string(),
            threads.to_string(),
            "analyze".to_string(),
            "--system".to_string(),
            "shift-sturmian".to_string(),
            "--n-max".to_string(),
            "256".to_string(),
        ]
    };
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = (0..3).map(|i| tmp.path().join(format!("run{i}"))).collect();
    for (dir, threads) in dirs.iter().zip(["1", "1", "2"]) {
        let argv = args(dir.to_str().unwrap(), threads);
        let argv: Vec<&str> = argv.iter().map(|s| s.as_str()).collect();
        let out = slowent(&argv);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    }
    let results: Vec<String> = dirs.iter().map(|d| read(d, "results.csv")).collect();
    let estimates: Vec<String> = dirs.iter().map(|d| read(d, "estimates.csv")).collect();
    assert_eq!(results[0], results[1], "rerun changed results.csv");
    assert_eq!(results[0], results[2], "thread count changed results.csv");
    assert_eq!(estimates[0], estimates[1]);
    assert_eq!(estimates[0], estimates[2]);
    assert!(
        results[0].starts_with("system,kind,method,delta,nu,n,count,seed,sampler,candidate_count")
    );
}

#[test]
fn config_file_drives_the_run_and_is_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("cfg-out");
    let config = format!(
        "[system]\nkind = rotation\n\n[run]\nn_min = 16\nn_max = 128\nseed = 9\n\n\
         [output]\ndir = {}\n",
        out_dir.display()
    );
    let config_path = tmp.path().join("exp.conf");
    std::fs::write(&config_path, &config).unwrap();
    let out = slowent(&["--config", config_path.to_str().unwrap(), "analyze"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let manifest = read(&out_dir, "manifest.txt");
    assert!(manifest.contains("config.run.seed = 9"), "{manifest}");
    assert!(
        manifest.contains("config.system.kind = rotation"),
        "{manifest}"
    );
    assert!(manifest.contains("file = results.csv"), "{manifest}");

    let bad = config.replace("n_min", "n_minimum");
    std::fs::write(&config_path, bad).unwrap();
    let out = slowent(&["--config", config_path.to_str().unwrap(), "analyze"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plot_needs_an_analyzed_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = slowent(&["plot", "--dir", dir]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));

    let out = slowent(&[
        "--out", dir, "analyze", "--system", "rotation", "--n-max", "128",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let out = slowent(&["plot", "--dir", dir]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let script = read(tmp.path(), "plot.gp");
    assert!(script.contains("set logscale xy"), "{script}");
    assert!(script.contains("rotation"), "{script}");
}
