//! End-to-end runs of the command-line binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn codeconv(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codeconv"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn sweep_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = codeconv(&["sweep-b", "--scenario", "1", "--reps", "3", "--b-values", "256,64,16"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("sweep_b_scenario1.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "b,mean_time_s,std_time_s");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("256,"));
    let episodes = fs::read_to_string(dir.path().join("sweep_b_scenario1_episodes.csv")).unwrap();
    assert_eq!(episodes.lines().count(), 1 + 9);
    let manifest = fs::read_to_string(dir.path().join("sweep_b_scenario1.manifest.toml")).unwrap();
    assert!(manifest.contains("b_values = [16, 64, 256]"));
    assert!(manifest.contains("seeds = [0, 1, 2]"));
}

#[test]
fn episode_exports_event_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = codeconv(&["episode", "--strategy", "coded", "--ratio", "0.25", "--seed", "4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = fs::read_to_string(dir.path().join("episode_scenario1_coded_events.csv")).unwrap();
    assert!(log.starts_with("time,kind,worker,piece_row,payload_size\n"));
    assert!(log.contains(",result_arrives,"));
}

#[test]
fn config_files_run() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let dir = tempfile::tempdir().unwrap();
    let path = configs.join("failures_custom.toml");
    let out = codeconv(&["run", path.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("success_rate_small.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    // The other shipped config parses.
    codeconv::experiments::load_experiment_file(&configs.join("compare_scenario1.toml")).unwrap();
}

#[test]
fn bad_input_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = codeconv(&["compare", "--ratio", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ratio"));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[experiment]\nname = \"nonsense\"\n").unwrap();
    let out = codeconv(&["run", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = codeconv(&["run", "/nonexistent/plan.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = codeconv(&["sweep-b", "--scenario", "7"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn full_scale_configs_parse() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for i in 1..=4 {
        let plan = codeconv::experiments::load_experiment_file(&configs.join(format!("full_scale_scenario{i}.toml"))).unwrap();
        let (n1, n2, p) = codeconv::scenario::SCENARIOS[i - 1];
        let sc = &plan.scenarios[0];
        assert_eq!((sc.n1, sc.n2, sc.workers), (n1, n2, p));
    }
}
