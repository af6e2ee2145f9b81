use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cellfree-fl"));
    cmd.args(args).env_remove("CELLFREE_FL_OUT");
    if let Some(dir) = out {
        cmd.env("CELLFREE_FL_OUT", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const TINY: [&str; 8] = [
    "--set", "n_ue=4", "--set", "n_ap=4", "--set", "side_km=0.5", "--set", "eval_samples=2",
];

#[test]
fn generate_writes_placement_and_state() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["generate", "--n-ap", "5", "--n-ue", "3", "--case", "C1"], Some(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let placement = std::fs::read_to_string(dir.path().join("placement.csv")).unwrap();
    assert_eq!(placement.lines().count(), 1 + 5 + 3);
    assert!(std::fs::read_to_string(dir.path().join("realization.txt"))
        .unwrap()
        .starts_with("realization v1"));
}

#[test]
fn sweep_then_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(&cfg, "cases = C1\nn_qol = 2\ntrials = 2\nalg2_max_iter = 5\n").unwrap();
    let mut args = vec!["sweep", "--config", cfg.to_str().unwrap()];
    args.extend(TINY);
    let o = run(&args, Some(dir.path()));
    assert!(o.status.success(), "{}\n{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let results = dir.path().join("results.csv");
    let table = std::fs::read_to_string(&results).unwrap();
    assert_eq!(table.lines().count(), 1 + 2 * 3);
    let snapshot = std::fs::read_to_string(dir.path().join("config.txt")).unwrap();
    assert!(snapshot.contains("n_ue = 4"));

    let o = run(&["summarize", "--input", results.to_str().unwrap()], Some(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 3);
    assert!(dir.path().join("plotdata").join("fig5.gp").exists());
    assert!(dir.path().join("plotdata").join("fig7b.gp").exists());
}

#[test]
fn baseline_and_optimize_run_once() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["baseline", "--scheme", "bl2", "--n-qol", "2"];
    args.extend(TINY);
    let o = run(&args, Some(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("BL2"));
    assert!(dir.path().join("bl2.csv").exists());

    let mut args = vec!["optimize", "--n-qol", "2", "--set", "alg2_max_iter=5"];
    args.extend(TINY);
    let o = run(&args, Some(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("n,sum_a"));
    assert!(dir.path().join("short_term.csv").exists());
}

#[test]
fn failures_give_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    // Every solve hits the iteration cap, so every trial fails.
    let mut args = vec!["sweep", "--set", "schemes=BL1", "--set", "trials=1", "--set", "solver_max_iter=1"];
    args.extend(TINY);
    args.extend(["--set", "n_qol=2", "--set", "cases=C1"]);
    let o = run(&args, Some(dir.path()));
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(std::fs::read_to_string(dir.path().join("results.csv")).unwrap().contains("failed"));

    let o = run(&["sweep", "--set", "trials=0"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["generate", "--case", "C9"], Some(dir.path()));
    assert!(!o.status.success());
}

#[test]
fn out_flag_beats_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = run(
        &["generate", "--n-ap", "3", "--n-ue", "2", "--out", flag_dir.path().to_str().unwrap()],
        Some(env_dir.path()),
    );
    assert!(o.status.success());
    assert!(flag_dir.path().join("placement.csv").exists());
    assert!(!env_dir.path().join("placement.csv").exists());
}

#[test]
fn validate_quick_passes() {
    let o = run(&["validate", "--quick"], None);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 4);
}
