use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_matvec-lab"));
    c.env_remove("MATVEC_LAB_THREADS");
    c
}

const SMALL: [&str; 14] = [
    "lower-single",
    "--n",
    "101",
    "--eps",
    "0.25",
    "--q-spec",
    "4",
    "--q",
    "1:12",
    "--trials",
    "10",
    "--set",
    "q_low=2",
    "--seed",
];

#[test]
fn show_config_lists_defaults() {
    let out = bin().args(["show-config", "lower-single"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("n = 2049"));
    assert!(text.contains("seed"));
    let all = bin().arg("show-config").output().unwrap();
    assert!(String::from_utf8(all.stdout).unwrap().contains("# defaults for lift-sim"));
}

#[test]
fn small_run_writes_csv_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let status = bin().args(SMALL).arg("3").args(["--out", path.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("experiment,n,eps,p,q,r,s,t,trial,seed,statistic_name,statistic_value\n"));
    assert!(text.lines().count() > 1);
}

#[test]
fn stdout_matches_file_and_reruns_match() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    bin().args(SMALL).arg("9").args(["--out", path.to_str().unwrap()]).status().unwrap();
    let a = bin().args(SMALL).arg("9").output().unwrap();
    let b = bin().args(SMALL).arg("9").args(["--threads", "2"]).output().unwrap();
    assert_eq!(a.stdout, std::fs::read(&path).unwrap());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn failing_check_exits_one() {
    let status = bin().args(SMALL).arg("3").args(["--set", "tau_low=0", "--no-rerun"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
    assert!(String::from_utf8(status.stderr).unwrap().contains("FAIL"));
}

#[test]
fn config_errors_exit_two() {
    // Missing seed.
    let out = bin().args(["lower-single", "--n", "101"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // (n - 1) not divisible by (q_spec + 1).
    let out =
        bin().args(["lower-single", "--n", "100", "--eps", "0.25", "--q-spec", "4", "--seed", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("nearest valid n is 101"));
    // Unknown key and unknown strategy.
    let out = bin().args(["lift-sim", "--seed", "1", "--set", "colour=red"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["lift-sim", "--seed", "1", "--set", "strategy=oracle"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // Bad flag.
    let out = bin().args(["lower-single", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nseed = 5\nn = 101\neps = 0.25\nq_spec = 4\nq = 1:12\nq_low = 2\ntrials = 50\n")
        .unwrap();
    let out = bin().args(["lower-single", "--config", cfg.to_str().unwrap(), "--trials", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let trials: std::collections::BTreeSet<&str> =
        text.lines().skip(1).map(|l| l.split(',').nth(8).unwrap()).filter(|t| !t.is_empty()).collect();
    assert_eq!(trials.len(), 2);
}

#[test]
fn gen_instance_writes_spectrum() {
    let out = bin().args(["gen-instance", "--n", "11", "--eps", "0.1", "--q-spec", "4"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().next().unwrap().ends_with(",1"));
    let out = bin().args(["gen-instance", "--n", "12", "--eps", "0.1", "--q-spec", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
