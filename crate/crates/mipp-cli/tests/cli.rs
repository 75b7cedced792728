//! End-to-end tests of the `mipp` binary: exit codes, merge semantics,
//! artifact shapes and determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mipp"))
}

fn run_in(dir: &PathBuf, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mipp-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn pmf_poisson_base_case_row() {
    let dir = tmpdir("pmf");
    let out = run_in(
        &dir,
        &["pmf", "--lambda", "1", "--n", "1", "--t", "1", "--out", "-"],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,probability"));
    let first: f64 = lines
        .next()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((first - (-1f64).exp()).abs() < 1e-12, "P(0) = {first}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn moments_reference_rows() {
    let dir = tmpdir("moments");
    let out = run_in(
        &dir,
        &[
            "moments", "--lambda", "1", "--n", "2", "--t", "1", "--out", "-",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut got = std::collections::BTreeMap::new();
    for line in text.lines().skip(1) {
        let mut parts = line.split(',');
        let name = parts.next().unwrap().to_string();
        let closed: f64 = parts.next().unwrap().parse().unwrap();
        let bell: f64 = parts.next().unwrap().parse().unwrap();
        got.insert(name, (closed, bell));
    }
    assert!((got["mean"].0 - 1.0).abs() < 1e-12);
    assert!((got["variance"].0 - 2.0).abs() < 1e-12);
    assert!((got["skewness"].0 - 1.767_766_952_966_368_8).abs() < 1e-12);
    assert!((got["kurtosis"].0 - 6.75).abs() < 1e-12);
    for (name, (closed, bell)) in got {
        assert!(
            (closed - bell).abs() / closed.abs() < 1e-6,
            "{name}: closed {closed} vs bell {bell}"
        );
    }
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn jumps_artifact_carries_sojourn_rate_comment() {
    let dir = tmpdir("jumps");
    let out = run_in(&dir, &["jumps", "--lambda", "1", "--n", "2", "--out", "-"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# sojourn_rate = "), "got {comment}");
    let rate: f64 = comment.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((rate - (1.0 - (-1f64).exp())).abs() < 1e-12);
    assert_eq!(lines.next(), Some("k,first_jump_probability"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_file_merge_and_precedence() {
    let dir = tmpdir("merge");
    let config = dir.join("model.conf");
    fs::write(&config, "lambda=1\nn=2\nt=5\n").unwrap();
    let from_file = run_in(
        &dir,
        &[
            "pmf",
            "--config",
            config.to_str().unwrap(),
            "--t",
            "1",
            "--print-config",
        ],
    );
    assert!(from_file.status.success());
    let flags_only = run_in(
        &dir,
        &[
            "pmf",
            "--lambda",
            "1",
            "--n",
            "2",
            "--t",
            "1",
            "--print-config",
        ],
    );
    assert!(flags_only.status.success());
    assert_eq!(
        from_file.stdout, flags_only.stdout,
        "flag overrides file value of t"
    );
    let echo = String::from_utf8(from_file.stdout).unwrap();
    assert!(echo.contains("command=pmf\n"));
    assert!(echo.contains("t=1.0000000000000000e0\n"));
    // Sorted key order.
    let keys: Vec<&str> = echo.lines().map(|l| l.split('=').next().unwrap()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_value_exits_2_and_names_key() {
    let dir = tmpdir("badval");
    let config = dir.join("bad.conf");
    fs::write(&config, "lambda=-1\n").unwrap();
    let out = run_in(
        &dir,
        &[
            "pmf",
            "--config",
            config.to_str().unwrap(),
            "--n",
            "2",
            "--t",
            "1",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("lambda"),
        "stderr: {}",
        stderr_of(&out)
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_key_exits_2() {
    let dir = tmpdir("unknown");
    let out = run_in(&dir, &["pmf", "--bogus", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("bogus"));
    let config = dir.join("bad.conf");
    fs::write(&config, "frobulate=9\n").unwrap();
    let out2 = run_in(&dir, &["pmf", "--config", config.to_str().unwrap()]);
    assert_eq!(out2.status.code(), Some(2));
    assert!(stderr_of(&out2).contains("frobulate"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn net_profit_violation_exits_3_and_leaves_no_artifact() {
    let dir = tmpdir("netprofit");
    let out_path = dir.join("ruin.csv");
    let out = run_in(
        &dir,
        &[
            "ruin",
            "--lambda",
            "1",
            "--c",
            "0.5",
            "--sigma",
            "0",
            "--delta",
            "1",
            "--x",
            "1",
            "--out",
            out_path.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let msg = stderr_of(&out);
    assert!(
        msg.contains("net-profit"),
        "stderr must cite the net-profit condition: {msg}"
    );
    assert!(
        !out_path.exists(),
        "failed run must not leave a partial artifact"
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn scale_artifacts_are_byte_identical_across_runs() {
    let dir = tmpdir("determinism");
    let args = [
        "scale", "--lambda", "1", "--c", "2", "--sigma", "0.5", "--delta", "1", "--h", "0.01",
        "--xmax", "3", "--theta", "1,2",
    ];
    let mut first = args.to_vec();
    first.extend(["--out", "a.csv"]);
    assert!(run_in(&dir, &first).status.success());
    let mut second = args.to_vec();
    second.extend(["--out", "b.csv"]);
    assert!(run_in(&dir, &second).status.success());
    assert_eq!(
        fs::read(dir.join("a.csv")).unwrap(),
        fs::read(dir.join("b.csv")).unwrap()
    );
    assert_eq!(
        fs::read(dir.join("a_laplace.csv")).unwrap(),
        fs::read(dir.join("b_laplace.csv")).unwrap()
    );
    let laplace = fs::read_to_string(dir.join("a_laplace.csv")).unwrap();
    assert_eq!(laplace.lines().next(), Some("theta,residual"));
    for line in laplace.lines().skip(1) {
        let residual: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(
            residual < 5e-3,
            "laplace residual {residual} out of tolerance"
        );
    }
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn simulate_trace_has_terminal_event() {
    let dir = tmpdir("simulate");
    let out = run_in(
        &dir,
        &[
            "simulate", "--lambda", "1", "--c", "2", "--sigma", "0.5", "--delta", "1", "--x", "1",
            "--t", "20", "--seed", "7", "--out", "-",
        ],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,event,surplus"));
    let last = text.lines().last().unwrap();
    let event = last.split(',').nth(1).unwrap();
    assert!(
        ["barrier", "ruin", "horizon"].contains(&event),
        "terminal event was `{event}`"
    );
    for line in text.lines().skip(1) {
        let event = line.split(',').nth(1).unwrap();
        assert!(["claim", "barrier", "ruin", "horizon"].contains(&event));
    }
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_command_probability_table() {
    let dir = tmpdir("exit");
    let out = run_in(
        &dir,
        &[
            "exit", "--lambda", "1", "--c", "2", "--sigma", "0.5", "--delta", "1", "--x", "0,1,3",
            "--a", "3", "--h", "0.005", "--xmax", "5", "--out", "-",
        ],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let probs: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(probs.len(), 3);
    assert_eq!(probs[0], 0.0, "W(0)/W(a) = 0 with a Brownian part");
    assert!(probs[1] > 0.0 && probs[1] < 1.0);
    assert!((probs[2] - 1.0).abs() < 1e-14, "x = a gives 1");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn ruin_with_mc_columns() {
    let dir = tmpdir("ruinmc");
    let out = run_in(
        &dir,
        &[
            "ruin", "--lambda", "1", "--c", "2", "--sigma", "0.5", "--delta", "1", "--x", "1",
            "--h", "0.005", "--paths", "4000", "--mc", "--out", "-",
        ],
    );
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("x,analytic_survival,analytic_ruin,mc_ruin,mc_stderr")
    );
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let (survival, ruin, mc_ruin, mc_se) = (row[1], row[2], row[3], row[4]);
    assert!((survival + ruin - 1.0).abs() < 1e-14);
    assert!(
        (ruin - mc_ruin).abs() < 4.0 * mc_se + 1e-4,
        "analytic {ruin} vs mc {mc_ruin}"
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_command_is_config_error() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
