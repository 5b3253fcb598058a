//! End-to-end tests of the `erl` binary: subcommand pipelines, exit codes,
//! and byte-level determinism of outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn erl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_erl"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("erl-cli-{}-{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn gen_random_mdp(dir: &Path, seed: u64) -> PathBuf {
    let path = dir.join(format!("mdp_{seed}.json"));
    run_ok(erl().args([
        "gen",
        "--kind",
        "random",
        "--seed",
        &seed.to_string(),
        "--states",
        "3",
        "--actions",
        "2",
        "--horizon",
        "3",
        "--support",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]));
    path
}

#[test]
fn check_passes_on_generated_instances_and_leaves_inputs_alone() {
    let dir = temp_dir("check");
    let mdp = gen_random_mdp(&dir, 12);
    let before = fs::read(&mdp).unwrap();
    for beta in ["1.0", "-1.0"] {
        let out = run_ok(erl().args(["check", "--mdp", mdp.to_str().unwrap(), "--beta", beta]));
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains("ok   - oracle_equivalence"));
        assert!(stdout.contains("ok   - condition1_residuals"));
        assert!(stdout.contains("ok   - decomposition_residuals"));
        assert!(stdout.contains("ok   - gap_nonnegativity"));
    }
    assert_eq!(
        before,
        fs::read(&mdp).unwrap(),
        "check must not mutate its input"
    );
}

#[test]
fn lb_gen_solve_gaps_pipeline_matches_the_closed_form() {
    let dir = temp_dir("pipeline");
    let mdp = dir.join("bandit1.json");
    run_ok(erl().args([
        "lb-gen",
        "--beta",
        "1.0",
        "--horizon",
        "3",
        "--regime",
        "large-beta",
        "--out",
        mdp.to_str().unwrap(),
    ]));

    let solve_out = dir.join("tables.json");
    run_ok(erl().args([
        "solve",
        "--mdp",
        mdp.to_str().unwrap(),
        "--beta",
        "1.0",
        "--out",
        solve_out.to_str().unwrap(),
    ]));
    let tables: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&solve_out).unwrap()).unwrap();
    assert_eq!(tables["beta"], 1.0);
    // closed form: V*_1(s0) = log(p1·e^{H-1·β} + 1 - p1), p1 = e^{-2}(1 + 1/4)
    let p1 = (-2.0f64).exp() * 1.25;
    let expected = (p1 * 2.0f64.exp() + 1.0 - p1).ln();
    let got = tables["V"][0][0].as_f64().unwrap();
    assert!(
        (got - expected).abs() < 1e-12,
        "V*_1(s0) = {got}, expected {expected}"
    );

    let gaps_out = dir.join("gaps.json");
    run_ok(erl().args([
        "gaps",
        "--mdp",
        mdp.to_str().unwrap(),
        "--beta",
        "1.0",
        "--out",
        gaps_out.to_str().unwrap(),
    ]));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&gaps_out).unwrap()).unwrap();
    let xi = (-2.0f64).exp() / 4.0;
    let closed_form = (2.0f64.exp() - 1.0).abs() * xi; // ψ̄ = 1, |β| = 1
    let delta_min = report["delta_min"].as_f64().unwrap();
    assert!(
        (delta_min - closed_form).abs() < 1e-9,
        "delta_min {delta_min} vs {closed_form}"
    );
    assert_eq!(report["witness"]["h"], 1);
    assert_eq!(report["witness"]["s"], 0);
    assert_eq!(report["witness"]["a"], 1);
    assert_eq!(report["mode"], "reachable_only");
}

#[test]
fn lb_gen_names_the_violated_inequality() {
    let dir = temp_dir("lbgen-bad");
    let out = erl()
        .args([
            "lb-gen",
            "--beta",
            "0.1",
            "--horizon",
            "3",
            "--regime",
            "large-beta",
            "--out",
            dir.join("x.json").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("|beta|*(H-1) >= log(4)"),
        "stderr: {stderr}"
    );
}

#[test]
fn run_produces_byte_identical_traces() {
    let dir = temp_dir("run-determinism");
    let mdp = gen_random_mdp(&dir, 4);
    let mut outputs = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.join(sub);
        run_ok(erl().args([
            "run",
            "--mdp",
            mdp.to_str().unwrap(),
            "--agent",
            "rsq2",
            "--beta",
            "0.8",
            "--episodes",
            "200",
            "--seed",
            "3",
            "--out",
            out_dir.to_str().unwrap(),
        ]));
        let trace = fs::read_dir(&out_dir)
            .unwrap()
            .next()
            .unwrap()
            .unwrap()
            .path();
        assert!(trace
            .file_name()
            .unwrap()
            .to_str()
            .unwrap()
            .starts_with("trace_"));
        outputs.push(fs::read(trace).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.pop().unwrap()).unwrap();
    assert!(text.starts_with(
        "episode,inst_regret,cum_regret,exp_regret_inc,cum_exp_regret,optimism_violation\n"
    ));
    assert_eq!(text.lines().count(), 201);
}

#[test]
fn sweep_rows_are_sorted_and_worker_count_invariant() {
    let dir = temp_dir("sweep");
    let mdp = gen_random_mdp(&dir, 9);
    let config = dir.join("sweep.json");
    fs::write(
        &config,
        format!(
            r#"{{
  "experiments": [
    {{"mdp": {{"file": "{name}"}}, "agent": "rsvi2", "beta": 0.5, "episodes": 100, "bonus_c": 0.5, "delta": 0.1, "seeds": [3, 1, 2], "parallelism": 4}},
    {{"mdp": {{"file": "{name}"}}, "agent": "uniform_random", "beta": 0.5, "episodes": 100, "delta": 0.1, "seeds": [7]}}
  ]
}}
"#,
            name = mdp.file_name().unwrap().to_str().unwrap()
        ),
    )
    .unwrap();

    let mut bytes = Vec::new();
    for workers in ["1", "4"] {
        let out_dir = dir.join(format!("out{workers}"));
        run_ok(erl().env("ERL_THREADS", workers).args([
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]));
        bytes.push(fs::read(out_dir.join("aggregate.csv")).unwrap());
    }
    assert_eq!(
        bytes[0], bytes[1],
        "worker count changed sweep output bytes"
    );

    let text = String::from_utf8(bytes.pop().unwrap()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "header + 4 cells:\n{text}");
    assert!(lines[0].starts_with("config_index,config_hash,agent,"));
    // sorted by (config index, seed), independent of listed order
    let seeds: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(7).unwrap())
        .collect();
    assert_eq!(seeds, vec!["1", "2", "3", "7"]);
    for line in &lines[1..] {
        assert!(line.contains(",ok,"), "cell not ok: {line}");
    }
}

#[test]
fn solve_risk_neutral_emits_neutral_tables() {
    let dir = temp_dir("neutral");
    let mdp = gen_random_mdp(&dir, 5);
    let out = run_ok(erl().args(["solve", "--mdp", mdp.to_str().unwrap(), "--risk-neutral"]));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["risk_neutral"], true);
    assert!(doc["V"].is_array());
}

#[test]
fn usage_errors_exit_with_code_two() {
    let out = erl().output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = erl().args(["solve"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--mdp"));

    let out = erl()
        .args(["gaps", "--mdp", "whatever.json", "--beta", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--risk-neutral"));

    let out = erl()
        .args([
            "run",
            "--mdp",
            "x.json",
            "--agent",
            "dqn",
            "--beta",
            "1",
            "--episodes",
            "5",
            "--seed",
            "1",
            "--out",
            "/tmp/x",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_fails_on_an_invalid_mdp() {
    let dir = temp_dir("badmdp");
    let path = dir.join("bad.json");
    fs::write(
        &path,
        r#"{"S":1,"A":1,"H":1,"s1":0,"rewards":[[[1.5]]],"transitions":[[[[1.0]]]]}"#,
    )
    .unwrap();
    let out = erl()
        .args(["check", "--mdp", path.to_str().unwrap(), "--beta", "1.0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reward out of [0,1]"));
}
