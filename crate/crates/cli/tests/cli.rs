//! End-to-end tests of the snt binary: exit codes, report shapes, and
//! output determinism, driven through std::process::Command.

use std::path::PathBuf;
use std::process::{Command, Output};

fn snt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snt"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).expect("stdout parses as JSON")
}

fn tmp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("snt-cli-test-{}-{name}", std::process::id()))
}

#[test]
fn help_exits_zero_everywhere() {
    for args in [
        vec!["--help"],
        vec!["simulate", "--help"],
        vec!["verify", "--help"],
        vec!["verify", "fixed-point", "--help"],
        vec!["verify", "atom", "--help"],
        vec!["repro", "--help"],
    ] {
        let out = snt(&args);
        assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec![],
        vec!["verify"],
        vec!["verify", "no-such-check"],
        vec!["simulate", "--dist", "gamma:1,1"], // missing required flags
        vec!["verify", "atom"],                  // missing --b
        vec!["simulate", "--frobnicate"],
    ] {
        let out = snt(&args);
        assert_eq!(code(&out), 2, "{args:?} should be a usage error: {}", stderr(&out));
    }
}

#[test]
fn indicator_response_is_rejected_with_exit_three() {
    let out = snt(&[
        "simulate", "--dist", "gamma:1,1", "--response", "indicator:2", "--lambda", "1", "--n",
        "10",
    ]);
    assert_eq!(code(&out), 3);
    let msg = stderr(&out);
    assert!(msg.contains("condition A") && msg.contains("indicator"), "stderr: {msg}");
}

#[test]
fn infinite_mean_input_needs_explicit_horizon() {
    let base = [
        "simulate", "--dist", "linnik:0.5,1", "--response", "exp", "--lambda", "0.5", "--n",
        "200", "--seed", "7",
    ];
    let out = snt(&base);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("horizon"), "stderr: {}", stderr(&out));

    let csv = tmp_path("linnik.csv");
    let mut args = base.to_vec();
    let csv_str = csv.to_str().unwrap().to_string();
    args.extend_from_slice(&["--horizon", "60", "--out", &csv_str]);
    let out = snt(&args);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&csv).expect("sample file written");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,value");
    assert_eq!(lines.len(), 201, "header plus one row per draw");
    std::fs::remove_file(&csv).ok();
}

#[test]
fn fixed_point_check_passes_for_a_known_fixed_point() {
    let out = snt(&[
        "verify", "fixed-point", "--dist", "gamma:0.5,0.5", "--response", "sech2", "--lambda",
        "1", "--tol", "1e-6", "--points", "12",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["pass"], true);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["points"].as_array().unwrap().len(), 12);
}

#[test]
fn fixed_point_check_fails_on_supercritical_intensity() {
    // lambda * int h = 2 here: no fixed point, the residual must be large
    let out = snt(&[
        "verify", "fixed-point", "--dist", "gamma:1,1", "--response", "exp", "--lambda", "2",
        "--tol", "1e-6", "--points", "8",
    ]);
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["pass"], false);
    assert!(v["max_residual"].as_f64().unwrap() > 1e-2);
}

#[test]
fn atom_command_reports_root_or_null() {
    let out = snt(&["verify", "atom", "--b", "2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    let root = v["root"].as_f64().unwrap();
    assert!((root - 0.20318787).abs() < 1e-6, "root {root}");

    let out = snt(&["verify", "atom", "--b", "0.5"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["root"].is_null());

    let out = snt(&["verify", "atom", "--b", "-1"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("atom load"));
}

#[test]
fn simulate_reruns_are_byte_identical_and_seeds_matter() {
    let args = |path: &str, seed: &str| {
        vec![
            "simulate".to_string(),
            "--dist".into(),
            "gamma:0.5,0.5".into(),
            "--response".into(),
            "sech2".into(),
            "--lambda".into(),
            "1".into(),
            "--n".into(),
            "2000".into(),
            "--seed".into(),
            seed.into(),
            "--out".into(),
            path.into(),
        ]
    };
    let (pa, pb, pc) = (tmp_path("a.csv"), tmp_path("b.csv"), tmp_path("c.csv"));
    for (p, seed) in [(&pa, "7"), (&pb, "7"), (&pc, "8")] {
        let a: Vec<String> = args(p.to_str().unwrap(), seed);
        let refs: Vec<&str> = a.iter().map(|s| s.as_str()).collect();
        assert_eq!(code(&snt(&refs)), 0);
    }
    let (a, b, c) = (
        std::fs::read(&pa).unwrap(),
        std::fs::read(&pb).unwrap(),
        std::fs::read(&pc).unwrap(),
    );
    assert_eq!(a, b, "same seed, same bytes");
    assert_ne!(a, c, "different seed, different sample");
    for p in [pa, pb, pc] {
        std::fs::remove_file(p).ok();
    }
}

#[test]
fn thread_cap_does_not_change_results() {
    let run = |threads: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_snt"));
        if let Some(t) = threads {
            cmd.env("SNT_THREADS", t);
        }
        let out = cmd
            .args([
                "simulate", "--dist", "gamma:1,1", "--response", "exp", "--lambda", "0.5",
                "--n", "1500", "--seed", "11",
            ])
            .output()
            .expect("binary spawns");
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    assert_eq!(run(Some("1")), run(None));
}

#[test]
fn sd_logconvex_classifies_and_honours_expectations() {
    let out = snt(&["verify", "sd-logconvex", "--response", "sech2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["classification"], "log-concave");
    assert_eq!(v["pass"], true);

    let out =
        snt(&["verify", "sd-logconvex", "--response", "sech2", "--expect", "log-concave"]);
    assert_eq!(code(&out), 0);

    let out = snt(&["verify", "sd-logconvex", "--response", "sech2", "--expect", "log-convex"]);
    assert_eq!(code(&out), 1, "classification mismatch must fail");
    assert_eq!(json(&out)["pass"], false);

    let out = snt(&["verify", "sd-logconvex", "--response", "exp"]);
    assert_eq!(json(&out)["classification"], "log-linear");
    assert_eq!(code(&out), 0);
}

#[test]
fn levy_command_is_informational() {
    let out = snt(&[
        "verify", "levy", "--dist", "gamma:1,1", "--response", "exp", "--lambda", "1", "--x",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    // exponential input under the exponential response: the tail at 1 is
    // the exponential integral E1(1)
    let tail = v["points"][0]["tail"].as_f64().unwrap();
    assert!((tail - 0.21938393439552027).abs() < 1e-10, "tail {tail}");
}

#[test]
fn verify_report_file_mirrors_stdout() {
    let path = tmp_path("atom.json");
    let out = snt(&["verify", "atom", "--b", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let file = std::fs::read_to_string(&path).expect("report file written");
    assert_eq!(file, stdout(&out));
    std::fs::remove_file(&path).ok();
}

#[test]
fn repro_lists_and_runs_subsets() {
    let out = snt(&["repro", "--list"]);
    assert_eq!(code(&out), 0);
    let listing = stdout(&out);
    let ids: Vec<&str> = listing.lines().collect();
    assert_eq!(ids.len(), 12);
    assert!(ids.contains(&"atom-equation"));

    let out = snt(&["repro", "--only", "atom-equation,sech2-closed-form"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("PASS atom-equation"), "stdout: {text}");
    assert!(text.contains("2 scenarios: 2 passed, 0 failed"), "stdout: {text}");

    let out = snt(&["repro", "--only", "no-such-scenario"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("known:"));
}

#[test]
fn perpetuity_check_matches_its_target_law() {
    // short recursion at small n: the two-sample comparison is already
    // decisive and keeps this an end-to-end smoke test, not a benchmark
    let out = snt(&[
        "verify", "perpetuity", "--dist", "gamma:0.5,1", "--nu", "nu-beta:1,0.5", "--steps",
        "80", "--n", "4000", "--seed", "4242", "--target", "gamma:1.5,1",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["target_seed"], 4242 + 7777);
    assert!(v["statistic"].as_f64().unwrap() < v["critical"].as_f64().unwrap());
}
