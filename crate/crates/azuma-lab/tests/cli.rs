//! End-to-end tests of the azuma-lab binary: exit codes, output formats,
//! reproducibility, and the frozen values of the documented invocations.

use std::process::{Command, Output};

use azuma_lab::report::strip_timestamps;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_azuma-lab"))
        .args(args)
        .env_remove("AZUMA_LAB_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn documented_bound_examples_are_frozen() {
    let out = run(&["bound", "mult-upper", "--mu", "10", "--c", "2", "--delta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("value = 1.8887560283756183e-1"), "{text}");
    assert!(text.contains("sharp_log"), "{text}");

    let out = run(&["bound", "recycling", "--P", "16", "--M", "1024", "--eps", "0.01"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("threshold = 3.2193654459516188e3"), "{text}");
    assert!(text.contains("case = large_M"), "{text}");

    let out = run(&["bound", "compare", "--P", "16", "--M", "1024", "--delta", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("good_log = -6.4000000000000000e1"), "{text}");
    assert!(text.contains("bad_log = -8.0000000000000000e0"), "{text}");
    assert!(text.contains("good_wins = true"), "{text}");
}

#[test]
fn delta_grid_and_repeats_combine() {
    let out = run(&[
        "bound",
        "mult-upper",
        "--mu",
        "4",
        "--c",
        "1",
        "--delta",
        "0.25",
        "--delta-grid",
        "0.5:2:0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.matches("record = bound").count(), 5, "{text}");
}

#[test]
fn csv_format_groups_headers() {
    let out = run(&[
        "--format",
        "csv",
        "bound",
        "mult-lower",
        "--mu",
        "4",
        "--c",
        "1",
        "--delta-grid",
        "0.1:0.3:0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let headers = text
        .lines()
        .filter(|l| l.starts_with("record,"))
        .count();
    let rows = text.lines().filter(|l| l.starts_with("bound,")).count();
    assert_eq!(headers, 1, "{text}");
    assert_eq!(rows, 3, "{text}");
}

#[test]
fn out_flag_writes_the_file_and_keeps_stdout_empty() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.txt");
    let out = run(&[
        "--out",
        path.to_str().unwrap(),
        "bound",
        "additive",
        "--eps",
        "3",
        "--c",
        "1",
        "--c",
        "1",
        "--c",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("log = -7.5000000000000000e-1"), "{text}");
}

#[test]
fn simulate_is_reproducible_and_seed_sensitive() {
    let args = [
        "--trials",
        "2000",
        "simulate",
        "--adversary",
        "iid_bernoulli",
        "--n",
        "16",
        "--mu",
        "4",
        "--c",
        "1",
        "--delta",
        "0.5",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(
        strip_timestamps(&stdout(&a)),
        strip_timestamps(&stdout(&b))
    );

    let c = run(&[&["--seed", "7"], &args[..]].concat());
    assert_eq!(c.status.code(), Some(0));
    assert_ne!(
        strip_timestamps(&stdout(&a)),
        strip_timestamps(&stdout(&c))
    );
}

#[test]
fn recycle_per_game_emits_one_row_per_trial() {
    let out = run(&[
        "--trials",
        "40",
        "--format",
        "csv",
        "recycle",
        "--P",
        "4",
        "--M",
        "16",
        "--strategy",
        "eager",
        "--per-game",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("game,")).count(), 40, "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("recycle,")).count(), 1, "{text}");
}

#[test]
fn counterexample_waiting_mode_passes() {
    let out = run(&["--trials", "3000", "counterexample", "--P", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("mode = waiting"), "{text}");
    assert!(text.contains("falsified = true"), "{text}");
}

#[test]
fn verify_passes_and_the_injected_bad_bound_fails() {
    let ok = run(&["verify"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("verdict = PASS"));

    let bad = run(&["--inject-bad-bound", "verify"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("verdict = FAIL"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["bound", "mult-upper", "--mu", "10", "--c", "2"][..],
        &["bound", "mult-upper", "--mu", "-1", "--c", "2", "--delta", "1"],
        &["bound", "nonsense"],
        &["--trials", "0", "verify"],
        &["--confidence", "1.5", "verify"],
        &[
            "simulate",
            "--adversary",
            "unknown_name",
            "--n",
            "8",
            "--mu",
            "2",
            "--c",
            "1",
            "--delta",
            "1",
        ],
        &[
            "recycle",
            "--P",
            "4",
            "--M",
            "16",
            "--strategy",
            "unknown_name",
            "--eps",
            "0.1",
        ],
        &[
            "bound",
            "mult-upper",
            "--mu",
            "1",
            "--c",
            "1",
            "--delta-grid",
            "2:1:0.5",
        ],
        &[
            "bound",
            "mult-upper",
            "--mu",
            "1",
            "--c",
            "1",
            "--delta-grid",
            "1:2:0",
        ],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}: {}", stderr(&out));
    }
}

#[test]
fn invalid_thread_env_exits_with_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_azuma-lab"))
        .args(["bound", "mult-upper", "--mu", "1", "--c", "1", "--delta", "1"])
        .env("AZUMA_LAB_THREADS", "banana")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("AZUMA_LAB_THREADS"));
}
