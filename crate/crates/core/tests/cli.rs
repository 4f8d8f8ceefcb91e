//! End-to-end tests of the command-line binary.

use std::path::PathBuf;
use std::process::{Command, Output};

const EXAMPLE_LT: &str = "\
alphabet f:2 g:1 k:0
output a b
axiom _ q0 _
rule q0 f -> _ q1:2 b q2:1 _
rule q0 g -> _ q0:1 _
rule q0 k -> _
rule q1 f -> _ q0:1 _ q0:2 _
rule q1 g -> ab q1:1 _
rule q1 k -> a
rule q2 f -> _ q0:1 _ q0:2 _
rule q2 g -> ab q2:1 _
rule q2 k -> ab
";

const EXAMPLE_DTA: &str = "\
dta start h0
delta h0 f -> h1 h1
delta h1 g -> h1
delta h1 k ->
";

/// A scratch directory unique to this test binary run.
fn workdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lt-equiv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(name: &str, contents: &str) -> PathBuf {
    let path = workdir().join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lt-equiv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn arg(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_reports_self_equivalence() {
    let m = write("m.lt", EXAMPLE_LT);
    let b = write("b.dta", EXAMPLE_DTA);
    let out = run(&["check", arg(&m), arg(&m), "--dta", arg(&b)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("RESULT equivalent"));
}

#[test]
fn check_reports_witness_for_mutated_rule() {
    let m = write("m2.lt", EXAMPLE_LT);
    let bad = write(
        "mbad.lt",
        &EXAMPLE_LT.replace("rule q2 k -> ab", "rule q2 k -> a"),
    );
    let b = write("b2.dta", EXAMPLE_DTA);
    let out = run(&["check", arg(&m), arg(&bad), "--dta", arg(&b)]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("RESULT inequivalent"));
    assert!(text.contains("WITNESS f(k,k)"));
    assert!(text.contains("LEFT abab"));
    assert!(text.contains("RIGHT aba"));
}

#[test]
fn eval_prints_the_output_word() {
    let m = write("m3.lt", EXAMPLE_LT);
    let out = run(&["eval", arg(&m), "--tree", "f(k,k)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "abab");
}

#[test]
fn normalize_round_trips_through_check() {
    let m = write("m4.lt", EXAMPLE_LT);
    let b = write("b4.dta", EXAMPLE_DTA);
    let out = run(&["normalize", arg(&m), "--dta", arg(&b)]);
    assert_eq!(out.status.code(), Some(0));
    let normalized = write("m4norm.lt", &stdout(&out));
    let check = run(&["check", arg(&m), arg(&normalized), "--dta", arg(&b)]);
    assert_eq!(check.status.code(), Some(0));
    assert!(stdout(&check).contains("RESULT equivalent"));
}

#[test]
fn abstract_lists_periodic_states() {
    let m = write("m5.lt", EXAMPLE_LT);
    let b = write("b5.dta", EXAMPLE_DTA);
    let out = run(&["abstract", arg(&m), "--dta", arg(&b)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().all(|l| l.starts_with("STATE ")));
    assert!(text.contains("PERIODIC"));
}

#[test]
fn oracle_finds_the_same_witness() {
    let m = write("m6.lt", EXAMPLE_LT);
    let bad = write(
        "m6bad.lt",
        &EXAMPLE_LT.replace("rule q2 k -> ab", "rule q2 k -> a"),
    );
    let b = write("b6.dta", EXAMPLE_DTA);
    let out = run(&["oracle", arg(&m), arg(&bad), "--dta", arg(&b), "--depth", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("RESULT inequivalent"));
    assert!(text.contains("WITNESS "));
    assert!(text.contains("LEFT "));
    assert!(text.contains("RIGHT "));
}

#[test]
fn parse_errors_name_file_and_line() {
    let broken = write("broken.lt", "alphabet f:2 k:0\noutput a b\nnonsense here\n");
    let b = write("b7.dta", EXAMPLE_DTA);
    let out = run(&["check", arg(&broken), arg(&broken), "--dta", arg(&b)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("broken.lt:3:"), "stderr was: {err}");
}

#[test]
fn empty_domain_exits_with_report() {
    let m = write("m8.lt", EXAMPLE_LT);
    let b = write("b8.dta", "dta start h0\ndelta h0 g -> h0\n");
    let out = run(&["check", arg(&m), arg(&m), "--dta", arg(&b)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("RESULT empty-domain"));
}

#[test]
fn gen_is_deterministic_and_valid() {
    let one = run(&["gen", "--seed", "11"]);
    let two = run(&["gen", "--seed", "11"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(stdout(&one), stdout(&two));
    // the generated pair round-trips through its own files and self-checks
    let text = stdout(&one);
    let split = text.find("# domain automaton").unwrap();
    let m = write("gen.lt", &text[..split]);
    let b = write("gen.dta", &text[split..]);
    let check = run(&["check", arg(&m), arg(&m), "--dta", arg(&b)]);
    let code = check.status.code();
    assert!(code == Some(0) || code == Some(2), "unexpected exit {code:?}");
}
