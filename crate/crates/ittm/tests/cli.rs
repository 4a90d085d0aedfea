//! Drives the compiled binary end to end: output shapes, exit codes,
//! ledger idempotence, and worker invariance.

use std::path::Path;
use std::process::{Command, Output};

use ittm::ittm::{IttmAction, IttmTarget};
use ittm::{Dir, ITTMachine};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ittm"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../machines")
        .join(name)
        .to_str()
        .expect("utf8 path")
        .to_string()
}

/// One state, all actions "keep the tape, move right, stay". Never
/// halts; every limit snapshot is the same blank configuration.
fn right_mover_table() -> String {
    ITTMachine::from_fn(1, |_, t| IttmAction { write: t, dir: Dir::R, next: IttmTarget::State(0) })
        .encode()
}

#[test]
fn encode_and_decode_are_inverse_on_the_command_line() {
    let out = run(&["encode", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "111(0)^w\n");

    let out = run(&["decode", "111(0)^w"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "3\n");

    // Bare bits carry an implied all-zero continuation.
    let out = run(&["decode", "110"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "2\n");

    // A 1 inside the period is not a numeral, but it is a valid tape.
    let out = run(&["decode", "1(1)^w"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "undefined (not a unary numeral)\n");
}

#[test]
fn malformed_tape_text_is_an_input_error() {
    let out = run(&["decode", "1x0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn malformed_machine_text_is_an_input_error() {
    let out = run(&["sim", "--machine", "definitely-not-a-machine"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["itsim", "--machine", "not a table; not a file"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulating_a_halting_classical_machine_reports_the_run() {
    let out = run(&["sim", "--machine", "1RB1LB_1LA1RH"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("halted after 6 steps"), "{text}");
    assert!(text.contains("ones: 4"), "{text}");
}

#[test]
fn simulating_a_cycler_reports_the_proof() {
    let out = run(&["sim", "--machine", "0RA1RH"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("never halts"));
}

#[test]
fn the_one_writer_halts_at_stage_one_with_a_single_one() {
    let out = run(&["itsim", "--machine", &fixture("onewriter.ittm"), "--rule", "limsup"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("Halted at w*0+1"), "{text}");
    assert!(text.contains("output: 1(0)^w"), "{text}");
}

#[test]
fn the_right_mover_is_certified_nonhalting() {
    let out = run(&["itsim", "--machine", &right_mover_table()]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("never halts"), "{text}");
    assert!(text.contains("w*1+0") && text.contains("w*2+0"), "{text}");
}

#[test]
fn an_exhausted_limit_budget_is_undetermined_with_exit_one() {
    let out = run(&["itsim", "--machine", &right_mover_table(), "--max-limits", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("undetermined"));
}

#[test]
fn sigma_two_is_exact_with_the_known_champion() {
    let out = run(&["sigma", "--n", "2", "--budget", "10000"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("sigma(2) = 4 (Exact, rado)"), "{text}");
    assert!(text.contains("champion: 1RB1LB_1LA1RH"), "{text}");
    assert!(text.contains("unresolved: 0"), "{text}");
}

#[test]
fn stime_two_is_exact() {
    let out = run(&["stime", "--n", "2"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("stime(2) = 6 (Exact, steps)"));
}

#[test]
fn a_search_certificate_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("champion.json");
    let out = run(&[
        "sigma-inf-lb",
        "--n",
        "1",
        "--certificate-out",
        cert.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("sigma-inf(1) >= 1"));

    let out = run(&["verify", "--certificate", cert.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("certificate verifies"));

    // Break the claimed value; the replay must reject it.
    let text = std::fs::read_to_string(&cert).unwrap();
    let broken = text.replace("\"value\":1", "\"value\":7");
    assert_ne!(text, broken);
    let bad = dir.path().join("broken.json");
    std::fs::write(&bad, broken).unwrap();
    let out = run(&["verify", "--certificate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("certificate rejected"));

    // Unparseable files are input errors, not rejections.
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "not json").unwrap();
    let out = run(&["verify", "--certificate", garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn composing_the_successor_doubles_its_application() {
    let out = run(&["compose", "--machine", &fixture("successor.ittm"), "--x", "2"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("x=2"), "{text}");
    assert!(text.contains("(unary 4)"), "{text}");
}

#[test]
fn a_ledgered_search_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("runs.jsonl");
    let first = run(&["sigma", "--n", "2", "--ledger", ledger.to_str().unwrap()]);
    assert!(first.status.success());
    let lines_after_first = std::fs::read_to_string(&ledger).unwrap().lines().count();

    let second = run(&["sigma", "--n", "2", "--ledger", ledger.to_str().unwrap()]);
    assert!(second.status.success());
    let lines_after_second = std::fs::read_to_string(&ledger).unwrap().lines().count();

    assert_eq!(stdout_of(&first), stdout_of(&second));
    assert_eq!(lines_after_first, lines_after_second, "re-run must add no rows");
}

#[test]
fn reports_do_not_depend_on_the_worker_count() {
    let one = run(&["sigma", "--n", "2", "--workers", "1"]);
    let eight = run(&["sigma", "--n", "2", "--workers", "8"]);
    assert!(one.status.success() && eight.status.success());
    assert_eq!(stdout_of(&one), stdout_of(&eight));
}
