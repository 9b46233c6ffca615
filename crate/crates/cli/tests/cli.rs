//! End-to-end tests of the binary: exit-code contract, output formats,
//! determinism, and canonical round-trips.

use std::path::PathBuf;
use std::process::{Command, Output};

use eqcoupling_cli::instance::{emit_instance, parse_instance};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eqcoupling"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8 output")
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join(name);
    std::fs::write(&path, contents).expect("write temp file");
    // keep the directory alive for the test process
    std::mem::forget(dir);
    path
}

const NON_MEASURABLE: &str = r#"{
  "atoms": ["a", "b", "c"],
  "sigma": [[0, 1], [2]],
  "relation": {"classes": [[0], [1, 2]]},
  "P": ["1/2", "1/2"],
  "Pprime": ["1/2", "1/2"]
}
"#;

const CHAIN_INSTANCE: &str = r#"{
  "atoms": ["00", "01", "10", "11"],
  "sigma": "powerset",
  "P": ["1/4", "1/4", "1/4", "1/4"],
  "Pprime": ["1", "0", "0", "0"],
  "chain": [
    {"classes": [[0], [1], [2], [3]]},
    {"classes": [[0, 2], [1, 3]]}
  ]
}
"#;

#[test]
fn check_on_quotient_example_passes_with_exit_zero() {
    let output = run(&["check", fixture("quotient4.json").to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("\"verdict\": \"pass\""));
    assert!(text.contains("\"value\": \"0\""));
    assert!(text.contains("\"oracle_value\": \"0\""));
}

#[test]
fn solve_reports_value_and_witness() {
    let output = run(&[
        "solve",
        fixture("point_mass.json").to_str().unwrap(),
        "--with-coupling",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("\"value\": \"1/2\""));
    assert!(text.contains("\"coupling\""));
}

#[test]
fn solve_on_non_measurable_relation_exits_two_naming_the_precondition() {
    let path = write_temp("nonmeas.json", NON_MEASURABLE);
    let output = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("is_measurable"));
}

#[test]
fn malformed_instances_exit_two_with_positioned_diagnostics() {
    let bad_sum = write_temp(
        "bad_sum.json",
        r#"{"atoms":["a","b"],"sigma":"powerset","relation":{"classes":[[0],[1]]},
            "P":["1/2","1/4"],"Pprime":["1/2","1/2"]}"#,
    );
    let output = run(&["solve", bad_sum.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("P: masses sum to 3/4"));

    let bad_pairs = write_temp(
        "bad_pairs.json",
        r#"{"atoms":["a","b","c"],"sigma":"powerset",
            "relation":{"pairs":[[0,1],[1,0],[1,2],[2,1]],"close":false},
            "P":["1/3","1/3","1/3"],"Pprime":["1/3","1/3","1/3"]}"#,
    );
    let output = run(&["solve", bad_pairs.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("relation"));

    let output = run(&["solve", "/nonexistent/path.json"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_two() {
    let output = run(&["frobnicate"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn float_arithmetic_is_rejected_for_exact_commands() {
    for command in ["solve", "check", "chain"] {
        let output = run(&[
            command,
            fixture("quotient4.json").to_str().unwrap(),
            "--arith",
            "float",
        ]);
        assert_eq!(output.status.code(), Some(2), "command {command}");
        let err = String::from_utf8(output.stderr).unwrap();
        assert!(err.contains("exact"), "command {command}");
    }
    // but it is tolerated where no duality verdict is produced
    let output = run(&[
        "tv",
        fixture("quotient4.json").to_str().unwrap(),
        "--arith",
        "float",
    ]);
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn chain_emits_ledger_and_passes() {
    let path = write_temp("chain.json", CHAIN_INSTANCE);
    let output = run(&["chain", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("\"value\": \"1/2\""));
    assert!(text.contains("\"ledger_ok\": true"));
    assert!(text.contains("\"success_mass\": \"1/4\""));
}

#[test]
fn demo_bitflip_reports_half() {
    let output = run(&[
        "demo",
        "bitflip",
        "--min-horizon",
        "3",
        "--max-horizon",
        "3",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("\"success_mass\": \"1/2\""));
}

#[test]
fn demo_records_render_as_csv_tables() {
    let output = run(&[
        "demo",
        "bitflip",
        "--min-horizon",
        "2",
        "--max-horizon",
        "4",
        "--format",
        "csv",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "horizon,success_mass,uniform_marginals,verdict"
    );
    assert_eq!(lines.next().unwrap(), "2,1/2,true,pass");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "check",
        "--random",
        "40",
        "--seed",
        "7",
        "--max-atoms",
        "10",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);

    // a different seed still verifies but may differ textually; the
    // contract is only determinism per seed
    let other = run(&[
        "check",
        "--random",
        "40",
        "--seed",
        "8",
        "--max-atoms",
        "10",
    ]);
    assert_eq!(other.status.code(), Some(0));
}

#[test]
fn out_flag_writes_the_records_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("record.json");
    let output = run(&[
        "check",
        fixture("quotient4.json").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).is_empty());
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert!(written.contains("\"verdict\": \"pass\""));
}

#[test]
fn canonical_instance_files_round_trip_byte_identically() {
    for name in ["quotient4.json", "point_mass.json"] {
        let bytes = std::fs::read(fixture(name)).unwrap();
        let parsed = parse_instance(&bytes).unwrap();
        let emitted = emit_instance(&parsed);
        assert_eq!(
            emitted.as_bytes(),
            bytes.as_slice(),
            "fixture {name} is not in canonical form"
        );
        let reparsed = parse_instance(emitted.as_bytes()).unwrap();
        assert_eq!(emit_instance(&reparsed), emitted);
    }
}

#[test]
fn galois_reports_duals_and_adjunction() {
    let with_sets = write_temp(
        "sets.json",
        r#"{
  "atoms": ["a", "b", "c"],
  "sigma": "powerset",
  "relation": {"classes": [[0, 1], [2]]},
  "sets": [[0, 1]]
}
"#,
    );
    let output = run(&["galois", with_sets.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("\"double_dual_equals_relation\": true"));
    assert!(text.contains("\"adjunction_holds\": true"));
    assert!(text.contains("\"is_basic\": true"));
}

#[test]
fn galois_skips_the_adjunction_for_non_measurable_sets() {
    // {0,2} is not a union of the sigma blocks {0,1},{2}; the adjunction
    // comparison is only defined for measurable families
    let with_sets = write_temp(
        "nonmeas_sets.json",
        r#"{
  "atoms": ["a", "b", "c"],
  "sigma": [[0, 1], [2]],
  "relation": {"classes": [[0, 1], [2]]},
  "sets": [[0, 2]]
}
"#,
    );
    let output = run(&["galois", with_sets.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(!text.contains("adjunction_holds"));
    assert!(text.contains("adjunction not evaluated"));
    assert!(text.contains("\"family_dual_classes\""));
}
