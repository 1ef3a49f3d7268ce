//! Golden-file coverage for every CLI path: each case runs the binary with
//! fixed inputs and compares stdout byte-for-byte with a checked-in golden
//! file (regenerate with UPDATE_GOLDEN=1). Each case is also executed twice
//! to pin down byte-identical deterministic output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn check_golden(name: &str, args: &[&str], expect_code: i32) {
    let out = run(args);
    let code = out.status.code().expect("exit code");
    assert_eq!(
        code,
        expect_code,
        "{name}: exit {code}, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let again = run(args);
    assert_eq!(out.stdout, again.stdout, "{name}: output not deterministic");
    let path = golden_path(name);
    if std::env::var("UPDATE_GOLDEN").is_ok() {
        std::fs::write(&path, &out.stdout).expect("write golden");
        return;
    }
    let expected = std::fs::read(&path)
        .unwrap_or_else(|_| panic!("{name}: golden file missing, run with UPDATE_GOLDEN=1"));
    assert_eq!(
        out.stdout,
        expected,
        "{name}: output differs from golden file"
    );
}

#[test]
fn polarize_golden() {
    check_golden("polarize", &["polarize", "-i", &data("algebra.json")], 0);
}

#[test]
fn split_golden() {
    check_golden("split", &["split", "-i", &data("polar.json")], 0);
}

#[test]
fn hull_golden() {
    check_golden("hull", &["hull", "-i", &data("polar.json")], 0);
}

#[test]
fn check_subcommand_golden() {
    check_golden("check", &["check", "-i", &data("polar.json")], 0);
}

#[test]
fn witt_add_golden() {
    check_golden(
        "witt_add",
        &[
            "witt",
            "add",
            "--p",
            "3",
            "--length",
            "2",
            "-i",
            &data("polar.json"),
            "-a",
            &data("witt_u.json"),
            "-b",
            &data("witt_v.json"),
        ],
        0,
    );
}

#[test]
fn witt_frobenius_golden() {
    check_golden(
        "witt_frobenius",
        &[
            "witt",
            "frobenius",
            "--p",
            "3",
            "-i",
            &data("polar.json"),
            "-a",
            &data("witt_u.json"),
        ],
        0,
    );
}

#[test]
fn witt_verschiebung_golden() {
    check_golden(
        "witt_verschiebung",
        &[
            "witt",
            "verschiebung",
            "--p",
            "3",
            "-i",
            &data("polar.json"),
            "-a",
            &data("witt_w.json"),
        ],
        0,
    );
}

#[test]
fn witt_teichmuller_golden() {
    check_golden(
        "witt_teichmuller",
        &[
            "witt",
            "teichmuller",
            "--p",
            "3",
            "--length",
            "3",
            "--degree",
            "2",
            "-i",
            &data("polar.json"),
            "-a",
            &data("elem.json"),
        ],
        0,
    );
}

#[test]
fn cowitt_golden() {
    check_golden(
        "cowitt",
        &["cowitt", "-i", &data("polar.json"), "--n-max", "2"],
        0,
    );
}

#[test]
fn fmod_decompose_golden() {
    check_golden(
        "fmod_decompose",
        &["fmod", "decompose", "-i", &data("fmodule.json")],
        0,
    );
}

#[test]
fn fmod_lift_golden() {
    check_golden("fmod_lift", &["fmod", "lift", "-i", &data("fmodule.json")], 0);
}

#[test]
fn fmod_dualize_golden() {
    check_golden(
        "fmod_dualize",
        &["fmod", "dualize", "-i", &data("fmodule.json")],
        0,
    );
}

#[test]
fn dieudonne_compute_golden() {
    check_golden(
        "dieudonne_compute",
        &[
            "dieudonne",
            "compute",
            "-i",
            &data("polar.json"),
            "--n-max",
            "2",
        ],
        0,
    );
}

#[test]
fn dieudonne_compare_yes_golden() {
    check_golden(
        "dieudonne_compare_yes",
        &[
            "dieudonne",
            "compare",
            &data("dieudonne_a.json"),
            &data("dieudonne_b.json"),
        ],
        0,
    );
}

#[test]
fn dieudonne_compare_no_golden() {
    check_golden(
        "dieudonne_compare_no",
        &[
            "dieudonne",
            "compare",
            &data("dieudonne_a.json"),
            &data("dieudonne_c.json"),
        ],
        0,
    );
}

#[test]
fn hopf_cofree_golden() {
    check_golden(
        "hopf_cofree",
        &["hopf", "cofree", "-i", &data("algebra.json")],
        0,
    );
}

#[test]
fn hopf_primitives_golden() {
    check_golden(
        "hopf_primitives",
        &["hopf", "primitives", "-i", &data("hopf.json")],
        0,
    );
}

#[test]
fn hopf_verify_cofree_golden() {
    check_golden(
        "hopf_verify_cofree",
        &[
            "hopf",
            "verify-cofree",
            "lambda",
            "--j",
            "2",
            "--p",
            "3",
            "--max-degree",
            "54",
        ],
        0,
    );
}

#[test]
fn hopf_lambda_golden() {
    check_golden(
        "hopf_lambda",
        &["hopf", "lambda", "--j", "2", "--p", "3", "--max-degree", "18"],
        0,
    );
}

#[test]
fn hopf_counterexample_golden() {
    check_golden(
        "hopf_counterexample",
        &[
            "hopf",
            "counterexample",
            "--p",
            "3",
            "--j",
            "2",
            "--max-degree",
            "36",
        ],
        0,
    );
}

#[test]
fn dl_rewrite_golden() {
    check_golden(
        "dl_rewrite",
        &[
            "dl",
            "rewrite",
            "Q^5 bQ^2 Q^1",
            "--p",
            "3",
            "--n",
            "4",
            "--gen-degree",
            "2",
        ],
        0,
    );
}

#[test]
fn dl_basis_golden() {
    check_golden(
        "dl_basis",
        &[
            "dl",
            "basis",
            "--q",
            "2",
            "--n",
            "3",
            "--p",
            "3",
            "--max-degree",
            "30",
        ],
        0,
    );
}

#[test]
fn malformed_json_exits_2() {
    let out = run(&["polarize", "-i", &data("bad.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn prime_two_dl_exits_2() {
    let out = run(&["dl", "rewrite", "Q^3 Q^1", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mismatched_p_exits_2() {
    let out = run(&[
        "witt",
        "frobenius",
        "--p",
        "5",
        "-i",
        &data("polar.json"),
        "-a",
        &data("witt_u.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not match"));
}
