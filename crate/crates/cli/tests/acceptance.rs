//! End-to-end acceptance run: each test drives the experiment subcommands at full scale,
//! evaluates the resulting directory with `summarize`, and prints one PASS/FAIL line.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::Mutex;

use clap::Parser;
use sobolev_lab::{run, summarize, Cli};

// Criteria with runtime budgets are timed, so experiments never overlap.
static SERIAL: Mutex<()> = Mutex::new(());

fn exec(out: &Path, args: &[&str]) {
    let mut argv = vec!["sobolev-lab"];
    argv.extend_from_slice(args);
    let out = out.to_str().unwrap();
    argv.extend_from_slice(&["--out-dir", out]);
    run(Cli::parse_from(argv)).unwrap_or_else(|e| panic!("{args:?}: {e}"));
}

fn check(id: u8, compare: Option<&Path>, dir: &Path) {
    let report = summarize(dir, compare).unwrap();
    let c = report.criterion(id).unwrap_or_else(|| panic!("criterion {id} not evaluated"));
    let line = format!("criterion {id:>2} {} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.title, c.measured);
    // Written straight to the stream so the line shows up without --nocapture.
    writeln!(std::io::stderr(), "\n{line}").unwrap();
    assert!(c.pass, "{line}");
}

fn criterion(id: u8, runs: &[&[&str]]) {
    let _guard = SERIAL.lock().unwrap_or_else(|p| p.into_inner());
    let dir = tempfile::tempdir().unwrap();
    for args in runs {
        exec(dir.path(), args);
    }
    check(id, None, dir.path());
}

#[test]
fn c01_condition_number_law() {
    criterion(1, &[&["landscape", "--random-points", "1000", "--random-dims", "2,8,32"]]);
}

#[test]
fn c02_hessian_spectra() {
    criterion(2, &[&["landscape", "--random-points", "1000", "--random-dims", "2,8,32"]]);
}

#[test]
fn c03_one_step_gd() {
    criterion(3, &[&["gd-compare", "--points", "500", "--eta-factor", "0.9"]]);
}

#[test]
fn c04_sobolev_flow_acceleration() {
    criterion(4, &[&["flow", "--kind", "both", "--dim", "8", "--inits", "100", "--step", "1e-3", "--t-end", "10"]]);
}

#[test]
fn c05_lambda_and_quadratic_forms() {
    criterion(5, &[&["landscape", "--random-points", "1", "--quad-grid", "1000"]]);
}

#[test]
fn c06_relu_squared_descent() {
    criterion(6, &[&["relusq", "--dim", "4", "--points", "1000", "--inits", "100"]]);
}

#[test]
fn c07_multinode_dynamics() {
    criterion(7, &[&["multinode", "--k-values", "2,4,8", "--starts", "100", "--tol", "1e-6", "--near-tol", "1e-4"]]);
}

#[test]
fn c08_toeplitz_linearization() {
    criterion(8, &[&["toeplitz", "--k-values", "3,5,8"]]);
}

#[test]
fn c09_monte_carlo_verification() {
    criterion(
        9,
        &[&["verify-gradients", "--dims", "4,16,64", "--n-min", "10", "--n-max", "17", "--pointwise-n", "1000000"]],
    );
}

#[test]
fn c10_empirical_sgd() {
    criterion(
        10,
        &[&["sgd", "--dim", "16", "--learning-rate", "1e-2", "--batch-size", "64", "--n-train", "10000", "--seeds", "12"]],
    );
}

#[test]
fn c11_linear_model() {
    criterion(11, &[&["linear", "--trials", "10000"]]);
}

#[test]
fn c12_chebyshev_differentiation() {
    criterion(12, &[&["chebyshev", "--n-max", "20"]]);
}

const SMALL_RUNS: [&[&str]; 10] = [
    &["landscape", "--random-points", "40", "--quad-grid", "50"],
    &["gd-compare", "--points", "40"],
    &["flow", "--inits", "6", "--t-end", "1"],
    &["relusq", "--points", "40", "--inits", "6", "--t-end", "1"],
    &["multinode", "--starts", "6", "--near-starts", "3", "--t-max", "300"],
    &["toeplitz"],
    &["sgd", "--seeds", "3", "--n-steps", "200", "--n-train", "1000"],
    &["verify-gradients", "--dims", "4,8", "--n-min", "8", "--n-max", "10", "--trials", "3", "--pointwise-points", "1", "--pointwise-n", "20000"],
    &["linear", "--designs", "2", "--trials", "500"],
    &["chebyshev"],
];

#[test]
fn c13_determinism_across_thread_counts() {
    let _guard = SERIAL.lock().unwrap_or_else(|p| p.into_inner());
    let root = tempfile::tempdir().unwrap();
    let dirs = [root.path().join("one"), root.path().join("three")];
    for (dir, threads) in dirs.iter().zip(["1", "3"]) {
        for args in SMALL_RUNS {
            let status = Command::new(env!("CARGO_BIN_EXE_sobolev-lab"))
                .args(args)
                .args(["--seed", "11", "--threads", threads, "--out-dir"])
                .arg(dir)
                .output()
                .unwrap()
                .status;
            assert!(status.success(), "{args:?} with {threads} threads");
        }
    }
    check(13, Some(&dirs[1]), &dirs[0]);
}
