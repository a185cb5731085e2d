use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_negrate"))
        .args(args)
        .output()
        .expect("failed to launch negrate")
}

fn golden(name: &str, args: &[&str]) {
    let out = run(args);
    assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    let got = String::from_utf8(out.stdout).unwrap();
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(got, want, "output of {name} changed");
}

fn exit_code(args: &[&str]) -> i32 {
    run(args).status.code().expect("terminated by signal")
}

#[test]
fn price_negative_rate_put() {
    golden(
        "price_negative_rate_put.txt",
        &[
            "price", "--method", "kim-fpbprime", "-S", "100", "-K", "100", "-r", "-0.005", "-q", "-0.01", "-v", "0.08",
            "-T", "15", "--put", "-m", "5", "-n", "8", "-l", "11", "-p", "21",
        ],
    );
}

#[test]
fn price_json() {
    golden(
        "price_positive_put.json",
        &["price", "-S", "100", "-r", "0.05", "-q", "0", "-v", "0.2", "-T", "1", "--output", "json"],
    );
}

#[test]
fn region_flags() {
    golden("region_never_optimal.txt", &["region", "-r", "-0.01", "-q", "-0.005", "--put"]);
    golden("region_double.txt", &["region", "-r", "-0.005", "-q", "-0.01", "-v", "0.08", "--put"]);
}

#[test]
fn call_boundary() {
    golden(
        "boundary_call.txt",
        &["boundary", "-r", "0.05", "-q", "0.02", "-v", "0.2", "-T", "1", "--points", "5", "--call"],
    );
}

#[test]
fn fdm_boundary_opens_late() {
    golden(
        "boundary_fdm_negative.txt",
        &["boundary", "--method", "fdm", "-r", "-0.005", "-q", "-0.01", "-v", "0.15", "-T", "5"],
    );
    let text = std::fs::read_to_string(
        [env!("CARGO_MANIFEST_DIR"), "tests", "golden", "boundary_fdm_negative.txt"].iter().collect::<PathBuf>(),
    )
    .unwrap();
    let first = text
        .lines()
        .skip(1)
        .find(|l| !l.ends_with("-\t-"))
        .and_then(|l| l.split('\t').next())
        .and_then(|t| t.parse::<f64>().ok())
        .unwrap();
    assert!((2.2..2.6).contains(&first), "exercise region opens at t={first}");
}

#[test]
fn exit_codes() {
    assert_eq!(exit_code(&["--help"]), 0);
    assert_eq!(exit_code(&["frobnicate"]), 2);
    assert_eq!(exit_code(&["price", "-S", "0", "-r", "0.01", "-q", "0", "-v", "0.2", "-T", "1"]), 2);
    assert_eq!(
        exit_code(&["price", "--method", "kim-fpa", "-S", "100", "-r", "-0.01", "-q", "0", "-v", "0.2", "-T", "1"]),
        2
    );
    assert_eq!(
        exit_code(&["price", "--method", "bounds", "-S", "100", "-r", "0.01", "-q", "0", "-v", "0.2", "-T", "1"]),
        2
    );
}
