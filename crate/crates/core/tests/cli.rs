//! The command-line front end driven in-process.

use ctrule::cli::{run, EXIT_INPUT, EXIT_OK, EXIT_USAGE};
use ctrule::weightgen::WeightTable;

fn ctrule(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("ctrule").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn weights_then_integrate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("on.json");
    let p = path.to_str().unwrap();
    let (code, out, err) = ctrule(&[
        "weights", "--kernel", "on-diag-x1", "--alpha", "0.5", "--p", "1", "--working-digits", "30", "--out", p,
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("digits = "));
    let table = WeightTable::load(&path).unwrap();
    assert_eq!(table.p, 1);
    assert_eq!(table.weights.len(), ctrule::stencil::stencil_size(table.kernel, 1).unwrap());

    let (code, out, err) = ctrule(&[
        "integrate", "--weights", p, "--phi", "builtin:on-test", "--h", "1/16", "--compare-ref", "--kernel", "on-diag-x1",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let abs_err: f64 = out.lines().find_map(|l| l.strip_prefix("abs_error = ")).unwrap().parse().unwrap();
    assert!(abs_err < 1e-6, "{out}");

    let (code, _, err) = ctrule(&["integrate", "--weights", p, "--phi", "builtin:on-test", "--h", "1/16", "--kernel", "off-diag"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("mismatch"));

    let (code, _, _) = ctrule(&["integrate", "--weights", p, "--phi", "builtin:nope", "--h", "1/16"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn corrupt_table_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "not json").unwrap();
    let (code, _, _) = ctrule(&["integrate", "--weights", path.to_str().unwrap(), "--phi", "builtin:zero", "--h", "1/8"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn convergence_csv() {
    let (code, out, err) = ctrule(&[
        "--serial", "convergence", "--kernel", "off-diag", "--alpha", "1.5", "--p", "1", "--h", "1/8,1/16,1/32,1/64",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("# schema=ctrule.convergence/1"));
    assert_eq!(lines.next(), Some("p,h,error,slope_fitted"));
    let rows: Vec<&str> = lines.by_ref().take(4).collect();
    assert!(rows.iter().all(|r| r.starts_with("1,")));
    let slope: f64 = rows[0].rsplit(',').next().unwrap().parse().unwrap();
    assert!((slope - 2.5).abs() < 0.3, "{out}");
}

#[test]
fn verify_matrix_off_diag() {
    let (code, out, _) = ctrule(&["verify-matrix", "--kernel", "off-diag", "--p-max", "6", "--trials", "3", "--seed", "5"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().all(|l| l.contains("nonsingular=true") && l.ends_with("PASS")));
}

#[test]
fn non_power_of_two_mesh() {
    let (code, _, err) = ctrule(&["weights", "--kernel", "on-diag-x1", "--alpha", "0.5", "--p", "0", "--h-base", "0.03"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("power of two"));
}
