use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nitsche-fem"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn single_level_convergence_has_no_rates() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["convergence", "--order", "1", "--levels", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("convergence_p1.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("n,h,dofs,nitsche_l2"));
    assert!(rows[1].starts_with("10,"));
    assert!(rows[1].split(',').filter(|f| f.is_empty()).count() >= 4);
    assert!(dir.path().join("convergence_manifest.json").exists());
}

#[test]
fn csv_output_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["convergence", "--order", "2", "--levels", "2", "--mesh", "jittered", "--seed", "7"];
    assert_eq!(run(a.path(), &args).status.code(), Some(0));
    assert_eq!(run(b.path(), &args).status.code(), Some(0));
    for f in ["convergence_p2.csv", "convergence_p2_nitsche.csv", "convergence_p2_strong.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn single_penalty_has_no_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["penalty-sweep", "--order", "1", "--n", "10", "--gammas", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("gamma,l2_err,h1_err") && !s.contains("max/min"));
}

#[test]
fn infsup_table_and_limits() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["infsup", "--ns", "5,6"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("infsup_poisson_p1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let o = run(dir.path(), &["infsup", "--ns"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let o = run(dir.path(), &["infsup", "--ns", "64"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n <="));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "--n", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));

    let o = run(dir.path(), &["verify", "--n", "10", "--edges-per-patch", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL] patch conditions"));

    let o = run(dir.path(), &["verify", "--n", "10", "--gamma-sd", "0"]);
    assert!(stdout(&o).contains("[SKIP] SD switch rule"), "{}", stdout(&o));
}

#[test]
fn outflow_writes_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["outflow", "--n", "10", "--eps", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let vtk = std::fs::read_to_string(dir.path().join("outflow_p1_nitsche_none_eps1e-1.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile"));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["convergence", "--order", "3"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["convergence", "--stab", "sd"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["outflow", "--beta", "1"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(2));
}
