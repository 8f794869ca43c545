use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn xizeros(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xizeros"))
        .args(args)
        .output()
        .unwrap()
}

fn stderr_lines(o: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&o.stderr)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|_| panic!("non-JSON diagnostic: {l}")))
        .collect()
}

#[test]
fn eval_origin_csv_and_json() {
    let o = xizeros(&["eval", "--aleph", "0", "--lambda", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8(o.stdout.clone()).unwrap();
    let row = out.lines().nth(1).unwrap();
    let value: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((value - 0.0621401).abs() < 1e-6);
    assert!(stderr_lines(&o).iter().any(|d| d["event"] == "finished"));

    let o = xizeros(&["eval", "--tau", "0,2", "--format", "json", "--digits", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let re: f64 = v["value"][0].as_str().unwrap().parse().unwrap();
    assert!(re > 0.0 && re < 0.0621401);
}

#[test]
fn errors_map_to_exit_codes() {
    let o = xizeros(&["eval", "--lambda", "1", "--aleph", "nan"]);
    assert_eq!(o.status.code(), Some(2));
    let d = stderr_lines(&o);
    assert_eq!(d[0]["level"], "error");
    assert_eq!(d[0]["kind"], "InvalidAleph");

    let o = xizeros(&["certify", "--range", "5:60"]);
    assert_eq!(o.status.code(), Some(2));

    let o = xizeros(&["verify", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));

    let o = xizeros(&["zeros", "--extend", "/nonexistent/table.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_zero_table_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("z.csv");
    std::fs::write(&p, "not,a,zero,table\n1,2,3,4\n").unwrap();
    let o = xizeros(&["product", "--lambda", "1", "--zeros", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zeros_extend_keeps_existing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let both = dir.path().join("b.csv");
    let f = first.to_str().unwrap();
    assert_eq!(
        xizeros(&["zeros", "--range", "0:35", "--digits", "20", "--out", f])
            .status
            .code(),
        Some(0)
    );
    let o = xizeros(&[
        "zeros",
        "--range",
        "35:45",
        "--extend",
        f,
        "--digits",
        "20",
        "--out",
        both.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let a = std::fs::read_to_string(&first).unwrap();
    let b = std::fs::read_to_string(&both).unwrap();
    assert_eq!(a.lines().count(), 2);
    assert_eq!(b.lines().count(), 3);
    assert_eq!(a.lines().nth(1), b.lines().nth(1));
}

#[test]
fn verify_with_table_and_points() {
    let dir = tempfile::tempdir().unwrap();
    let z = dir.path().join("z.csv");
    let zs = z.to_str().unwrap();
    assert_eq!(
        xizeros(&["zeros", "--range", "0:60", "--out", zs])
            .status
            .code(),
        Some(0)
    );
    let o = xizeros(&[
        "verify",
        "--suite",
        "conj,even,sum_eq",
        "--tau",
        "1,1",
        "--zeros",
        zs,
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "CONJ tau=1+1i"));
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn out_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("coeffs.csv");
    std::fs::write(
        &p,
        "stale contents that are longer than nothing\n".repeat(100),
    )
    .unwrap();
    let o = xizeros(&["coeffs", "--gamma-max", "3", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let s = std::fs::read_to_string(&p).unwrap();
    assert!(s.starts_with("aleph,gamma,alpha,error_radius\n"));
    assert_eq!(s.lines().count(), 5);
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1, "temporary files left behind");
    assert!(Path::new(&p).exists());
}

#[test]
fn bounds_json_lists_both_tables() {
    let o = xizeros(&["bounds", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["bounds"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().any(|r| r["attribution"] == "Rodgers–Tao"));
}
