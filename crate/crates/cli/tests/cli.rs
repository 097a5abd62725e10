use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn qsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// The trailing JSON object of mixed CSV + JSON output.
fn trailing_json(o: &Output) -> Value {
    let s = stdout(o);
    let start = s.find('{').expect("json present");
    serde_json::from_str(&s[start..]).unwrap()
}

#[test]
fn solve_exit_codes() {
    let dir = TempDir::new().unwrap();
    let sat = write(&dir, "sat.cnf", "p cnf 2 1\n1 2 0\n");
    let unsat = write(&dir, "unsat.cnf", "p cnf 1 2\n1 0\n-1 0\n");

    let o = qsat(&["solve", &sat]);
    assert_eq!(o.status.code(), Some(10));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["status"], "SAT");
    assert!((report["success_probability"].as_f64().unwrap() - 0.75).abs() < 1e-12);

    let o = qsat(&["solve", &unsat, "--engine", "both"]);
    assert_eq!(o.status.code(), Some(20));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["success_probability"].as_f64(), Some(0.0));
    assert_eq!(report["lindblad"]["classification"], "OSCILLATORY");

    let missing = dir.path().join("missing.cnf");
    assert_eq!(qsat(&["solve", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn solve_reports_disagreement_and_errors() {
    let dir = TempDir::new().unwrap();
    let one = write(&dir, "one.cnf", "p cnf 4 4\n1 0\n2 0\n3 0\n4 0\n");
    let o = qsat(&["solve", &one, "--steps", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("disagreement"));

    let bad = write(&dir, "bad.cnf", "p cnf 2 1\n1 3 0\n");
    assert_eq!(qsat(&["solve", &bad]).status.code(), Some(1));
    assert_eq!(qsat(&["solve", &one, "--width-cap", "3"]).status.code(), Some(1));
    assert_eq!(qsat(&["solve", &one, "--no-such-flag"]).status.code(), Some(1));
}

#[test]
fn solve_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.cnf", "p cnf 3 3\n1 2 0\n-1 3 0\n-2 -3 0\n");
    let args = ["solve", &f, "--engine", "both", "--shots", "500", "--seed", "11"];
    let a = qsat(&args);
    let b = qsat(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}

#[test]
fn oracle_and_compile() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.cnf", "c comment\np cnf 3 2\n1 2 0\n-1 3 0\n");
    let o = qsat(&["oracle", &f]);
    assert_eq!(stdout(&o), "r = 4\n2^n = 8\n");
    let o = qsat(&["--json", "oracle", &f]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["r"].as_u64(), v["assignments"].as_u64()), (Some(4), Some(8)));

    let o = qsat(&["compile", &f, "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["layout"]["mu"], 2);
    assert_eq!(v["layout"]["total"], 6);
    assert!(stdout(&qsat(&["compile", &f])).starts_with("n = 3, m = 2, mu = 2, total = 6"));
}

#[test]
fn simulate_dumps_amplitudes() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.cnf", "p cnf 2 1\n1 2 0\n");
    let v: Value = serde_json::from_str(&stdout(&qsat(&["simulate", &f, "--json"]))).unwrap();
    assert_eq!(v["width"], 4);
    assert_eq!(v["amplitudes"].as_array().unwrap().len(), 4);
    let total: f64 = v["amplitudes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["re"].as_f64().unwrap().powi(2) + a["im"].as_f64().unwrap().powi(2))
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn amplify_csv_and_verdict() {
    let o = qsat(&["amplify", "--q2", "1/1024", "--steps", "20", "--certify"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("step,x\n0,0.0009765625\n"));
    assert_eq!(s.lines().filter(|l| l.contains(',') && !l.contains('"')).count(), 22);
    let v = trailing_json(&o);
    assert_eq!(v["decision"], "SAT");
    assert_eq!(v["first_crossing"], 5);
    assert_eq!(v["certified"], true);
    assert_eq!(v["agrees"], true);

    let v = trailing_json(&qsat(&["amplify", "--q2", "0", "--steps", "6"]));
    assert_eq!(v["decision"], "UNSAT");
    assert!(v["first_crossing"].is_null());
    assert_eq!(qsat(&["amplify", "--q2", "0.3"]).status.code(), Some(1));
}

#[test]
fn csv_goes_to_file_when_asked() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("traj.csv");
    let o = qsat(&["amplify", "--q2", "3/4", "--csv", csv.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["first_crossing"], 0);
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("step,x\n0,0.75\n"));
    assert!(Path::new(&csv).exists());
}

#[test]
fn lindblad_verdicts() {
    let v = trailing_json(&qsat(&["lindblad", "--q", "0.0009765625", "--dt", "0.01"]));
    assert_eq!(v["classification"], "DAMPED");
    assert_eq!(v["decision"], "q_nonzero");
    let o = qsat(&["lindblad", "--q", "0", "--e0", "0", "--e1", "2"]);
    assert!(stdout(&o).starts_with("t,p1,abs_c\n0,0.5,0.5\n"));
    let v = trailing_json(&o);
    assert_eq!(v["classification"], "OSCILLATORY");
    assert_eq!(v["decision"], "q_zero");
    assert_eq!(qsat(&["lindblad", "--q", "1"]).status.code(), Some(1));
    assert_eq!(qsat(&["lindblad", "--q", "0.5", "--gamma-re", "-1"]).status.code(), Some(1));
}

#[test]
fn entropy_from_json() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "m.json",
        r#"{"rho": [[[0.5,0],[0,0]],[[0,0],[0.5,0]]],
            "channel": {"kraus": [[[1,0],[0,0]], [[0,0],[0,1]]]},
            "base": 2}"#,
    );
    let v: Value = serde_json::from_str(&stdout(&qsat(&["entropy", "--in", &input]))).unwrap();
    assert!((v["S"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["S_e"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["I2"].as_f64().unwrap().abs() < 1e-12);
    assert!((v["I3"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["pvm_comparison"]["i2_zero"], true);

    let v: Value =
        serde_json::from_str(&stdout(&qsat(&["entropy", "--in", &input, "--base", "e"]))).unwrap();
    assert!((v["S"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);

    let bad = write(&dir, "bad.json", r#"{"rho": [[1,0],[0,1]], "channel": {"kraus": [[[1,0],[0,1]]]}}"#);
    assert_eq!(qsat(&["entropy", "--in", &bad]).status.code(), Some(1));
}
