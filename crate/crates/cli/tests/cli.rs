use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rheat")).args(args).output().expect("run rheat")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect()
}

#[test]
fn kernel_dump() {
    let o = rheat(&["kernel", "--profile", "fokker-planck", "--t", "1", "--grid", "-3:3:121"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("x,y,t,K"));
    let r = rows(&out);
    assert_eq!(r.len(), 121 * 121);
    // K(0, 0, 1) = 1 / sqrt(2 pi (1 - e^-2))
    let origin = r.iter().find(|r| r[0] == 0.0 && r[1] == 0.0).unwrap();
    let exact = 1.0 / (2.0 * std::f64::consts::PI * (1.0 - (-2.0f64).exp())).sqrt();
    assert!((origin[3] - exact).abs() < 1e-10);
}

#[test]
fn solve_heat_gaussian() {
    let o = rheat(&["solve", "--profile", "heat", "--phi", "gaussian", "--t", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("t,x,u"));
    for r in rows(&out) {
        let (t, x, u) = (r[0], r[1], r[2]);
        let exact = (-x * x / (1.0 + 4.0 * t)).exp() / (1.0 + 4.0 * t).sqrt();
        assert!((u - exact).abs() <= 1e-6, "x = {x}");
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = rheat(&["solve", "--profile", "ou", "--param", "k=2", "--t", "0.7", "-o", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn gnuplot_script_references_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("k.csv");
    let o = rheat(&["kernel", "--grid", "-1:1:5", "--gnuplot", "-o", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let script = fs::read_to_string(dir.path().join("k.csv.gp")).unwrap();
    assert!(script.contains("'k.csv'") && script.contains("splot"));
    // --gnuplot without a file is a configuration error
    assert_eq!(rheat(&["kernel", "--gnuplot"]).status.code(), Some(2));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn config_documents() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"command": "solve", "coefficients": {"profile": "cable", "params": {"lambda": 1, "tau": 2}, "T": 2},
            "grid": "-2:2:5", "t": 1, "phi": "constant:1"}"#,
    );
    let o = rheat(&["--config", &cfg, "solve"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // constant data under the cable equation grows like e^{t / tau}
    for r in rows(&stdout(&o)) {
        assert!((r[2] - 0.5f64.exp()).abs() < 1e-8);
    }
    // flags override the document
    let o = rheat(&["--config", &cfg, "solve", "--grid", "0:1:2"]);
    assert_eq!(rows(&stdout(&o)).len(), 2);
    assert_eq!(rheat(&["--config", &cfg, "kernel"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.json", r#"{"grid": "0:1:3", "typo": 1}"#);
    assert_eq!(rheat(&["--config", &bad, "kernel"]).status.code(), Some(2));
    assert_eq!(rheat(&["--config", "/nonexistent.json", "kernel"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(rheat(&["kernel", "--grid", "3:1:4"]).status.code(), Some(2));
    assert_eq!(rheat(&["kernel", "--profile", "nope"]).status.code(), Some(2));
    assert_eq!(rheat(&["solve", "--t", "2", "--T", "1"]).status.code(), Some(2));
    assert_eq!(rheat(&["bogus"]).status.code(), Some(2));
    // b < 0: mu0 vanishes at pi/2, so the kernel does not exist at t = 2
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "osc.json", r#"{"coefficients": {"profile": "custom", "poly": {"a": [1], "b": [-1]}, "T": 3}}"#);
    let o = rheat(&["--config", &cfg, "kernel", "--t", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("numerical failure"));
}

#[test]
fn riccati_and_characteristic_tables() {
    let o = rheat(&["riccati", "--profile", "fp", "--t", "1", "--points", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("t,mu0,alpha0,beta0,gamma0,delta0,eps0,kappa0"));
    let last = rows(&out).pop().unwrap();
    assert!((last[3] - 1.0 / (2.0 * 1f64.sinh())).abs() < 1e-9);
    let o = rheat(&["characteristic", "--profile", "heat", "--t", "1", "--points", "11"]);
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 11);
    assert!(r.iter().all(|r| (r[1] - 2.0 * r[0]).abs() < 1e-12));
}

#[test]
fn burgers_and_waves() {
    let o = rheat(&["burgers", "--v0", "zero", "--grid", "-2:2:9"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(rows(&stdout(&o)).iter().all(|r| r[2].abs() <= 1e-10));
    let grid = ["--grid", "-2:2:9", "--t", "0.5"];
    let ivp = rows(&stdout(&rheat(&[&["burgers", "--v0", "kink"][..], &grid].concat())));
    let exact = rows(&stdout(&rheat(&[&["wave", "--family", "kink"][..], &grid].concat())));
    assert_eq!(ivp.len(), exact.len());
    for (a, b) in ivp.iter().zip(&exact) {
        assert!((a[2] - b[2]).abs() <= 1e-6);
    }
    let o = rheat(&["wave", "--family", "traveling", "--c0", "1", "--f0", "-1", "--window", "-3:4", "--grid", "-1:1:5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn validate_suite() {
    let o = rheat(&["validate", "--profile", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    let checks = out.lines().filter(|l| l.contains("PASS") || l.contains("FAIL")).count();
    assert!(checks >= 12);
    assert!(!out.contains("FAIL"));
    assert_eq!(rheat(&["validate", "--profile", "custom"]).status.code(), Some(2));
}
