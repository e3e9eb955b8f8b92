use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dihedral"))
        .args(args)
        .env("DIHEDRAL_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dihedral-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn selftest_json() {
    let o = bin(&["dual-selftest"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["result"]["gap"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["dihedral"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn rw_lclt_regression_anchor() {
    let o = bin(&["rw-lclt", "--dist", "nu1", "--n", "1600", "--radius", "40"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# dihedral "));
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert_eq!(lines.next().unwrap(), "flip,r,p_n,scaled,phi,gap");
    let max_gap = lines
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(max_gap < 0.02);
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["recurrence", "--dist", "nu1", "--trials", "300", "--horizons", "10,100", "--seed", "11"];
    let a = bin(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_dihedral"))
        .args(args)
        .env("DIHEDRAL_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_mode() {
    let cfg = scratch("tail.json", r#"{"command":"return-tail","model":"gm-markov","n_max":6}"#);
    let out = cfg.with_file_name("tail.csv");
    let o = bin(&["--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3 + 6);
    let flags = bin(&["return-tail", "--model", "gm-markov", "--nmax", "6"]);
    assert_eq!(flags.stdout, text.as_bytes());
}

#[test]
fn schema_errors_exit_nonzero() {
    let cfg = scratch("bad.json", r#"{"command":"gm-lclt","model":"gm-bern","n":3,"seed":1}"#);
    let o = bin(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));
    let cfg = scratch("broken.json", "{\"command\":");
    assert_eq!(bin(&["--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert!(!bin(&["recurrence", "--dist", "nu1", "--trials", "5"]).status.success());
    assert!(!bin(&["gm-lclt", "--model", "no-such-fixture", "--n", "2"]).status.success());
}

#[test]
fn invalid_model_reports_on_stderr() {
    let model = r#"{"d":1,"P":[["1/2","1/2"],["1/2","1/2"]],"pi":["1/2","1/2"],
        "eps":[1,-1],"psi":[[1],[0]],"invol":[1,0]}"#;
    let path = scratch("uncentred.json", model);
    for args in [
        vec!["validate-model", "--model", path.to_str().unwrap()],
        vec!["gm-lclt", "--model", path.to_str().unwrap(), "--n", "4"],
    ] {
        let o = bin(&args);
        assert_eq!(o.status.code(), Some(1));
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains("centred_plus"), "{err}");
    }
    assert!(bin(&["validate-model", "--model", "gm-markov"]).status.success());
}

#[test]
fn gm_lclt_target() {
    let o = bin(&["gm-lclt", "--model", "gm-d2", "--n", "6", "--target", "-1:1,0", "--out", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let p = v["result"]["p_n"].as_f64().unwrap();
    assert!(p > 0.0 && p < 1.0);
}
