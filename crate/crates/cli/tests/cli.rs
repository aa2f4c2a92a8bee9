use std::path::Path;
use std::process::{Command, Output};

fn dispersive(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dispersive"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .env_remove("DISPERSIVE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dispersive(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(dispersive(dir.path(), &["--version"]).status.code(), Some(0));
    assert_eq!(dispersive(dir.path(), &["contract", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for args in [
        &["simulate", "--bogus", "1"][..],
        &["simulate", "--K", "many"],
        &["simulate", "--family", "nope"],
        &["simulate", "--data", "square"],
        &["contract"],
        &["divisor", "--delta", "5"],
        &["identities", "--threads", "0"],
    ] {
        let o = dispersive(&out, args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(!out.exists() || std::fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "kmax = 20\nfrobnicate = 3\n").unwrap();
    let o = dispersive(dir.path(), &["--config", cfg.to_str().unwrap(), "identities"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("frobnicate"), "{err}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small scan\nkmax = 20\ntheta = 0.25\n").unwrap();
    let o = dispersive(dir.path(), &["--config", cfg.to_str().unwrap(), "identities", "--kmax", "30"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&dir.path().join("identities.json"));
    assert_eq!(r["config"]["kmax"], 30);
    assert_eq!(r["config"]["theta"], 0.25);
    assert_eq!(r["pass"], true);
    assert!(r.get("timestamp").is_none());
}

#[test]
fn env_var_selects_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dispersive"))
        .current_dir(dir.path())
        .env("DISPERSIVE_OUT_DIR", dir.path().join("from-env"))
        .args(["identities", "--kmax", "10"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("from-env/identities.json").exists());
    assert!(!dir.path().join("dispersive-out").exists());
}

#[test]
fn timestamp_only_when_requested() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    dispersive(&a, &["identities", "--kmax", "10"]);
    dispersive(&b, &["--timestamp", "identities", "--kmax", "10"]);
    let (mut ra, mut rb) = (report(&a.join("identities.json")), report(&b.join("identities.json")));
    assert!(ra.get("timestamp").is_none());
    assert!(rb["timestamp"].as_u64().unwrap() > 0);
    rb.as_object_mut().unwrap().remove("timestamp");
    ra.as_object_mut().unwrap().remove("timestamp");
    assert_eq!(ra, rb);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["divisor", "--samples", "20"];
    assert_eq!(dispersive(&a, &[&["--threads", "1"][..], &args].concat()).status.code(), Some(0));
    assert_eq!(dispersive(&b, &[&["--threads", "3"][..], &args].concat()).status.code(), Some(0));
    for f in ["divisor.json", "periods.csv", "intervals.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn simulate_writes_snapshots_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let o = dispersive(dir.path(), &["simulate", "--family", "kdv", "--T", "0.05", "--stride", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let snaps = std::fs::read_dir(dir.path().join("snapshots")).unwrap().count();
    assert_eq!(snaps, 6);
    let csv = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,mean,l2,h6"));
    assert_eq!(report(&dir.path().join("simulate.json"))["command"], "simulate");
}

#[test]
fn failed_property_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // A drift tolerance of zero cannot be met once the nonlinearity acts.
    let o = dispersive(
        dir.path(),
        &["simulate", "--T", "0.1", "--amplitude", "0.5", "--drift-tol", "0"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(report(&dir.path().join("simulate.json"))["pass"], false);
}

#[test]
fn raw_symbol_pairs_build_a_set() {
    let dir = tempfile::tempdir().unwrap();
    let o = dispersive(dir.path(), &["divisor", "--symbol", "[[1, 5], [0.5, 3]]", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&dir.path().join("divisor.json"));
    assert!(r["result"]["removed_measure"].as_f64().unwrap() <= 0.1);
}
