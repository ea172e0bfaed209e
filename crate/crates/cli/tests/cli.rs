use std::fs;
use std::process::Command;

fn qbutterfly() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qbutterfly"))
}

#[test]
fn accuracy_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = qbutterfly()
            .args(["accuracy", "--n", "2", "--noise", "0.0:0.04:0.02", "--trials", "50", "--seed", "42", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("x,estimate,ci_half_width,trials,successes"));
    assert_eq!(lines.next(), Some("0.0,1.0,0.0,50,50"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn eavesdrop_with_key_file_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let key = dir.path().join("key.txt");
    fs::write(&key, "10110\n").unwrap();
    let out = dir.path().join("eve.csv");
    let manifest = dir.path().join("run.json");
    let status = qbutterfly()
        .args(["eavesdrop", "--bits", "3:5", "--trials", "20", "--sign-convention", "example", "--key-file"])
        .arg(&key)
        .arg("--out")
        .arg(&out)
        .arg("--json-manifest")
        .arg(&manifest)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(fs::read_to_string(out).unwrap().lines().count(), 4);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
    assert_eq!(json["experiment"], "eavesdrop");
    assert_eq!(json["rows"], 3);
    assert_eq!(json["config"]["convention"], serde_json::json!("example"));
}

#[test]
fn resources_and_topology_dump() {
    let out = qbutterfly().args(["resources", "--n", "2:3", "--dump-topology"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = stdout.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..4], ["2", "7", "4", "14"]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("butterfly n_pairs=2"));
    assert!(stderr.contains("link M1 M2 classical"));
}

#[test]
fn config_errors_exit_nonzero() {
    for args in [
        vec!["resources", "--n", "1"],
        vec!["eavesdrop", "--bits", "2:4"],
        vec!["accuracy", "--noise", "0.5:0.1:0.1"],
        vec!["accuracy", "--trials", "0"],
        vec!["eavesdrop", "--key-file", "/nonexistent/key"],
        vec!["accuracy", "--sign-convention", "sideways"],
    ] {
        let out = qbutterfly().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
