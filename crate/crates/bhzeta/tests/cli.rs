use std::process::Command;

fn bhzeta(args: &[&str]) -> (i32, String, String) {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    let out = Command::new(env!("CARGO_BIN_EXE_bhzeta")).args(args).current_dir(root).env_remove("BHZETA_CACHE_DIR").output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn zeta_prints_table_row() {
    let (code, out, _) = bhzeta(&["zeta", "--input", "fixtures/k3-m30.json", "--prime", "1801"]);
    assert_eq!(code, 0);
    assert!(out.contains("N = 10 (auto 10)"), "{out}");
    assert!(out.contains("(1 - p t)^14 (1 - 1873 t + 4068 p t^2 - 5981 p^2 t^3"), "{out}");
}

#[test]
fn count_l2l2() {
    let (code, out, _) = bhzeta(&["count", "--input", "fixtures/l2l2.json", "--prime", "193"]);
    assert_eq!(code, 0);
    assert!(out.contains("#X(F_193^1) = 40920"), "{out}");
}

#[test]
fn mw_tri_oracle() {
    let (code, out, _) = bhzeta(&["mw", "--input", "fixtures/fermat-quartic.json", "--prime", "13"]);
    assert_eq!(code, 0);
    assert!(out.contains("p = 13: MW 128, ST 128, brute force 128: agree"), "{out}");
}

#[test]
fn structured_output_is_deterministic() {
    let args = ["zeta", "--input", "fixtures/cubic-chain-223-p13.json", "--format", "structured", "--backend", "both"];
    let (code, a, _) = bhzeta(&args);
    assert_eq!(code, 0);
    let (_, b, _) = bhzeta(&args);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["fixture"]["id"], "cubic-chain-223-p13");
    assert_eq!(v["runs"][0]["result"][0]["P"]["1"], serde_json::json!(["1", "6", "13"]));
    assert_eq!(v["runs"][0]["result"][0]["counts"][0], "20");
}

#[test]
fn exit_codes() {
    let (code, _, err) = bhzeta(&["zeta", "--input", "fixtures/k3-m30.json", "--precision", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("cli.precision_too_low"), "{err}");
    let (code, _, err) = bhzeta(&["zeta", "--input", "fixtures/quintic-37501.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("--allow-slow"), "{err}");
    let (code, _, err) = bhzeta(&["count", "--input", "fixtures/chain-3334.json", "--prime", "109", "--max-ops", "1000"]);
    assert_eq!(code, 2);
    assert!(err.contains("counting.budget_exceeded"), "{err}");
    let (code, _, _) = bhzeta(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, _, _) = bhzeta(&["validate", "--input", "fixtures/cubic-chain-223-p13.json"]);
    assert_eq!(code, 0);
}

#[test]
fn validate_reports_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/cubic-chain-223-p13.json")).unwrap();
    let path = dir.path().join("cubic-chain-223-p13.json");
    std::fs::write(&path, src.replace("\"supertrace\": \"20\"", "\"supertrace\": \"21\"")).unwrap();
    let (code, out, _) = bhzeta(&["validate", "--input", path.to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("FAIL"));
}
