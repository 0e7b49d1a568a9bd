use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gmt-epi"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("gmt-epi-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn reports_are_byte_identical_and_threads_are_capped() {
    let dir = scratch("repro");
    let cfg = write(
        &dir,
        "cfg.json",
        r#"{"generator": {"kind": "tilted", "slope": 0.1, "sides": 32}, "scan": {"r0": 0.1, "depth": 3, "sample": 3}}"#,
    );
    let mut outs = Vec::new();
    for (k, threads) in ["1", "2"].iter().enumerate() {
        let out = dir.join(format!("out{k}"));
        let st = bin()
            .args(["scan", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--seed", "5"])
            .env("GMT_EPI_THREADS", threads)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
        outs.push((
            fs::read(out.join("scan.json")).unwrap(),
            fs::read(out.join("scan.csv")).unwrap(),
        ));
    }
    assert_eq!(outs[0], outs[1]);
    let summary: serde_json::Value = serde_json::from_slice(&outs[0].0).unwrap();
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["config"]["scan"]["depth"], 3);
}

#[test]
fn chain_files_drive_the_commands() {
    let dir = scratch("chain");
    let chain = write(
        &dir,
        "segment.json",
        r#"{"version": 1, "ambient": 2, "dim": 1, "group": {"tag": "integers"},
            "simplices": [{"vertices": [[-1.0, 0.0], [1.0, 0.0]], "coeff": 3}]}"#,
    );
    let out = bin()
        .arg("analyze")
        .arg("--chain")
        .arg(&chain)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["mass"], 6.0);
    assert_eq!(v["results"]["boundary_simplices"], 2);
}

#[test]
fn exit_codes() {
    let dir = scratch("codes");
    assert_eq!(bin().arg("nonsense").status().unwrap().code(), Some(1));
    assert_eq!(bin().arg("moments").status().unwrap().code(), Some(1));
    let bad = write(&dir, "bad.json", "{ not json");
    assert_eq!(
        bin()
            .arg("analyze")
            .arg("--chain")
            .arg(&bad)
            .status()
            .unwrap()
            .code(),
        Some(1)
    );
    // the unit cylinder reaches past the boundary of an inscribed 16-gon
    let gate = write(
        &dir,
        "gate.json",
        r#"{"generator": {"kind": "flat_disk", "sides": 16}}"#,
    );
    assert_eq!(
        bin()
            .arg("excess")
            .arg("--config")
            .arg(&gate)
            .status()
            .unwrap()
            .code(),
        Some(2)
    );
    let ok = write(&dir, "ok.json", r#"{"verify": {"trials": 500}}"#);
    let out = dir.join("verify");
    assert_eq!(
        bin()
            .arg("verify")
            .arg("--config")
            .arg(&ok)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    let csv = fs::read_to_string(out.join("verify.csv")).unwrap();
    assert!(csv.starts_with("check,trials,violations"));
    assert_eq!(csv.lines().count(), 1 + 5 + 3);
}
