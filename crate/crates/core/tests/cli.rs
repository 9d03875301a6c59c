use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn qwzmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwzmem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = qwzmem(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn phase_diagram_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pd");
    run_ok(&[
        "phase-diagram",
        "--n-side",
        "40",
        "--out",
        out.to_str().unwrap(),
    ]);
    let got: Vec<(f64, i32, i32, f64)> = rows(&out.join("phase_diagram.csv"))
        .iter()
        .map(|r| {
            (
                r[0].parse().unwrap(),
                r[1].parse().unwrap(),
                r[2].parse().unwrap(),
                r[3].parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        got,
        vec![
            (-3.0, 0, 0, 0.0),
            (-1.0, 1, 1, -1.0),
            (1.0, -1, -1, 1.0),
            (3.0, 0, 0, 0.0)
        ]
    );
}

#[test]
fn manifest_checksums_match_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q");
    let o = out.to_str().unwrap();
    let args = ["quench", "--n-side", "30", "--m-quench", "-1", "--out", o];
    run_ok(&args);
    let first = manifest(&out);
    let files = first["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    for f in files {
        let bytes = fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(
            f["sha256"].as_str().unwrap(),
            hex::encode(Sha256::digest(&bytes))
        );
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    run_ok(&args);
    let second = manifest(&out);
    assert_eq!(first["files"], second["files"]);
}

#[test]
fn scan_ratios_near_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan");
    run_ok(&[
        "scan-period",
        "--probe",
        "zero-zero",
        "--out",
        out.to_str().unwrap(),
    ]);
    let rs = rows(&out.join("period_scan.csv"));
    assert_eq!(rs.len(), 6);
    for r in rs {
        let ratio: f64 = r[3].parse().unwrap();
        assert!((0.98..=1.02).contains(&ratio), "{r:?}");
    }
}

#[test]
fn export_field_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ef");
    run_ok(&[
        "export-field",
        "--n-side",
        "20",
        "--t",
        "1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    let mut rdr = csv::Reader::from_path(out.join("field_t1.5.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["kx", "ky", "ax", "ay", "density1", "flag"]
    );
    assert_eq!(rdr.records().count(), 400);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    // configuration: critical mass, bad flag value, unknown command
    assert_eq!(
        qwzmem(&["phase-diagram", "--masses", "2", "--out", &p("a")])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qwzmem(&["quench", "--dt", "0", "--out", &p("b")])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(qwzmem(&["frobnicate"]).status.code(), Some(2));

    // too short to see three flips
    assert_eq!(
        qwzmem(&["decode", "--t-max", "1", "--out", &p("c")])
            .status
            .code(),
        Some(4)
    );

    // decoding a recorded series needs a branch
    run_ok(&["quench", "--out", &p("q")]);
    let series = dir.path().join("q").join("vorticity.csv");
    let s = series.to_str().unwrap();
    assert_eq!(
        qwzmem(&["decode", "--series", s, "--out", &p("d")])
            .status
            .code(),
        Some(3)
    );
    run_ok(&[
        "decode",
        "--series",
        s,
        "--branch",
        "above",
        "--out",
        &p("e"),
    ]);
    let r = &rows(&dir.path().join("e").join("decode.csv"))[0];
    let m: f64 = r[6].parse().unwrap();
    assert!((m - 1.0).abs() < 0.02, "{r:?}");

    // failed runs leave no output directory
    assert!(!dir.path().join("a").exists());
    assert!(!dir.path().join("c").exists());
}
