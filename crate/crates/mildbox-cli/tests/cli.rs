//! End-to-end checks of the binary: exit codes, artifact layout, snapshot
//! round trips and reproducibility.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mildbox"))
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mildbox_cli_{name}"));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

const MANIFEST: &str = r#"
system = "cns"
dim = 2
grid = 16
horizon = 0.2
time_panels = 8
seed = 5

[initial.c]
kind = "gaussian_blob"
amplitude = 0.05
width = 1.0

[initial.n]
kind = "gaussian_blob"
amplitude = 0.01
width = 1.0

[initial.u]
kind = "taylor_green"
amplitude = 0.005
"#;

#[test]
fn solve_then_verify_round_trip() {
    let dir = temp_dir("solve");
    let manifest = dir.join("run.toml");
    fs::write(&manifest, MANIFEST).unwrap();

    let out = dir.join("out");
    let status = bin()
        .args(["solve", "--manifest"])
        .arg(&manifest)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for artifact in ["picard_trace.csv", "conservation.csv", "verdicts.json", "norms.txt"] {
        assert!(out.join(artifact).exists(), "{artifact} missing");
    }

    let vout = dir.join("verify_out");
    let status = bin()
        .args(["verify", "--trajectory"])
        .arg(out.join("trajectory"))
        .arg("--out")
        .arg(&vout)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = temp_dir("badcfg");
    let manifest = dir.join("bad.toml");
    fs::write(&manifest, MANIFEST.replace("grid = 16", "grid = 17")).unwrap();
    let status = bin()
        .args(["solve", "--manifest"])
        .arg(&manifest)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Missing manifest file is a config error too.
    let status = bin()
        .args(["solve", "--manifest"])
        .arg(dir.join("nonexistent.toml"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn grid_override_is_validated() {
    let dir = temp_dir("override");
    let manifest = dir.join("run.toml");
    fs::write(&manifest, MANIFEST).unwrap();
    let status = bin()
        .args(["solve", "--manifest"])
        .arg(&manifest)
        .args(["--grid", "9", "--out"])
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn norms_on_snapshot_match_in_memory_values() {
    use mildbox::field::ScalarField;
    use mildbox::grid::Grid;

    let dir = temp_dir("norms");
    let g = Grid::new(2, 2.0 * std::f64::consts::PI, 16).unwrap();
    let f = ScalarField::from_fn(g, |x| x[0].sin() + 0.25 * (2.0 * x[1]).cos());
    let snap = dir.join("field.mfld");
    mildbox::snapshot::write_scalar(&snap, &f).unwrap();

    let out = dir.join("out");
    let status = bin()
        .args(["norms", "--field"])
        .arg(&snap)
        .arg("--out")
        .arg(&out)
        .args(["--stride", "4"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let in_memory = mildbox::runner::norms_on_scalar(&f, 4, &[]).unwrap();
    let text = fs::read_to_string(out.join("norms.txt")).unwrap();
    for (key, value) in &in_memory.values {
        let line = text
            .lines()
            .find(|l| l.starts_with(&format!("{key} = ")))
            .unwrap_or_else(|| panic!("{key} missing from report"));
        let reported: f64 = line.split(" = ").nth(1).unwrap().parse().unwrap();
        assert!(
            (reported - value).abs() <= 1e-15 * value.abs().max(1.0),
            "{key}: {reported} vs {value}"
        );
    }
}

#[test]
fn sweep_writes_csv() {
    let dir = temp_dir("sweep");
    let manifest = dir.join("run.toml");
    fs::write(&manifest, MANIFEST).unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["sweep", "--manifest"])
        .arg(&manifest)
        .arg("--out")
        .arg(&out)
        .args(["--scales", "1.0,0.5"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("amplitude_scale,"));
}
