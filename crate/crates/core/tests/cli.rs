//! End-to-end runs of the `habitat` binary.

use std::fs;
use std::path::Path;
use std::process::Command;

fn habitat(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_habitat"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr);
    (o.status.code().unwrap_or(-1), text)
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect()
}

#[test]
fn validate_rejects_nonpositive_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"d":1,"r":2,"T":1,"horizon":1,"alpha":{"mean":0},"beta":{"mean":0.5},"motion":{"kind":"fixed","L0":1}}"#,
    )
    .unwrap();
    let (code, text) = habitat(&["validate", "--scenario", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(code, 2, "{text}");
    assert!(text.contains("alpha must be positive"), "{text}");

    let (code, _) = habitat(&["validate", "--scenario", "ex4-6"], &dir.path().join("o"));
    assert_eq!(code, 0);
    assert!(dir.path().join("o/manifest.json").exists());

    let (code, _) = habitat(&["validate", "--scenario", "missing.json"], &dir.path().join("o"));
    assert_eq!(code, 2);
}

#[test]
fn malformed_config_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"d":"one"}"#).unwrap();
    let (code, text) = habitat(&["validate", "--scenario", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(code, 2, "{text}");
}

#[test]
fn bounds_on_seasonal_example_predict_survival() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = habitat(&["bounds", "--scenario", "ex4-4", "--L0", "3"], dir.path());
    assert_eq!(code, 0, "{text}");
    let rows = read_csv(&dir.path().join("bounds.csv"));
    let lower: f64 = rows[0][1].parse().unwrap();
    let upper: f64 = rows[0][2].parse().unwrap();
    assert!(lower < upper);
    assert_eq!(rows[0][9], "survive");
}

#[test]
fn error_figure_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = habitat(&["reproduce", "fig-error", "--quiet"], dir.path());
    assert_eq!(code, 0, "{text}");
    assert!(text.is_empty());
    let rows = read_csv(&dir.path().join("fig_error.csv"));
    assert_eq!(rows.len(), 4);
    let errs: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn sweep_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--scenario", "fig1", "--lengths", "0.5:3:6", "--rates", "5,15", "--ny", "60", "--tau", "0.004"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(habitat(&args, &a).0, 0);
    assert_eq!(habitat(&args, &b).0, 0);
    let x = fs::read(a.join("sweep.csv")).unwrap();
    assert_eq!(x, fs::read(b.join("sweep.csv")).unwrap());
    assert_eq!(
        fs::read(a.join("manifest.json")).unwrap().len(),
        fs::read(b.join("manifest.json")).unwrap().len()
    );
    let rows = read_csv(&a.join("sweep.csv"));
    assert_eq!(rows.len(), 12);
}

#[test]
fn envelope_csv_has_bounds_around_the_reference() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = habitat(&["envelope", "--scenario", "ex4-4", "--ny", "100"], dir.path());
    assert_eq!(code, 0, "{text}");
    let rows = read_csv(&dir.path().join("envelope.csv"));
    assert!(!rows.is_empty());
    for r in rows {
        let v: Vec<f64> = r.iter().map(|x| x.parse().unwrap()).collect();
        let scale = v[3].abs().max(1e-300);
        assert!(v[2] <= v[4] + 1e-6 * scale && v[4] <= v[3] + 1e-6 * scale, "{r:?}");
    }
}

#[test]
fn unsandwiched_datum_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.json");
    fs::write(
        &cfg,
        r#"{"d":1,"r":2,"T":1,"horizon":1,"alpha":{"mean":1},"beta":{"mean":0.5},
            "motion":{"kind":"fixed","L0":1},"initial":{"kind":"tabulated","values":[0,1,0,0,0]}}"#,
    )
    .unwrap();
    let (code, text) = habitat(&["envelope", "--scenario", cfg.to_str().unwrap(), "--ny", "40"], &dir.path().join("o"));
    assert_eq!(code, 3, "{text}");
}

#[test]
fn solve_writes_slices_and_vtk() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = habitat(&["solve", "--scenario", "ex4-7-middle", "--nt", "20", "--nx", "8"], dir.path());
    assert_eq!(code, 0, "{text}");
    for f in ["solution.csv", "probe.csv", "solution.vtk", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let m: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["verb"], "solve");
    assert_eq!(m["resolved"]["nt"], 20);
}
