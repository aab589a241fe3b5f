use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn triphonon(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triphonon"))
        .current_dir(dir)
        .env_remove("TRIPHONON_OUT_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = triphonon(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn error_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&out.stderr)))
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn surfaces_writes_grid() {
    let d = tempfile::tempdir().unwrap();
    let s = ok(d.path(), &["--out-dir", "o", "surfaces", "--grid", "11", "--range", "2"]);
    assert!(s.starts_with("surfaces:"));
    let text = std::fs::read_to_string(d.path().join("o/surfaces.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sA,sB,dk1,dk2,dk3"));
    assert_eq!(lines.count(), 121);
}

#[test]
fn spectrum_is_deterministic_per_seed() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--out-dir", "a", "--seed", "7", "spectrum"]);
    ok(d.path(), &["--out-dir", "b", "--seed", "7", "spectrum"]);
    ok(d.path(), &["--out-dir", "c", "--seed", "8", "spectrum"]);
    let read = |x: &str| std::fs::read(d.path().join(x).join("spectrum.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
    let head = String::from_utf8(read("a")).unwrap();
    assert!(head.starts_with("dVA_mV,df_kHz,response\n"));
}

#[test]
fn exchange_fits_match_model() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--out-dir", "o", "exchange", "--dva-mv", "-1,1.5"]);
    let rep = read_json(&d.path().join("o/exchange.json"));
    let traces = rep["traces"].as_array().unwrap();
    assert_eq!(traces.len(), 2);
    for t in traces {
        let want = t["model_difference_frequencies_kHz"].as_array().unwrap();
        let got = t["fitted_frequencies_kHz"].as_array().unwrap();
        for (w, g) in want.iter().zip(got) {
            let (w, g) = (w.as_f64().unwrap(), g.as_f64().unwrap());
            assert!((w - g).abs() < 1e-3 * w, "{w} vs {g}");
        }
    }
    assert!(d.path().join("o/exchange_dva_-1.000.csv").exists());
    assert!(d.path().join("o/exchange_dva_+1.500.csv").exists());
}

#[test]
fn berry_then_fit_fringes_and_custom_replay() {
    let d = tempfile::tempdir().unwrap();
    let s = ok(d.path(), &["--out-dir", "o", "berry", "--T-us", "1800", "--waypoints", "60"]);
    assert!(s.starts_with("berry: dphi = "), "{s}");
    let rep = read_json(&d.path().join("o/berry.json"));
    let dphi = rep["delta_phi_over_pi"].as_f64().unwrap();
    assert!((dphi - 1.0).abs() < 0.05, "{dphi}");
    assert_eq!(rep["paths"]["enclosing"]["winding"], 1);
    assert_eq!(rep["paths"]["non_enclosing"]["winding"], 0);

    let s = ok(
        d.path(),
        &["--out-dir", "f", "fit-fringes", "--input", "o/berry_enclosing.csv", "--reference", "o/berry_non_enclosing.csv"],
    );
    let fitted: f64 = s.trim_start_matches("fit-fringes: dphi = ").trim_end_matches(" pi\n").parse().unwrap();
    assert!((fitted - dphi).abs() < 1e-3, "{s}");

    let cfg = serde_json::json!({
        "berry": {
            "family": "custom",
            "T_us": 1800,
            "custom_enclosing": "o/path_enclosing.json",
            "custom_non_enclosing": "o/path_non_enclosing.json"
        }
    });
    std::fs::write(d.path().join("custom.json"), cfg.to_string()).unwrap();
    ok(d.path(), &["--config", "custom.json", "--out-dir", "c", "berry"]);
    let replay = read_json(&d.path().join("c/berry.json"))["delta_phi_over_pi"].as_f64().unwrap();
    assert!((replay - 1.0).abs() < 0.05, "{replay}");
}

#[test]
fn sweep_csv_columns() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--out-dir", "o", "sweep", "--T-us", "100,1800", "--waypoints", "40"]);
    let text = std::fs::read_to_string(d.path().join("o/sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "T_us,dphi_over_pi,flag");
    assert_eq!(rows.len(), 3);
    let last: f64 = rows[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!(last > 0.9);
}

#[test]
fn fit_spectrum_recovers_parameters() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["--out-dir", "o", "spectrum"]);
    ok(d.path(), &["--out-dir", "o", "fit-spectrum", "--input", "o/spectrum.csv", "--bootstrap", "100"]);
    let rep = read_json(&d.path().join("o/fit_spectrum.json"));
    let c = rep["parameters"]["c"].as_f64().unwrap();
    let alpha = rep["parameters"]["alpha"].as_f64().unwrap();
    assert!((c + 1.202).abs() < 0.01, "{c}");
    assert!((alpha + 0.383).abs() < 0.004, "{alpha}");
    let ci = rep["ci95"]["c"].as_array().unwrap();
    assert!(ci[0].as_f64().unwrap() <= c && c <= ci[1].as_f64().unwrap());
}

#[test]
fn empty_config_is_default() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.json"), "{}").unwrap();
    ok(d.path(), &["--config", "c.json", "--out-dir", "o", "surfaces", "--grid", "3"]);
}

#[test]
fn schema_violation_exits_2() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.json"), r#"{"berry": {"T_us": "slow"}}"#).unwrap();
    let out = triphonon(d.path(), &["--config", "c.json", "berry"]);
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&out);
    assert_eq!(e["error"], "config");
    assert!(e["message"].as_str().unwrap().contains("berry.T_us"), "{e}");

    std::fs::write(d.path().join("u.json"), r#"{"berry": {"loops": 2}}"#).unwrap();
    assert_eq!(triphonon(d.path(), &["--config", "u.json", "berry"]).status.code(), Some(2));
    assert_eq!(triphonon(d.path(), &["--config", "missing.json", "berry"]).status.code(), Some(2));
    assert_eq!(triphonon(d.path(), &["fit-fringes"]).status.code(), Some(2));
    assert_eq!(triphonon(d.path(), &["nonsense"]).status.code(), Some(2));
}

#[test]
fn degenerate_custom_path_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let through_origin = r#"{"duration_ms": 1, "points": [[0, 0.5, 0.0], [0.25, 0.0, 0.0], [0.5, -0.5, 0.1], [1, 0.5, 0.0]]}"#;
    std::fs::write(d.path().join("p.json"), through_origin).unwrap();
    let cfg = r#"{"berry": {"family": "custom", "custom_enclosing": "p.json", "custom_non_enclosing": "p.json"}}"#;
    std::fs::write(d.path().join("c.json"), cfg).unwrap();
    let out = triphonon(d.path(), &["--config", "c.json", "berry"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error_json(&out)["error"], "numerical");
}

#[test]
fn out_dir_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_triphonon"))
        .current_dir(d.path())
        .env("TRIPHONON_OUT_DIR", "envdir")
        .args(["surfaces", "--grid", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(d.path().join("envdir/surfaces.csv").exists());
}
