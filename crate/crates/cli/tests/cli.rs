use std::path::Path;
use std::process::Command;

use serde_json::Value;
use skmmse::{save_image, ImageBuffer, Profile};
use skmmse_cli::{run_benchmark, MethodKind, PatternSpec, ReportFormat, RunConfig, TIMING_FIELDS};

fn write_flat(dir: &Path, name: &str, value: f64) -> std::path::PathBuf {
    let p = dir.join(name);
    save_image(&ImageBuffer::filled(64, 64, value).unwrap(), &p).unwrap();
    p
}

fn write_texture(dir: &Path, name: &str) -> std::path::PathBuf {
    let img = ImageBuffer::from_fn(64, 64, |x, y| {
        128.0 + 70.0 * ((x as f64) * 0.5).sin() * ((y as f64) * 0.35).cos() + ((x * 7 + y * 3) % 5) as f64
    })
    .unwrap();
    let p = dir.join(name);
    save_image(&img, &p).unwrap();
    p
}

fn config(inputs: Vec<std::path::PathBuf>, out: &Path) -> RunConfig {
    RunConfig::new(inputs, out)
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for f in TIMING_FIELDS {
                map.remove(f);
            }
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[test]
fn empty_input_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let err = run_benchmark(&config(vec![empty], &dir.path().join("out"))).unwrap_err();
    assert!(err.to_string().contains("no inputs"));
}

#[test]
fn perfect_reconstruction_reports_infinite_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let img = write_flat(dir.path(), "flat.pgm", 90.0);
    let mut cfg = config(vec![img], &dir.path().join("out"));
    cfg.methods = vec![MethodKind::Brl];
    let outcome = run_benchmark(&cfg).unwrap();
    assert!(outcome.success());
    assert_eq!(outcome.rows[0].psnr.unwrap().0, f64::INFINITY);
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&outcome.report_path).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["rows"][0]["psnr"], "inf");
    assert_eq!(json["rows"][0]["brl"], 4 * 64);
    for f in ["flat.mask.pgm", "flat.corrupted.pgm", "flat.recon.pgm"] {
        assert!(dir.path().join("out").join(f).is_file(), "{f}");
    }
}

#[test]
fn reports_are_reproducible_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let img = write_texture(dir.path(), "tex.pgm");
    let run = |out: &str| {
        let mut cfg = config(vec![img.clone()], &dir.path().join(out));
        cfg.pattern = PatternSpec::Random;
        cfg.seed = 42;
        cfg.methods = vec![MethodKind::Kmmse, MethodKind::Skmmse];
        cfg.profiles = vec![Profile::EXPRESS];
        let outcome = run_benchmark(&cfg).unwrap();
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(outcome.report_path).unwrap()).unwrap();
        strip_timing(&mut v);
        v["config"].as_object_mut().unwrap().remove("out_dir");
        v
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert_eq!(a["rows"][1]["method"], "skmmse-express");
    assert!(a["rows"][1]["psnr_gain"].is_number());
    let recon_a = std::fs::read(dir.path().join("a/tex.skmmse-express.recon.pgm")).unwrap();
    let recon_b = std::fs::read(dir.path().join("b/tex.skmmse-express.recon.pgm")).unwrap();
    assert_eq!(recon_a, recon_b);
}

fn ppm_pixels(path: &Path) -> Vec<[u8; 3]> {
    let bytes = std::fs::read(path).unwrap();
    // header: P6\n<w> <h>\n255\n
    let mut newlines = 0;
    let start = bytes
        .iter()
        .position(|&b| {
            newlines += (b == b'\n') as usize;
            newlines == 3
        })
        .unwrap()
        + 1;
    bytes[start..].chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
}

fn count(pixels: &[[u8; 3]], color: [u8; 3]) -> usize {
    pixels.iter().filter(|&&p| p == color).count()
}

#[test]
fn layer_map_colors_follow_layers() {
    let dir = tempfile::tempdir().unwrap();
    let flat = write_flat(dir.path(), "flat.pgm", 60.0);
    let tex = write_texture(dir.path(), "tex.pgm");

    let mut cfg = config(vec![flat], &dir.path().join("brl"));
    cfg.layer_map = true;
    run_benchmark(&cfg).unwrap();
    let px = ppm_pixels(&dir.path().join("brl/flat.layers.ppm"));
    assert_eq!(count(&px, [255, 0, 0]), 4 * 256);

    let mut cfg = config(vec![tex.clone()], &dir.path().join("hql"));
    cfg.methods = vec![MethodKind::Kmmse];
    cfg.layer_map = true;
    run_benchmark(&cfg).unwrap();
    let px = ppm_pixels(&dir.path().join("hql/tex.layers.ppm"));
    assert_eq!(count(&px, [0, 0, 255]), 4 * 256);

    let mut cfg = config(vec![tex], &dir.path().join("mix"));
    cfg.profiles = vec![Profile::EFFICIENT];
    cfg.layer_map = true;
    cfg.report = ReportFormat::Csv;
    let outcome = run_benchmark(&cfg).unwrap();
    let px = ppm_pixels(&dir.path().join("mix/tex.layers.ppm"));
    let row = &outcome.rows[0];
    assert_eq!(count(&px, [255, 0, 0]), 4 * row.brl);
    assert_eq!(count(&px, [0, 255, 0]), 4 * row.idl);
    assert_eq!(count(&px, [0, 0, 255]), 4 * row.hql);
    let csv = std::fs::read_to_string(outcome.report_path).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("schema_version,image,method"));
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let img = write_flat(dir.path(), "flat.pgm", 10.0);
    let out = dir.path().join("out");
    let ok = Command::new(env!("CARGO_BIN_EXE_skmmse"))
        .args(["--input", img.to_str().unwrap(), "--method", "brl", "--out-dir", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(out.join("report.json").is_file());

    let missing = Command::new(env!("CARGO_BIN_EXE_skmmse"))
        .args(["--input", dir.path().join("nope.pgm").to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));

    let bad_profile = Command::new(env!("CARGO_BIN_EXE_skmmse"))
        .args(["--input", img.to_str().unwrap(), "--t-nu", "0", "--out-dir", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad_profile.status.code(), Some(2));
}
