use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn solsurf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solsurf")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn immerse_config(lambda: [f64; 2], a: [f64; 2]) -> Value {
    json!({
        "model": "cp",
        "n": 2,
        "grid": {"center": [0.2, 0.1], "h": 0.05, "points": 41},
        "lambda": lambda,
        "a_coeffs": [a],
        "gauge": {"preset": "linear"},
        "outputs": [
            {"source": "immersion", "format": "obj", "path": "surface.obj"},
            {"source": "immersion", "format": "csv", "path": "det.csv", "quantity": "metric-det"},
            {"source": "gauge", "format": "json", "path": "gauge_copy.json"}
        ],
        "output_dir": "out"
    })
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let typo = write_config(d, "typo.json", &json!({"model": "cp", "lamda": [0.5, 0.0]}));
    let o = solsurf(d, &["solve", "--config", typo.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("lamda"), "{}", stderr(&o));

    let o = solsurf(d, &["solve", "--config", "missing.json"]);
    assert_eq!(code(&o), 2);

    let ok = write_config(d, "ok.json", &json!({"model": "cp", "grid": {"h": 0.05, "points": 41}, "output_dir": "out"}));
    let cfg = ok.to_str().unwrap();
    for bad in [
        vec!["solve", "--config", cfg, "--lambda", "1"],
        vec!["solve", "--config", cfg, "--lambda", "0.5,x"],
        vec!["solve", "--config", cfg, "--grid-h", "-0.1"],
        vec!["verify", "--config", cfg, "--suite", "prop9"],
    ] {
        assert_eq!(code(&solsurf(d, &bad)), 2, "{bad:?}");
    }

    let o = Command::new(env!("CARGO_BIN_EXE_solsurf"))
        .current_dir(d)
        .env("SOLSURF_THREADS", "0")
        .args(["solve", "--config", cfg])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("SOLSURF_THREADS"));
    assert!(!d.join("out/report.json").exists());
}

#[test]
fn solve_overrides_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write_config(d, "c.json", &json!({"model": "cp", "n": 3, "grid": {"h": 0.05, "points": 41}, "output_dir": "out"}));
    let o = Command::new(env!("CARGO_BIN_EXE_solsurf"))
        .current_dir(d)
        .env("SOLSURF_THREADS", "1")
        .args(["solve", "--config", cfg.to_str().unwrap(), "--lambda=-0.25,0.1", "--grid-h", "0.025"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for k in 0..3 {
        assert!(d.join(format!("out/ladder_{k}.json")).exists());
    }
    let phi: Value = serde_json::from_str(&std::fs::read_to_string(d.join("out/phi.json")).unwrap()).unwrap();
    assert_eq!(phi["lambda"], json!([-0.25, 0.1]));
    // same extent at half the spacing
    assert_eq!(phi["grid"]["dims"], json!([81, 81]));
    assert_eq!(phi["grid"]["spacing"], json!([0.025, 0.025]));
    assert!(report(d)["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn immerse_then_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write_config(d, "c.json", &immerse_config([0.0, 0.4], [0.0, 1.0]));
    let cfg = cfg.to_str().unwrap();

    let o = solsurf(d, &["export", "--config", cfg]);
    assert_eq!(code(&o), 2, "export before immerse");
    assert!(stderr(&o).contains("immersion.json"), "{}", stderr(&o));

    let o = solsurf(d, &["immerse", "--config", cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = solsurf(d, &["export", "--config", cfg]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let obj = std::fs::read_to_string(d.join("out/surface.obj")).unwrap();
    let verts = obj.lines().filter(|l| l.starts_with("v ")).count();
    let faces = obj.lines().filter(|l| l.starts_with("f ")).count();
    let side = (verts as f64).sqrt() as usize;
    assert_eq!(side * side, verts);
    assert_eq!(faces, 2 * (side - 1) * (side - 1));

    let csv = std::fs::read_to_string(d.join("out/det.csv")).unwrap();
    assert!(csv.lines().count() > 1);

    let a = std::fs::read_to_string(d.join("out/gauge.json")).unwrap();
    let b = std::fs::read_to_string(d.join("out/gauge_copy.json")).unwrap();
    let (a, b): (Value, Value) = (serde_json::from_str(&a).unwrap(), serde_json::from_str(&b).unwrap());
    assert_eq!(a, b);
}

#[test]
fn real_lambda_on_euclidean_space_fails_the_su_check() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write_config(d, "c.json", &immerse_config([0.3, 0.0], [1.0, 0.0]));
    let o = solsurf(d, &["immerse", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let failed: Vec<String> = report(d)["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(failed, ["immerse.su_correction"]);
}

#[test]
fn verify_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write_config(d, "c.json", &json!({"model": "cp", "suite": "prop7", "output_dir": "out"}));
    let cfg = cfg.to_str().unwrap();
    let run = |name: &str| {
        let o = solsurf(d, &["verify", "--config", cfg, "--report", name]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        std::fs::read(d.join(name)).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}
