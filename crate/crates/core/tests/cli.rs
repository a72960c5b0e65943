use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ramsey(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ramsey")).args(args).arg("--out").arg(out).output().unwrap()
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).to_string_lossy().into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path: PathBuf = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const GAS: &str = r#"
[potential]
c6 = "1000 MHz*um^6"
detuning = "-500 MHz"
rabi = "100 MHz"

[gas]
density = "1e12 cm^-3"

[grid]
spec = "lin:0:4:5"
"#;

#[test]
fn unitless_quantity_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &GAS.replace("\"1e12 cm^-3\"", "1.0"));
    let out = ramsey(&["scan", "--config", &cfg], &tmp.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no unit"));
}

#[test]
fn missing_inputs_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(ramsey(&["fig2"], &tmp.path().join("o")).status.code(), Some(2));
    let cfg = write_config(tmp.path(), &GAS.replace("c6 = \"1000 MHz*um^6\"", ""));
    assert_eq!(ramsey(&["fig2", "--config", &cfg], &tmp.path().join("o")).status.code(), Some(2));
    let bad_grid = ramsey(&["fig5", "--config", &config("fig5_rb.toml"), "--grid", "lin:0:1:3"], &tmp.path().join("o"));
    assert_eq!(bad_grid.status.code(), Some(2));
    let cfg = write_config(tmp.path(), GAS);
    let total = ramsey(&["scan", "--config", &cfg, "--normalization", "total"], &tmp.path().join("o"));
    assert_eq!(total.status.code(), Some(2));
}

#[test]
fn scan_writes_csv_and_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), GAS);
    let dir = tmp.path().join("o");
    let out = ramsey(&["scan", "--config", &cfg, "--no-echo", "--theta", "0.5"], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("scan.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t_us,V0t,re,im,contrast,phase_shift");
    assert_eq!(csv.lines().count(), 6);
    let first: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((first[4] - 0.5f64.sin()).abs() < 1e-15);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("scan.json")).unwrap()).unwrap();
    assert_eq!(meta["parameters"]["protocol"]["echo"], false);
    assert_eq!(meta["parameters"]["protocol"]["theta"], 0.5);
    assert_eq!(meta["seed"], 1);
}

#[test]
fn lattice_scan_supports_total_normalization() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("o");
    let args = ["scan", "--config", &config("fig4_lattice.toml"), "--system", "lattice", "--normalization", "total"];
    let out = ramsey(&args, &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("scan.csv")).unwrap();
    let c0: f64 = csv.lines().nth(1).unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert!((c0 - 225.0).abs() < 1e-9);
}

#[test]
fn picosecond_grid_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("o");
    let out = ramsey(&["fig5", "--config", &config("fig5_rb.toml"), "--grid", "lin:0ps:30ps:4"], &dir);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.join("fig5.csv")).unwrap();
    for (k, line) in csv.lines().skip(1).enumerate() {
        let ps: f64 = line.split(',').next().unwrap().parse().unwrap();
        assert!((ps - 10.0 * k as f64).abs() <= 1e-12 * ps.max(1.0), "{ps}");
    }
}

#[test]
fn validate_passes_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("o");
    let out = ramsey(&["validate", "--seed", "3"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("validate.json")).unwrap()).unwrap();
    assert_eq!(meta["passed"], true);
    assert_eq!(meta["summary"]["checks"].as_array().unwrap().len(), 7);
    assert_eq!(meta["summary"]["monte_carlo_digest"].as_str().unwrap().len(), 64);
}
