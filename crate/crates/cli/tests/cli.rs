use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use modschrod_core::io::{read_scalar_field, write_complex_field, write_scalar_field};
use modschrod_core::{Grid, PhysicalConstants, ScalarField, StationaryState};
use tempfile::TempDir;

fn modschrod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modschrod"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn dataset() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data/electron_diffraction_reconstruction.csv")
}

#[test]
fn eikonal_point_source_has_zero_at_center() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("tt.csv");
    let o = modschrod(&[
        "eikonal",
        "--shape",
        "21,21",
        "--source",
        "10,10",
        "--speed",
        "2",
        "-o",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let grid = Grid::uniform(&[21, 21], 1.0).unwrap();
    let tt = read_scalar_field(fs::read(&out).unwrap().as_slice(), grid).unwrap();
    assert_eq!(tt.get(&[10, 10]), Some(0.0));
    assert!((tt.get(&[10, 20]).unwrap() - 5.0).abs() < 1e-12);
    assert!(stdout(&o).contains("t_P min"));
}

#[test]
fn eikonal_rejects_zero_speed_naming_the_flag() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("tt.csv");
    let o = modschrod(&[
        "eikonal",
        "--shape",
        "5,5",
        "--source",
        "2,2",
        "--speed",
        "0",
        "-o",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--speed"));
    assert!(!out.exists());
}

#[test]
fn eikonal_rejects_source_outside_grid() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("tt.csv");
    let o = modschrod(&[
        "eikonal",
        "--shape",
        "5,5",
        "--source",
        "7,2",
        "--speed",
        "1",
        "-o",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--source"));
    assert!(!out.exists());
}

#[test]
fn eikonal_analytic_check_passes_on_201_grid() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("tt.csv");
    let o = modschrod(&[
        "eikonal",
        "--shape",
        "201,201",
        "--source",
        "100,100",
        "--speed",
        "1",
        "-o",
        p(&out),
        "--verify-analytic",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o)
        .lines()
        .find(|l| l.contains("max relative error"))
        .unwrap()
        .to_string();
    let pct: f64 = line
        .rsplit(' ')
        .next()
        .unwrap()
        .trim_end_matches('%')
        .parse()
        .unwrap();
    assert!(pct < 2.0, "{line}");
}

#[test]
fn eikonal_writes_local_time_classes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("tt.csv");
    let theta = dir.path().join("theta.csv");
    let o = modschrod(&[
        "eikonal",
        "--shape",
        "11",
        "--source",
        "0",
        "--speed",
        "1",
        "-o",
        p(&out),
        "--theta-time",
        "4",
        "--theta-output",
        p(&theta),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&theta).unwrap();
    let classes: String = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect();
    assert_eq!(classes, "PPPPFNNNNNN");
}

fn write_mode(dir: &Path, cells: usize) -> PathBuf {
    let c = PhysicalConstants::codata2018();
    let g = Grid::uniform(&[cells], 1e-9 / (cells - 1) as f64).unwrap();
    let mode = StationaryState::box_mode(&g, &[1], c.m_e, &c).unwrap();
    let path = dir.join("psi0.csv");
    let mut buf = Vec::new();
    write_complex_field(&mut buf, mode.psi()).unwrap();
    fs::write(&path, buf).unwrap();
    path
}

const SPACING_65: &str = "1.5625e-11";

#[test]
fn propagate_zero_steps_returns_input() {
    let dir = TempDir::new().unwrap();
    let init = write_mode(dir.path(), 65);
    let out = dir.path().join("run");
    let o = modschrod(&[
        "propagate",
        "--mode",
        "classical",
        "--shape",
        "65",
        "--spacing",
        SPACING_65,
        "--dt",
        "1e-17",
        "--steps",
        "0",
        "--initial",
        p(&init),
        "--out-dir",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(out.join("psi_classical_0000.csv")).unwrap(),
        fs::read(&init).unwrap()
    );
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["n_steps"], 0);
    assert_eq!(manifest["mode"], "classical");
}

#[test]
fn modified_with_zero_traveltime_matches_classical() {
    let dir = TempDir::new().unwrap();
    let init = write_mode(dir.path(), 65);
    let g = Grid::uniform(&[65], 1e-9 / 64.0).unwrap();
    let zero = dir.path().join("zero.csv");
    let mut buf = Vec::new();
    write_scalar_field(&mut buf, &ScalarField::filled(g, 0.0)).unwrap();
    fs::write(&zero, buf).unwrap();
    let common = [
        "--shape",
        "65",
        "--spacing",
        SPACING_65,
        "--dt",
        "1e-17",
        "--steps",
        "20",
        "--initial",
        p(&init),
        "--times",
        "5e-17,2e-16",
    ];
    let classical = dir.path().join("c");
    let modified = dir.path().join("m");
    let mut args = vec![
        "propagate",
        "--mode",
        "classical",
        "--out-dir",
        p(&classical),
    ];
    args.extend(common);
    assert!(modschrod(&args).status.success());
    let mut args = vec![
        "propagate",
        "--mode",
        "modified",
        "--traveltime",
        p(&zero),
        "--out-dir",
        p(&modified),
    ];
    args.extend(common);
    let o = modschrod(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    for i in 0..2 {
        let a = fs::read(classical.join(format!("psi_classical_{i:04}.csv"))).unwrap();
        let b = fs::read(modified.join(format!("psi_modified_{i:04}.csv"))).unwrap();
        assert_eq!(a, b);
    }
}

fn ramp_traveltime(dir: &Path, max_tp: f64) -> PathBuf {
    let path = dir.join("tt.csv");
    let o = modschrod(&[
        "eikonal",
        "--shape",
        "65",
        "--spacing",
        SPACING_65,
        "--source",
        "0",
        "--speed",
        &format!("{}", 1e-9 / max_tp),
        "-o",
        p(&path),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

#[test]
fn difference_mode_writes_both_fields() {
    let dir = TempDir::new().unwrap();
    let init = write_mode(dir.path(), 65);
    let tt = ramp_traveltime(dir.path(), 5e-17);
    let out = dir.path().join("a8");
    let o = modschrod(&[
        "propagate",
        "--mode",
        "compare-a8",
        "--shape",
        "65",
        "--spacing",
        SPACING_65,
        "--dt",
        "1e-17",
        "--steps",
        "30",
        "--initial",
        p(&init),
        "--traveltime",
        p(&tt),
        "--out-dir",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let g = Grid::uniform(&[65], 1e-9 / 64.0).unwrap();
    let actual = read_scalar_field(
        fs::read(out.join("delta_actual_abs_0000.csv"))
            .unwrap()
            .as_slice(),
        g.clone(),
    )
    .unwrap();
    let predicted = read_scalar_field(
        fs::read(out.join("delta_predicted_abs_0000.csv"))
            .unwrap()
            .as_slice(),
        g,
    )
    .unwrap();
    assert_eq!(actual.get(&[0]), Some(0.0));
    assert!(predicted.max() > 0.0);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["max_abs_residual"].as_array().unwrap().len(), 1);
}

#[test]
fn small_window_fails_with_hint_and_no_output() {
    let dir = TempDir::new().unwrap();
    let init = write_mode(dir.path(), 65);
    let tt = ramp_traveltime(dir.path(), 1e-16);
    let out = dir.path().join("m");
    let o = modschrod(&[
        "propagate",
        "--mode",
        "modified",
        "--shape",
        "65",
        "--spacing",
        SPACING_65,
        "--dt",
        "1e-17",
        "--steps",
        "30",
        "--initial",
        p(&init),
        "--traveltime",
        p(&tt),
        "--window",
        "3",
        "--out-dir",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("enlarge the history window"),
        "{}",
        stderr(&o)
    );
    assert!(!out.exists());
}

#[test]
fn propagate_gaussian_manifest_reports_small_drift() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g");
    let o = modschrod(&[
        "propagate",
        "--mode",
        "classical",
        "--shape",
        "128",
        "--spacing",
        "1e-11",
        "--dt",
        "1e-17",
        "--steps",
        "50",
        "--gaussian-sigma",
        "1e-10",
        "--gaussian-center",
        "6.4e-10",
        "--gaussian-k",
        "1e9",
        "--out-dir",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["max_relative_norm_drift"].as_f64().unwrap() < 1e-12);
}

fn dispersion_csv(args: &[&str]) -> Vec<Vec<f64>> {
    let mut full = vec!["dispersion", "--csv"];
    full.extend(args);
    let o = modschrod(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn dispersion_54_volt_row() {
    let o = modschrod(&["dispersion", "--voltages", "54", "--vp", "1.3e8"]);
    assert!(o.status.success());
    let table = stdout(&o);
    assert!(
        table.contains("5.992e9") && table.contains("6.092e9"),
        "{table}"
    );
    assert!(table.contains("lambda[A]"));
}

#[test]
fn dispersion_classical_and_group_velocity() {
    for row in dispersion_csv(&["--voltages", "30,54,150,600", "--classical"]) {
        assert_eq!(row[3], row[4]);
    }
    for row in dispersion_csv(&["--speeds", "1e6,5e6,1e7", "--vp", "1.3e8"]) {
        assert!(row[10] < row[9]);
        assert!(row[4] > row[3]);
    }
}

#[test]
fn dispersion_requires_vp_or_classical() {
    let o = modschrod(&["dispersion", "--voltages", "54"]);
    assert_eq!(o.status.code(), Some(2));
}

fn fit_json(args: &[&str]) -> serde_json::Value {
    let mut full = vec!["fit"];
    full.extend(args);
    let o = modschrod(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn fit_recovers_noiseless_speed() {
    let v = fit_json(&["--generate", "vP=1.3e8 n=20 seed=7 noise=0"]);
    let got = v["v_p_fitted_m_per_s"].as_f64().unwrap();
    assert!((got - 1.3e8).abs() / 1.3e8 < 1e-6);
}

#[test]
fn fit_classical_data_clamps() {
    let v = fit_json(&["--generate", "vP=inf n=15 seed=3 noise=0"]);
    assert_eq!(v["clamped_to_classical"], true);
    assert!(v["v_p_fitted_m_per_s"].is_null());
}

#[test]
fn fit_shipped_dataset() {
    let v = fit_json(&["--input", p(&dataset())]);
    let vp = v["v_p_fitted_m_per_s"].as_f64().unwrap();
    let ratio = v["variance_classical_inv_m2"].as_f64().unwrap()
        / v["variance_modified_inv_m2"].as_f64().unwrap();
    assert!((1.0e8..=1.6e8).contains(&vp), "{vp}");
    assert!((1.8..=2.8).contains(&ratio), "{ratio}");
}

#[test]
fn fit_is_deterministic() {
    let a = modschrod(&["fit", "--generate", "vP=1.3e8 n=12 seed=11 noise=0.02"]);
    let b = modschrod(&["fit", "--generate", "vP=1.3e8 n=12 seed=11 noise=0.02"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn fit_reports_malformed_line() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(
        &path,
        "voltage_volts,wavelength_meters\n54,1.67e-10\n60,abc\n",
    )
    .unwrap();
    let o = modschrod(&["fit", "--input", p(&path)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn compare_layers_and_variances() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("fig.csv");
    let o = modschrod(&[
        "compare",
        "--input",
        p(&dataset()),
        "-o",
        p(&out),
        "--curve-points",
        "50",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<(String, f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].to_string(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(rows.iter().filter(|r| r.0 == "points").count(), 24);
    let a: Vec<_> = rows.iter().filter(|r| r.0 == "curveA").collect();
    let b: Vec<_> = rows.iter().filter(|r| r.0 == "curveB").collect();
    assert_eq!(a.len(), 50);
    for (ra, rb) in a.iter().zip(&b) {
        assert_eq!(ra.1, rb.1);
        assert!(rb.2 > ra.2);
    }

    let fit = fit_json(&["--input", p(&dataset())]);
    let printed = stdout(&o);
    let number = |key: &str| -> f64 {
        let line = printed.lines().find(|l| l.starts_with(key)).unwrap();
        line.split_whitespace().nth(2).unwrap().parse().unwrap()
    };
    assert_eq!(
        number("variance modified"),
        fit["variance_modified_inv_m2"].as_f64().unwrap()
    );
    assert_eq!(
        number("variance classical"),
        fit["variance_classical_inv_m2"].as_f64().unwrap()
    );
}

#[test]
fn help_documents_units() {
    for (cmd, needles) in [
        ("eikonal", &["m/s", "seconds", "meters"][..]),
        ("propagate", &["seconds", "kg", "joules", "meters"][..]),
        ("dispersion", &["volts", "m/s"][..]),
        ("fit", &["m/s", "volts"][..]),
        ("compare", &["m/s", "1/m"][..]),
    ] {
        let o = modschrod(&[cmd, "--help"]);
        assert!(o.status.success());
        let help = stdout(&o);
        for n in needles {
            assert!(help.contains(n), "{cmd} --help lacks {n}");
        }
    }
}
