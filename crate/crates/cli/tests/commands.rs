use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn ldecay(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_ldecay"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn write_model(dir: &TempDir, name: &str, mass: Option<f64>, modes: &[(f64, f64)]) -> PathBuf {
    let doc = serde_json::json!({
        "M": mass,
        "modes": modes.iter().map(|(w, g)| serde_json::json!({"w": w, "gamma": g})).collect::<Vec<_>>(),
    });
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    path
}

fn bundled(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn csv_column(path: &Path, column: &str) -> Vec<Option<f64>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let idx = reader
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == column)
        .unwrap_or_else(|| panic!("no column {column}"));
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            let cell = &r[idx];
            if cell.is_empty() {
                None
            } else {
                Some(cell.parse().unwrap())
            }
        })
        .collect()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    csv_column(path, name).into_iter().map(|v| v.expect("value present")).collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Independent bisection for `sqrt(z) exp(-z) = level` on one side of the maximum.
fn zeta_root(level: f64, mut lo: f64, mut hi: f64, rising: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let above = mid.sqrt() * (-mid).exp() > level;
        if above == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn fit_stretched_exponential_end_to_end() {
    let dir = TempDir::new().unwrap();
    let curve = dir.path().join("curve.csv");
    let model = dir.path().join("model.json");
    let report = dir.path().join("report.json");
    let run = ldecay(&["sample", "--theta", "0.6", "--grid", "1:100:120:geom", "--out", path_str(&curve)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let run = ldecay(&[
        "fit",
        "--input",
        path_str(&curve),
        "--modes",
        "8",
        "--restarts",
        "4",
        "--out",
        path_str(&model),
        "--report",
        path_str(&report),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rmse = json(&report)["rmse"].as_f64().unwrap();
    assert!(rmse <= 1e-3, "rmse {rmse}");
    assert_eq!(json(&model)["modes"].as_array().unwrap().len(), 8);
}

#[test]
fn fit_pure_exponential_single_mode() {
    let dir = TempDir::new().unwrap();
    let curve = dir.path().join("exp.csv");
    let mut text = String::from("t,value\n");
    for k in 0..60 {
        let t = 0.1 * f64::from(k);
        text.push_str(&format!("{t},{}\n", (-0.35 * t).exp()));
    }
    fs::write(&curve, text).unwrap();
    let model = dir.path().join("model.json");
    let run = ldecay(&["fit", "--input", path_str(&curve), "--modes", "1", "--out", path_str(&model)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc = json(&model);
    let mode = &doc["modes"][0];
    assert!((mode["w"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    // modulus exp(-0.35 t) is exp(-gamma t / 2)
    assert!((mode["gamma"].as_f64().unwrap() - 0.7).abs() < 1e-8);
}

#[test]
fn malformed_csv_exits_with_input_error() {
    let dir = TempDir::new().unwrap();
    let curve = dir.path().join("bad.csv");
    fs::write(&curve, "t,value\n0.5,abc\n1.0\n").unwrap();
    let run = ldecay(&[
        "fit",
        "--input",
        path_str(&curve),
        "--out",
        path_str(&dir.path().join("m.json")),
    ]);
    assert_eq!(run.code, 2, "{}", run.stderr);
    let run = ldecay(&["fit", "--input", "/nonexistent/curve.csv", "--out", "m.json"]);
    assert_eq!(run.code, 2);
}

#[test]
fn transform_figure_one_regime() {
    let dir = TempDir::new().unwrap();
    let model = bundled(&dir, "m.json", lorentz_decay_cli::figures::THETA_3_5_MODEL);
    let out = dir.path().join("p.csv");
    let run = ldecay(&[
        "transform",
        "--model",
        path_str(&model),
        "--M",
        "700",
        "--ratio-max",
        "0.05",
        "--p",
        "2000",
        "--grid",
        "3:20:69",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("monotone = true"), "{}", run.stdout);
    let gamma = column(&out, "gamma");
    assert!(gamma.iter().all(|g| (g - 3.0271).abs() / 3.0271 < 1e-3));
    let lab = column(&out, "p_lab");
    assert!(lab.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn transform_figure_two_gamma_root_two() {
    let dir = TempDir::new().unwrap();
    let model = bundled(&dir, "m.json", lorentz_decay_cli::figures::THETA_1_2_MODEL);
    let out = dir.path().join("p.csv");
    let run = ldecay(&[
        "transform", "--model", path_str(&model), "--M", "700", "--ratio-max", "0.05", "--p", "700", "--grid",
        "3:20:18", "--out", path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.starts_with("gamma = 1.414214"), "{}", run.stdout);
}

#[test]
fn transform_at_rest_matches_rest_curve() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", Some(1e4), &[(0.4, 0.5), (0.6, 2.0)]);
    let out = dir.path().join("p.csv");
    let run = ldecay(&[
        "transform", "--model", path_str(&model), "--p", "0", "--grid", "0.5:20:40", "--out", path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let (lab, rest) = (column(&out, "p_lab"), column(&out, "p_rest"));
    for (a, b) in lab.iter().zip(&rest) {
        assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
    }
}

#[test]
fn transform_without_mass_is_input_error() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", None, &[(1.0, 1.0)]);
    let run = ldecay(&[
        "transform", "--model", path_str(&model), "--p", "10", "--grid", "1:2:3", "--out",
        path_str(&dir.path().join("o.csv")),
    ]);
    assert_eq!(run.code, 2, "{}", run.stderr);
}

#[test]
fn window_single_mode_endpoints() {
    let dir = TempDir::new().unwrap();
    let (mass, width) = (1e4, 1.0);
    let model = write_model(&dir, "m.json", Some(mass), &[(1.0, width)]);
    let out = dir.path().join("w.json");
    let p = mass * 3f64.sqrt();
    let run = ldecay(&[
        "window", "--model", path_str(&model), "--p", &p.to_string(), "--out", path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = json(&out);
    let lab = report["lab_window"].as_array().unwrap();
    assert_eq!(lab.len(), 1);
    let zeta_min = zeta_root(1e-2, 0.0, 0.5, true);
    let zeta_max = zeta_root(1e-2, 0.5, 50.0, false);
    let gamma = 2.0;
    let lo = lab[0][0].as_f64().unwrap();
    let hi = lab[0][1].as_f64().unwrap();
    assert!((lo - 2.0 * zeta_min * gamma / width).abs() < 1e-9 * lo);
    assert!((hi - 2.0 * zeta_max * gamma / width).abs() < 1e-9 * hi);
    let rest = report["rest_window"].as_array().unwrap();
    assert!((rest[0][0].as_f64().unwrap() * gamma - lo).abs() < 1e-12 * lo);
}

#[test]
fn window_at_rest_is_excluded() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", Some(1e4), &[(1.0, 1.0)]);
    let run = ldecay(&[
        "window", "--model", path_str(&model), "--p", "0", "--out", path_str(&dir.path().join("w.json")),
    ]);
    assert_eq!(run.code, 4, "{}", run.stderr);
}

#[test]
fn window_strong_decay_reports_warnings() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", Some(1.0), &[(1.0, 0.191)]);
    let out = dir.path().join("w.json");
    let run = ldecay(&[
        "window", "--model", path_str(&model), "--ratio-max", "0.2", "--p", "2", "--out", path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("warning:"), "{}", run.stdout);
    let report = json(&out);
    assert!(!report["warnings"].as_array().unwrap().is_empty());
    assert!(report["empty"]["smallest_xi"].as_f64().unwrap() > 1e-4);
}

#[test]
fn window_small_momentum_margin_warning() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", Some(1e4), &[(1.0, 1.0)]);
    let out = dir.path().join("w.json");
    let run = ldecay(&[
        "window", "--model", path_str(&model), "--p", "150", "--out", path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = json(&out);
    assert_eq!(report["margins"]["pt_satisfied"], Value::Bool(false));
    assert!(report["warnings"][0].as_str().unwrap().starts_with("pt at the window edge"));
}

#[test]
fn phi_figure_three_regime() {
    let dir = TempDir::new().unwrap();
    let model = bundled(&dir, "m.json", lorentz_decay_cli::figures::THETA_3_5_MODEL);
    let out = dir.path().join("phi.csv");
    let run = ldecay(&[
        "phi", "--model", path_str(&model), "--M", "500", "--ratio-max", "0.05", "--p", "1000", "--grid",
        "10:200:60:geom", "--out", path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.starts_with("gamma = 2.236068"), "{}", run.stdout);
    let deviation = column(&out, "deviation");
    assert!(deviation.iter().all(|d| *d < 1e-2), "{deviation:?}");
}

#[test]
fn phi_figure_four_gamma() {
    let dir = TempDir::new().unwrap();
    let model = bundled(&dir, "m.json", lorentz_decay_cli::figures::THETA_1_2_MODEL);
    let out = dir.path().join("phi.csv");
    let run = ldecay(&[
        "phi", "--model", path_str(&model), "--M", "400", "--ratio-max", "0.06", "--p", "600", "--grid",
        "10:1300:40:geom", "--out", path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.starts_with("gamma = 1.802776"), "{}", run.stdout);
    assert_eq!(column(&out, "t_over_gamma").len(), 40);
}

#[test]
fn phi_at_rest_is_identity() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", Some(1e4), &[(0.3, 0.2), (0.7, 1.5)]);
    let out = dir.path().join("phi.csv");
    let run = ldecay(&[
        "phi", "--model", path_str(&model), "--p", "0", "--grid", "0.5:30:30", "--out", path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    for (t, phi) in column(&out, "t").iter().zip(column(&out, "phi")) {
        assert!((phi - t).abs() < 1e-6 * t, "{phi} vs {t}");
    }
}

#[test]
fn oracle_compare_single_mode_in_window() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", Some(1000.0), &[(1.0, 1.0)]);
    let out = dir.path().join("o.csv");
    let p = 1000.0 * 3f64.sqrt();
    let run = ldecay(&[
        "oracle-compare", "--model", path_str(&model), "--p", &p.to_string(), "--grid", "1:8:8", "--out",
        path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rel = csv_column(&out, "rel_diff");
    let valid: Vec<bool> = {
        let mut reader = csv::Reader::from_path(&out).unwrap();
        reader.records().map(|r| &r.unwrap()[4] == "true").collect()
    };
    assert!(valid.iter().any(|v| *v));
    for (r, v) in rel.iter().zip(&valid) {
        if *v {
            assert!(r.unwrap() <= 1e-3, "{r:?}");
        }
    }
    assert!(run.stdout.contains("max rel_diff"), "{}", run.stdout);
}

#[test]
fn oracle_compare_at_rest() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", Some(1e4), &[(1.0, 1.0)]);
    let out = dir.path().join("o.csv");
    let run = ldecay(&[
        "oracle-compare", "--model", path_str(&model), "--p", "0", "--grid", "0.5:5:6", "--out", path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    for r in csv_column(&out, "rel_diff") {
        assert!(r.unwrap() <= 1e-6, "{r:?}");
    }
}

#[test]
fn oracle_compare_keeps_off_regime_rows() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", Some(1000.0), &[(1.0, 1.0)]);
    let out = dir.path().join("o.csv");
    let p = 1000.0 * 3f64.sqrt();
    // t = 0.01 and 0.1 fall before the window
    let run = ldecay(&[
        "oracle-compare", "--model", path_str(&model), "--p", &p.to_string(), "--grid", "0.01:5:4:geom",
        "--out", path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let valid: Vec<String> = reader.records().map(|r| r.unwrap()[4].to_string()).collect();
    assert_eq!(valid.len(), 4);
    assert_eq!(valid[0], "false");
    assert!(run.stdout.contains("over 2 valid rows of 4") || run.stdout.contains("valid rows of 4"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let curve = dir.path().join("c.csv");
    assert_eq!(
        ldecay(&["sample", "--theta", "0.5", "--grid", "1:50:40:geom", "--out", path_str(&curve)]).code,
        0
    );
    let mut outputs = Vec::new();
    for k in 0..2 {
        let model = dir.path().join(format!("m{k}.json"));
        let run = ldecay(&[
            "fit", "--input", path_str(&curve), "--modes", "4", "--restarts", "3", "--seed", "7", "--M", "5000",
            "--out", path_str(&model),
        ]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        let phi = dir.path().join(format!("phi{k}.csv"));
        let run = ldecay(&[
            "phi", "--model", path_str(&model), "--p", "6000", "--grid", "5:100:30:geom", "--out", path_str(&phi),
        ]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        outputs.push((fs::read(&model).unwrap(), fs::read(&phi).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn transform_csv_feeds_fit() {
    let dir = TempDir::new().unwrap();
    let model = write_model(&dir, "m.json", Some(1e4), &[(1.0, 0.8)]);
    let out = dir.path().join("p.csv");
    let run = ldecay(&[
        "transform", "--model", path_str(&model), "--p", "0", "--grid", "0.1:10:50", "--out", path_str(&out),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let refit = dir.path().join("r.json");
    let run = ldecay(&[
        "fit", "--input", path_str(&out), "--column", "p_rest", "--kind", "probability", "--modes", "1", "--out",
        path_str(&refit),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let gamma = json(&refit)["modes"][0]["gamma"].as_f64().unwrap();
    assert!((gamma - 0.8).abs() < 1e-6, "{gamma}");
}

#[test]
fn figures_command_writes_every_curve() {
    let dir = TempDir::new().unwrap();
    let run = ldecay(&["figures", "--out", path_str(dir.path()), "--points", "30"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let summary = json(&dir.path().join("summary.json"));
    let curves = summary["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 18);
    for c in curves {
        let file = dir.path().join(c["file"].as_str().unwrap());
        assert!(file.exists());
    }
}
