use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn spdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdc"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

/// Shipped config with `edit` applied to its text, written to a temp dir.
fn edited(name: &str, edit: impl Fn(&str) -> String) -> (tempfile::TempDir, String) {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join(name)).unwrap();
    let changed = edit(&text);
    assert_ne!(text, changed, "edit did not apply");
    let path = dir.path().join(name);
    std::fs::write(&path, changed).unwrap();
    (dir, path.display().to_string())
}

/// Rows of a scan CSV as (x, rate, status).
fn rows(csv: &str) -> Vec<(f64, f64, String)> {
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("x,pairs_per_s_per_mW,xi_agg,a_plus_b_plus,status")
    );
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 5, "{l}");
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[4].to_string(),
            )
        })
        .collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn rate_with_oracle_agrees_with_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rate.json");
    let o = spdc(&[
        "rate",
        "--config",
        &config("type2_literal.json"),
        "--oracle",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("oracle"));
    let v = json(&out);
    let dev = v["relative_deviation"].as_f64().unwrap();
    assert!(dev.abs() < 0.01, "{dev}");
    assert!(v["closed_form"]["pairs_per_s_per_mw"].as_f64().unwrap() > 0.0);
}

#[test]
fn energy_violation_is_rejected() {
    let (_d, path) = edited("type2_literal.json", |t| {
        t.replace("\"idler\": 1.55e-6", "\"idler\": 1.56e-6")
    });
    let o = spdc(&["rate", "--config", &path]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("energy conservation"), "{}", stderr(&o));
}

#[test]
fn invalid_field_is_named() {
    let (_d, path) = edited("type2_literal.json", |t| {
        t.replace("\"length\": 0.01", "\"length\": 0.0")
    });
    let o = spdc(&["rate", "--config", &path]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("material.length"), "{}", stderr(&o));
}

#[test]
fn zero_nonlinearity_gives_zero_rate() {
    let (d, path) = edited("type2_literal.json", |t| {
        t.replace("\"d_eff\": 2.4e-12", "\"d_eff\": 0.0")
    });
    let out = d.path().join("rate.json");
    let o = spdc(&["rate", "--config", &path, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        json(&out)["closed_form"]["pairs_per_s_per_mw"].as_f64(),
        Some(0.0)
    );
}

#[test]
fn equal_group_indices_point_to_degenerate_path() {
    let o = spdc(&["rate", "--config", &config("ppln_degenerate.json")]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--degenerate"), "{}", stderr(&o));
    let o = spdc(&[
        "rate",
        "--config",
        &config("ppln_degenerate.json"),
        "--degenerate",
        "--tol",
        "1e-3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("degenerate"));
}

#[test]
fn dispersion_files_resolve_relative_to_config() {
    let o = spdc(&["rate", "--config", &config("ppktp_type2.json")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("pairs/s/mW"));
}

#[test]
fn xi_scan_has_one_interior_maximum() {
    let o = spdc(&[
        "scan",
        "--config",
        &config("type2_literal.json"),
        "--variable",
        "xi",
        "--from",
        "0.01",
        "--to",
        "10",
        "--points",
        "100",
        "--log",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 100);
    assert!(r.iter().all(|row| row.2 == "ok"));
    let maxima: Vec<usize> = (1..r.len() - 1)
        .filter(|&i| r[i].1 > r[i - 1].1 && r[i].1 > r[i + 1].1)
        .collect();
    assert_eq!(maxima.len(), 1, "{maxima:?}");
    let top = r.iter().map(|row| row.1).fold(f64::MIN, f64::max);
    assert!(r[0].1 < top && r[99].1 < top);
}

/// Largest `|R(Δk) − R(−Δk)| / R(0)` of a symmetric delta_k scan.
fn delta_k_asymmetry(path: &str) -> f64 {
    let o = spdc(&["scan", "--config", path]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 41);
    let centre = r[20].1;
    assert_eq!(r[20].0, 0.0);
    assert!(r.iter().all(|row| row.1 <= centre * (1.0 + 1e-12)));
    (0..20)
        .map(|i| {
            assert!((r[i].0 + r[40 - i].0).abs() < 1e-9);
            (r[i].1 - r[40 - i].1).abs() / centre
        })
        .fold(0.0, f64::max)
}

#[test]
fn collimated_delta_k_scan_is_symmetric() {
    // The residual asymmetry is the Gouy shift of the peak, first order in ξ.
    let xi = 4.282815e-3;
    let wide = delta_k_asymmetry(&config("collimated.json"));
    assert!(wide < 2.0 * xi, "{wide:e}");
    let (_d, path) = edited("collimated.json", |t| {
        t.replace("4.0e-4", "8.0e-4")
            .replace("5.656854249492381e-4", "1.1313708498984762e-3")
    });
    let narrow = delta_k_asymmetry(&path);
    assert!(
        (wide / narrow / 4.0 - 1.0).abs() < 0.05,
        "{wide:e} {narrow:e}"
    );
}

#[test]
fn two_points_give_two_rows() {
    let o = spdc(&[
        "scan",
        "--config",
        &config("type2_literal.json"),
        "--variable",
        "waist",
        "--from",
        "1e-5",
        "--to",
        "1e-4",
        "--points",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(rows(&stdout(&o)).len(), 2);
}

#[test]
fn degenerate_rows_are_flagged_and_the_run_continues() {
    let o = spdc(&[
        "scan",
        "--config",
        &config("ppln_degenerate.json"),
        "--variable",
        "xi",
        "--from",
        "0.1",
        "--to",
        "1",
        "--points",
        "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 3);
    assert!(r
        .iter()
        .all(|row| row.1.is_nan() && row.2 == "degenerate_dispersion"));
}

#[test]
fn scan_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let o = spdc(&[
            "scan",
            "--config",
            &config("type2_literal.json"),
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn shipped_table_passes() {
    let o = spdc(&["table", "--config", &config("table1.cfg")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert_eq!(s.matches("PASS").count(), 3, "{s}");
    assert!(!s.contains("FAIL"));
}

#[test]
fn identity_factors_reproduce_previous_column() {
    let (d, path) = edited("table1.cfg", |t| {
        t.replace("1.00648", "1.0")
            .replace("1.09166", "1.0")
            .replace("1.02996", "1.0")
    });
    let out = d.path().join("t.json");
    let o = spdc(&["table", "--config", &path, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for row in json(&out).as_array().unwrap() {
        assert_eq!(row["computed"], row["rate_previous"]);
    }
}

#[test]
fn perturbed_factor_is_reported_as_failure() {
    let (_d, path) = edited("table1.cfg", |t| t.replace("1.09166", "1.2"));
    let o = spdc(&["table", "--config", &path]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    let line = s.lines().find(|l| l.contains("BiBO")).unwrap();
    assert!(line.ends_with("FAIL") && line.contains("+9.9"), "{line}");
}

#[test]
fn missing_table_field_is_rejected() {
    let (_d, path) = edited("table1.cfg", |t| {
        t.replacen("\"rate_revised\": 95.43e6,", "", 1)
    });
    let o = spdc(&["table", "--config", &path]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("rate_revised"), "{}", stderr(&o));
}

fn optimum(args: &[&str]) -> f64 {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("opt.json");
    let mut all = vec!["optimize", "--out", out.to_str().unwrap()];
    all.extend_from_slice(args);
    let o = spdc(&all);
    assert!(o.status.success(), "{}", stderr(&o));
    json(&out)["xi_opt"].as_f64().unwrap()
}

#[test]
fn optimum_matches_dense_scan_and_is_stable() {
    let cfg = config("type2_literal.json");
    let xi = optimum(&["--config", &cfg, "--xi-min", "0.01", "--xi-max", "100"]);
    let o = spdc(&[
        "scan",
        "--config",
        &cfg,
        "--variable",
        "xi",
        "--from",
        "0.01",
        "--to",
        "100",
        "--points",
        "1000",
        "--log",
    ]);
    let r = rows(&stdout(&o));
    let best = r
        .iter()
        .fold(&r[0], |b, row| if row.1 > b.1 { row } else { b })
        .0;
    let step = r[1].0 / r[0].0;
    assert!(xi / best < step && best / xi < step, "{xi} vs {best}");
    let again = optimum(&[
        "--config",
        &cfg,
        "--xi-min",
        &format!("{}", 0.5 * xi),
        "--xi-max",
        &format!("{}", 2.0 * xi),
    ]);
    assert!((again / xi - 1.0).abs() < 1e-4, "{again} vs {xi}");
}

#[test]
fn inverted_range_is_a_usage_error() {
    let o = spdc(&[
        "optimize",
        "--config",
        &config("type2_literal.json"),
        "--xi-min",
        "5",
        "--xi-max",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("xi range"));
    let o = spdc(&[
        "scan",
        "--config",
        &config("type2_literal.json"),
        "--from",
        "5",
        "--to",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_count_must_be_positive() {
    let o = Command::new(env!("CARGO_BIN_EXE_spdc"))
        .args(["table", "--config", &config("table1.cfg")])
        .env("SPDC_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("SPDC_THREADS"));
}
