use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn scflab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scflab"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn f(cell: &str) -> f64 {
    cell.parse().unwrap()
}

#[test]
fn simulate_defaults_reproduce_bounded_chi() {
    let dir = TempDir::new().unwrap();
    let out = scflab(dir.path(), &["simulate"]);
    assert!(out.status.success());
    for name in ["trace.csv", "chi_field.csv", "wigner_field.csv", "run_meta.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }

    let (h, rows) = csv(&dir.path().join("chi_field.csv"));
    let (t, s, a) = (col(&h, "t"), col(&h, "xi_sq"), col(&h, "abs"));
    let mut slices: Vec<String> = rows.iter().map(|r| r[t].clone()).collect();
    slices.dedup();
    assert_eq!(slices.len(), 6);
    assert_eq!(f(&slices[5]), 10.0);
    for r in &rows {
        assert!(f(&r[a]) <= 1.0 + 1e-9);
        if f(&r[s]) == 0.0 {
            assert!((f(&r[a]) - 1.0).abs() < 1e-12);
        }
    }
    assert!(rows.iter().all(|r| f(&r[s]) <= 9.0 + 1e-12));

    let (h, rows) = csv(&dir.path().join("trace.csv"));
    let (t, p) = (col(&h, "t"), col(&h, "rho_1_1_re"));
    let half_period = std::f64::consts::PI / (7f64.sqrt() / 2.0);
    assert!(rows.iter().any(|r| f(&r[p]) < -0.3 && (f(&r[t]) - half_period).abs() < 0.2));

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["ratio"], 1.0);
    assert!((meta["omega"][0].as_f64().unwrap() - 7f64.sqrt() / 2.0).abs() < 1e-15);
}

#[test]
fn identical_configs_give_identical_files() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["simulate", "--t-end", "2", "--ratio", "2.5"];
    assert!(scflab(a.path(), &args).status.success());
    assert!(scflab(b.path(), &args).status.success());
    for name in ["trace.csv", "chi_field.csv", "wigner_field.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn zero_coupling_is_static() {
    let dir = TempDir::new().unwrap();
    assert!(scflab(dir.path(), &["simulate", "--ratio", "0", "--t-end", "2"]).status.success());
    let (_, rows) = csv(&dir.path().join("trace.csv"));
    for r in &rows {
        assert_eq!(r[1..], rows[0][1..]);
    }
    let out = scflab(dir.path(), &["compare", "--ratio", "0", "--t-end", "2"]);
    assert!(out.status.success());
    let (h, rows) = csv(&dir.path().join("compare.csv"));
    for name in ["rho11_dev", "chi_dev", "wigner0_dev"] {
        let c = col(&h, name);
        assert!(rows.iter().all(|r| f(&r[c]) < 1e-14));
    }
}

#[test]
fn audit_reports_headline_violations() {
    let dir = TempDir::new().unwrap();
    let out = scflab(dir.path(), &["audit", "--t-end", "5"]);
    assert!(out.status.success());
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("density positivity   : broken at t = 1.4605"), "{summary}");
    assert!(summary.contains("chi bounds           : not broken (never within horizon)"));
    assert!(summary.contains("wigner bound 2/pi    : broken at t = 1.4605"));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("audit.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["first_time_chi_exceeds_1"], "never within horizon");
    let records = report["records"].as_array().unwrap();
    assert_eq!(records.len(), 501);
    assert!(report["summary"]["min_rho_eig"].as_f64().unwrap() < -0.30);
}

#[test]
fn audit_overdamped_and_threshold_cases() {
    let dir = TempDir::new().unwrap();
    let out = scflab(dir.path(), &["audit", "--ratio", "0.2", "--t-end", "20", "--grid-spec", "audit_chi_count=50"]);
    assert!(out.status.success());
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    for line in ["density positivity", "chi bounds", "wigner bound 2/pi"] {
        let found = summary.lines().find(|l| l.starts_with(line)).unwrap();
        assert!(found.contains("never within horizon"), "{summary}");
    }
    // complete positivity is measured here, not asserted
    assert!(summary.contains("min Choi eigenvalue"));

    let out = scflab(dir.path(), &["audit", "--ratio", "1.6410", "--t-end", "3"]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("audit.json")).unwrap()).unwrap();
    let min_pop = report["summary"]["min_initial_population"].as_f64().unwrap();
    assert!((min_pop + 0.5).abs() < 1e-3, "{min_pop}");
}

#[test]
fn sweep_locates_regime_boundaries() {
    let dir = TempDir::new().unwrap();
    let out = scflab(dir.path(), &["sweep"]);
    assert!(out.status.success());
    let (h, rows) = csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 30);
    let (r, p, c) = (col(&h, "ratio"), col(&h, "min_rho_nn"), col(&h, "first_chi_exceeds_1"));
    let first_negative = rows.iter().find(|row| f(&row[p]) < 0.0).unwrap();
    assert_eq!(f(&first_negative[r]), 0.4);
    let first_chi = rows.iter().find(|row| row[c] != "never within horizon").unwrap();
    assert_eq!(f(&first_chi[r]), 1.7);
}

#[test]
fn singleton_sweep_matches_audit() {
    let dir = TempDir::new().unwrap();
    assert!(scflab(dir.path(), &["sweep", "--ratios", "1.2", "--t-end", "4"]).status.success());
    assert!(scflab(dir.path(), &["audit", "--ratio", "1.2", "--t-end", "4"]).status.success());
    let (h, rows) = csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 1);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("audit.json")).unwrap()).unwrap();
    let s = &report["summary"];
    assert_eq!(f(&rows[0][col(&h, "min_rho_nn")]), s["min_initial_population"].as_f64().unwrap());
    assert_eq!(f(&rows[0][col(&h, "max_sup_abs_chi")]), s["max_sup_abs_chi"].as_f64().unwrap());
    assert_eq!(
        f(&rows[0][col(&h, "first_rho_negative")]),
        s["first_time_rho_negative"]["time"].as_f64().unwrap()
    );
}

#[test]
fn compare_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = scflab(dir.path(), &["compare"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = csv(&dir.path().join("compare.csv"));
    let c = col(&h, "rho11_dev");
    assert!(rows.iter().all(|r| f(&r[c]) < 1e-5));

    let out = scflab(dir.path(), &["compare", "--dt", "0.2", "--tolerance", "1e-8"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("tolerance breach"), "{err}");
    assert!(dir.path().join("compare.csv").exists());
}

#[test]
fn configuration_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "ratio = 1\n# comment\nn_cut = many\n").unwrap();
    let out = scflab(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("run.cfg:3: n_cut"), "{err}");

    let out = scflab(dir.path(), &["simulate", "--ratio", "-0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = scflab(dir.path(), &["compare", "--fock", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = scflab(dir.path(), &["simulate", "--grid-spec", "chi_extent=9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "ratio = 3\nt_end = 1\nslices = 2\n").unwrap();
    let args = ["simulate", "--config", cfg.to_str().unwrap(), "--ratio", "0.5"];
    assert!(scflab(dir.path(), &args).status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["ratio"], 0.5);
    assert_eq!(meta["t_end"], 1.0);
    assert_eq!(meta["config"]["slices"], 2);
}
