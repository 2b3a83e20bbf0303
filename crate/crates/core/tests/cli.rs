use std::path::Path;
use std::process::{Command, Output};

fn bamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bamp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}\t")))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
        .parse()
        .unwrap()
}

const MCAR: &str = r#"schema_version = 1
mode = "rows-iid"
[data]
builtin = "mtcars01"
[copula]
family = "independence"
dim = 11
[probabilities]
kind = "constant"
value = 0.3333333333333333
"#;

#[test]
fn coeffs_prints_calibration() {
    let o = bamp(&["coeffs", "--p", "0.3333", "--eps", "0.05", "--cmin", "0", "--cmax", "1", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let logit = |p: f64| (p / (1.0 - p)).ln();
    assert!((value(&out, "beta0") - logit(0.2833)).abs() < 1e-4, "{out}");
    assert!((value(&out, "beta") - (logit(0.3833) - logit(0.2833))).abs() < 1e-4, "{out}");
    // 0.3333 is a rounded 1/3; the quoted pair belongs to the exact third
    assert!((value(&out, "beta0") - -0.9280).abs() < 5e-4, "{out}");
    assert!((value(&out, "beta") - 0.4526).abs() < 5e-4, "{out}");
    let third = bamp(&["coeffs", "--p", "0.3333333333333333", "--eps", "0.05", "--cmin", "0", "--cmax", "1"]);
    assert!((value(&stdout(&third), "beta0") - -0.9280).abs() < 1e-4);
}

#[test]
fn analyze_tables() {
    let o = bamp(&["analyze", "joint", "--copula", "independence", "--dim", "11", "--p", "0.3333333333333333"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((value(&stdout(&o), "joint_missingness_prob") - 5.645e-6).abs() < 1e-9);

    let o = bamp(&["analyze", "corr", "--copula", "homogeneous-gauss", "--rho", "0.7181", "--p1", "0.3333333333", "--p2", "0.3333333333"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((value(&stdout(&o), "correlation") - 0.5).abs() < 0.01);

    let o = bamp(&["analyze", "bounds", "--p1", "0.2", "--p2", "0.7"]);
    let out = stdout(&o);
    assert!((value(&out, "rho_max") - (0.2 - 0.14) / (0.16f64 * 0.21).sqrt()).abs() < 1e-6);

    // no exact evaluation without a Monte-Carlo budget
    let o = bamp(&["analyze", "joint", "--copula", "homogeneous-gauss", "--rho", "0.5", "--dim", "3", "--p", "0.3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("use-monte-carlo"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(bamp(&["coeffs", "--p", "0.3", "--bogus"]).status.code(), Some(2));
    assert_eq!(bamp(&[]).status.code(), Some(2));
    assert_eq!(bamp(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, MCAR).unwrap();
    let out = dir.path().join("out");
    let o = bamp(&["ampute", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "missing seed");
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));

    std::fs::write(&cfg, MCAR.replace("[probabilities]\nkind = \"constant\"\nvalue = 0.3333333333333333\n", "")).unwrap();
    let o = bamp(&["ampute", "--config", cfg.to_str().unwrap(), "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("probabilities"));

    let o = bamp(&["ampute", "--config", "/nonexistent/c.toml", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "a,b\n1,2\n3,oops\n").unwrap();
    let o = bamp(&["impute", "--input", csv.to_str().unwrap(), "--seed", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("column b"), "{err}");
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, MCAR).unwrap();
    let out = dir.path().join("out");
    let o = bamp(&["ampute", "--config", cfg.to_str().unwrap(), "--seed", "42", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let first = read_all(&out);
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["amputed.csv", "mask.csv", "resolved.toml"]);

    let resolved = dir.path().join("resolved.toml");
    std::fs::copy(out.join("resolved.toml"), &resolved).unwrap();
    std::fs::remove_dir_all(&out).unwrap();
    let o = bamp(&["ampute", "--config", resolved.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_all(&out), first);

    let mask = bamp::io::load_mask(&out.join("mask.csv")).unwrap();
    let amputed = bamp::io::load_amputed(&out.join("amputed.csv")).unwrap();
    assert_eq!(amputed.mask(), mask);
    assert!(mask.count_missing() > 0);
}

#[test]
fn render_and_impute() {
    let dir = tempfile::tempdir().unwrap();
    let ppm = dir.path().join("m.ppm");
    let o = bamp(&["render", "--input", "mtcars01", "--out", ppm.to_str().unwrap(), "--cell-size", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let bytes = std::fs::read(&ppm).unwrap();
    assert!(bytes.starts_with(b"P6\n22 64\n255\n"));

    let svg = dir.path().join("m.svg");
    let o = bamp(&["render", "--input", "mtcars01", "--out", svg.to_str().unwrap(), "--missing", "#00ff00"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains("<svg") && text.contains("#00ff00") == text.contains("fill=\"#00ff00\""));

    let csv = dir.path().join("x.csv");
    let mut text = String::from("a,b\n");
    for i in 0..20 {
        let a = i as f64 / 19.0;
        if i % 4 == 1 {
            text.push_str(&format!("{a},NA\n"));
        } else {
            text.push_str(&format!("{a},{}\n", a * a));
        }
    }
    std::fs::write(&csv, &text).unwrap();
    let out = dir.path().join("imp");
    let o = bamp(&["impute", "--input", csv.to_str().unwrap(), "--seed", "3", "--imputations", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let observed: Vec<f64> = (0..20).filter(|i| i % 4 != 1).map(|i| (i as f64 / 19.0).powi(2)).collect();
    for k in 1..=2 {
        let y = bamp::io::load_csv(&out.join(format!("imputed_{k}.csv"))).unwrap();
        for i in (0..20).filter(|i| i % 4 == 1) {
            assert!(observed.contains(&y.get(i, 1)));
        }
    }
}

#[test]
fn simulate_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = bamp(&[
        "simulate", "--seed", "5", "--replications", "8", "--estimator", "complete-case",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let samples = std::fs::read_to_string(dir.path().join("bias_samples.csv")).unwrap();
    let failures = std::fs::read_to_string(dir.path().join("bias_failures.csv")).unwrap();
    let summary = std::fs::read_to_string(dir.path().join("bias_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 6);
    // every replication is either a sample or a recorded failure
    assert_eq!(samples.lines().count() - 1 + failures.lines().count() - 1, 5 * 8);
}
