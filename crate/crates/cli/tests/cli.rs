use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ellshrink::bench::{parse_config, read_csv, CSV_HEADER, SEED_ENV_VAR};
use ellshrink::statistics::scm;
use ellshrink::DataMatrix;
use ellshrink_cli::parse_report;
use tempfile::TempDir;

fn ellshrink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellshrink"))
        .args(args)
        .env_remove(SEED_ENV_VAR)
        .output()
        .unwrap()
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn report_value(text: &str, key: &str) -> f64 {
    parse_report(text)
        .into_iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("no `{key}` in report:\n{text}"))
        .1
        .parse()
        .unwrap()
}

fn read_matrix(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn bundled_configs_parse() {
    for (name, scenarios) in [("fig1.cfg", 4), ("fig2.cfg", 11), ("fig3.cfg", 2)] {
        let text = fs::read_to_string(bundled(name)).unwrap();
        let configs = parse_config(&text).unwrap();
        assert_eq!(configs.len(), scenarios, "{name}");
        for cfg in &configs {
            cfg.validate().unwrap();
        }
    }
}

#[test]
fn bench_ar1_config_writes_all_records() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("ar1.csv");
    let out = ellshrink(&[
        "bench",
        "--config",
        bundled("fig1.cfg").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
        "--trials",
        "20",
        "--workers",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let records = read_csv(&out_path).unwrap();
    // 4 scenarios x 6 sample sizes x 4 estimators
    assert_eq!(records.len(), 96);
    assert!(records.iter().any(|r| r.scenario == "ar1-rho0.4-gaussian"));
    assert!(records.iter().any(|r| r.scenario == "ar1-rho0.1-t8"));
    assert!(records.iter().all(|r| r.trials == 20 && r.p == 100));
}

fn bench_bytes(config: &Path, workers: &str, seed: Option<&str>) -> Vec<u8> {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("out.csv");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ellshrink"));
    cmd.args([
        "bench",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ])
    .args(["--workers", workers, "--trials", "12"])
    .env_remove(SEED_ENV_VAR);
    if let Some(seed) = seed {
        cmd.env(SEED_ENV_VAR, seed);
    }
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    fs::read(out_path).unwrap()
}

#[test]
fn bench_output_does_not_depend_on_workers() {
    let config = bundled("fig3.cfg");
    assert_eq!(
        bench_bytes(&config, "1", None),
        bench_bytes(&config, "8", None)
    );
}

#[test]
fn seed_variable_overrides_config() {
    let config = bundled("fig3.cfg");
    let base = bench_bytes(&config, "2", None);
    let seeded = bench_bytes(&config, "2", Some("12345"));
    assert_ne!(base, seeded);
    assert_eq!(seeded, bench_bytes(&config, "1", Some("12345")));
    // the default master seed is 1
    assert_eq!(base, bench_bytes(&config, "2", Some("1")));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (
            "[[scenario]]\nname = \"x\"\ncovariance = { kind = \"ar1\", p = 10, rho = 0.3 }\nfamily = { kind = \"gaussian\" }\nn_values = []\n",
            "n_values",
        ),
        (
            "[[scenario]]\nname = \"x\"\ncovariance = { kind = \"ar1\", p = 10, rho = 0.3 }\nfamily = { kind = \"gaussian\" }\nn_values = [10]\ntrails = 5\n",
            "trails",
        ),
        (
            "[[scenario]]\nname = \"x\"\ncovariance = { kind = \"ar1\", p = 10, rho = 1.5 }\nfamily = { kind = \"gaussian\" }\nn_values = [10]\n",
            "covariance",
        ),
    ];
    for (i, (text, field)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.cfg"));
        fs::write(&path, text).unwrap();
        let out = ellshrink(&[
            "bench",
            "--config",
            path.to_str().unwrap(),
            "--out",
            dir.path().join("o.csv").to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2), "case {i}: {}", stderr(&out));
        assert!(stderr(&out).contains(field), "case {i}: {}", stderr(&out));
    }

    let out = ellshrink(&[
        "bench",
        "--config",
        "/nonexistent/x.cfg",
        "--out",
        "/tmp/o.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_ell_on_orthogonal_rows() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("x.csv");
    let est = dir.path().join("est.csv");
    fs::write(&data, "1,0\n0,1\n").unwrap();
    let out = ellshrink(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--method",
        "ell",
        "--out",
        est.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(report_value(&report, "beta"), 0.0);
    assert_eq!(report_value(&report, "alpha"), 0.5);
    assert_eq!(report_value(&report, "gamma_hat_sign"), 0.0);
    assert_eq!(report_value(&report, "p"), 2.0);
    assert_eq!(read_matrix(&est), vec![vec![0.5, 0.0], vec![0.0, 0.5]]);
}

#[test]
fn estimate_scm_matches_brute_force_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("x.csv");
    let est = dir.path().join("est.csv");
    let rows = vec![
        vec![0.3, -1.2, 2.5],
        vec![1.1, 0.4, -0.7],
        vec![-2.0, 0.9, 0.1],
        vec![0.5, 0.5, 1.5],
    ];
    let mut text = String::from("a,b,c\n");
    for r in &rows {
        text.push_str(&r.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
        text.push('\n');
    }
    fs::write(&data, text).unwrap();
    let out = ellshrink(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--method",
        "scm",
        "--out",
        est.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let got = read_matrix(&est);
    let expected = scm(&DataMatrix::from_rows(&rows).unwrap());
    for a in 0..3 {
        let brute: Vec<f64> = (0..3)
            .map(|b| rows.iter().map(|r| r[a] * r[b]).sum::<f64>() / 4.0)
            .collect();
        for b in 0..3 {
            assert!((got[a][b] - brute[b]).abs() < 1e-12);
            assert!(
                (got[a][b] - expected[(a, b)]).abs() <= 1e-15 * expected[(a, b)].abs().max(1.0)
            );
        }
    }
}

#[test]
fn estimate_transposed_file() {
    let dir = TempDir::new().unwrap();
    let (rows_path, cols_path) = (dir.path().join("r.csv"), dir.path().join("c.csv"));
    fs::write(&rows_path, "1,2\n3,-1\n0.5,4\n").unwrap();
    fs::write(&cols_path, "1,3,0.5\n2,-1,4\n").unwrap();
    let run = |path: &Path, transpose: bool| {
        let est = dir.path().join(format!("est-{transpose}.csv"));
        let mut args = vec![
            "estimate",
            "--data",
            path.to_str().unwrap(),
            "--method",
            "lw",
            "--out",
            est.to_str().unwrap(),
        ];
        if transpose {
            args.push("--transpose");
        }
        let out = ellshrink(&args);
        assert!(out.status.success(), "{}", stderr(&out));
        read_matrix(&est)
    };
    assert_eq!(run(&rows_path, false), run(&cols_path, true));
}

#[test]
fn estimate_zero_row_names_the_observation() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("x.csv");
    fs::write(&data, "x,y\n1,2\n0,0\n3,1\n").unwrap();
    let out = ellshrink(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--method",
        "ell",
        "--out",
        dir.path().join("e.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(
        err.contains("observation 1") && err.contains("line 3"),
        "{err}"
    );
}

#[test]
fn estimate_parse_error_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("x.csv");
    fs::write(&data, "1,2\n3,oops\n").unwrap();
    let out = ellshrink(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--method",
        "scm",
        "--out",
        dir.path().join("e.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 2") && err.contains("column 2"), "{err}");
}

#[test]
fn oracle_examples() {
    let out = ellshrink(&[
        "oracle", "--p", "100", "--n", "100", "--gamma", "2", "--kappa", "0",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!((report_value(&text, "beta_o") - 1.0 / 2.02).abs() < 1e-12);
    assert!((report_value(&text, "alpha_o") - 1.02 / 2.02).abs() < 1e-12);

    let out = ellshrink(&[
        "oracle", "--p", "100", "--n", "100", "--gamma", "2", "--kappa", "0.5",
    ]);
    let text = stdout(&out);
    assert!((report_value(&text, "beta_o") - 1.0 / 2.54).abs() < 1e-12);
    assert!((report_value(&text, "mse_scm") - 154.0).abs() < 1e-9);

    let out = ellshrink(&[
        "oracle", "--p", "7", "--n", "3", "--gamma", "1", "--kappa", "-0.1", "--eta", "2.5",
    ]);
    let text = stdout(&out);
    assert_eq!(report_value(&text, "beta_o"), 0.0);
    assert_eq!(report_value(&text, "alpha_o"), 2.5);
    assert_eq!(report_value(&text, "optimal_nmse"), 0.0);
}

#[test]
fn oracle_bound_violation_exits_2() {
    for args in [
        [
            "oracle", "--p", "10", "--n", "5", "--gamma", "0.5", "--kappa", "0",
        ],
        [
            "oracle", "--p", "10", "--n", "5", "--gamma", "2", "--kappa", "-0.5",
        ],
        [
            "oracle", "--p", "10", "--n", "0", "--gamma", "2", "--kappa", "0",
        ],
    ] {
        let out = ellshrink(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn unknown_method_exits_2() {
    let out = ellshrink(&[
        "estimate", "--data", "x.csv", "--method", "nope", "--out", "o.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
