use std::path::Path;
use std::process::{Command, Output};

use streamrisk_cli::config::parse_header;
use streamrisk_cli::table::{parse, CltRow, CompareRow, MseRow, OracleRow, RateFitRow};

fn streamrisk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streamrisk"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("STREAMRISK_THREADS")
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = "dist = uniform:0,1\nalpha = 0.5\nn_grid = 10,100\nreplicates = 2\nseed = 11\n";

#[test]
fn oracle_uniform_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = streamrisk(&["oracle", "--dist", "uniform:0,1", "--alpha", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<OracleRow> = parse(&read(dir.path(), "oracle.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!((r.theta, r.vartheta, r.density), (0.5, 0.75, 1.0));
        assert!((r.v_alpha - 0.1510417).abs() < 1e-7);
        assert!(r.discrepancy < 1e-8);
    }
}

#[test]
fn oracle_pareto_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = streamrisk(&["oracle", "--dist", "pareto:1,3", "--alpha", "0.9"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<OracleRow> = parse(&read(dir.path(), "oracle.csv")).unwrap();
    assert!((rows[0].ratio - 1.5).abs() < 1e-12);
}

#[test]
fn bad_alpha_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = streamrisk(&["oracle", "--dist", "uniform:0,1", "--alpha", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha must lie in (0,1)"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.cfg");
    let out = streamrisk(&["rates", "--config", missing.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(streamrisk(&["rates"], dir.path()).status.code(), Some(2));
    assert_eq!(streamrisk(&["frobnicate"], dir.path()).status.code(), Some(2));
    let cfg = write_config(dir.path(), "dist = uniform:0,1\nalpha = 0.5\nbogus = 1\n");
    assert_eq!(streamrisk(&["rates", "--config", &cfg], dir.path()).status.code(), Some(2));
    let cfg = write_config(dir.path(), "dist = uniform:0,1\nalpha = 0.5\na = 0.4\n");
    assert_eq!(streamrisk(&["rates", "--config", &cfg], dir.path()).status.code(), Some(2));
}

#[test]
fn clt_with_one_replicate_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "dist = uniform:0,1\nalpha = 0.5\nn_grid = 10\nreplicates = 1\n");
    let out = streamrisk(&["clt", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("replicates ≥ 30 required"));
}

#[test]
fn rates_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(streamrisk(&["rates", "--config", &cfg], &a).status.code(), Some(0));
    assert_eq!(streamrisk(&["rates", "--config", &cfg, "--threads", "3"], &b).status.code(), Some(0));
    for name in ["mse.csv", "ratefit.csv", "rates.svg"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
    let mse: Vec<MseRow> = parse(&read(&a, "mse.csv")).unwrap();
    assert_eq!(mse.len(), 8);
    // Two checkpoints are too few for a fit.
    let fits: Vec<RateFitRow> = parse(&read(&a, "ratefit.csv")).unwrap();
    assert!(fits.iter().all(|f| f.slope.is_none()));
}

#[test]
fn seed_override_lands_in_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(streamrisk(&["rates", "--config", &cfg, "--seed", "987"], dir.path()).status.code(), Some(0));
    let text = read(dir.path(), "mse.csv");
    let (command, config) = parse_header(text.lines().next().unwrap()).unwrap();
    assert_eq!(command, "rates");
    assert_eq!(config.master_seed, 987);
    assert_eq!(config.n_grid, vec![10, 100]);
}

#[test]
fn slow_regime_theory_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "dist = exponential:1\nalpha = 0.9\na = 0.6\nb = 0.75\nn_grid = 10,100,1000\nreplicates = 30\nwarm_start = true\n",
    );
    assert_eq!(streamrisk(&["rates", "--config", &cfg], dir.path()).status.code(), Some(0));
    let fits: Vec<RateFitRow> = parse(&read(dir.path(), "ratefit.csv")).unwrap();
    let embedded = fits.iter().find(|f| f.variant == "embedded").unwrap();
    assert_eq!(embedded.theory_slope, -0.75);
    assert!(embedded.slope.is_some());

    assert_eq!(streamrisk(&["clt", "--config", &cfg], dir.path()).status.code(), Some(0));
    let text = read(dir.path(), "clt.csv");
    let rows: Vec<CltRow> = parse(&text).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r.theory_12, None);
        assert!((r.theory_22.unwrap() - 54.0818073340992).abs() < 1e-9);
        assert!((r.theory_11.unwrap() - 9.0).abs() < 1e-9);
    }
    assert!(text.lines().nth(2).unwrap().contains(",n/a,"));
    assert!(read(dir.path(), "clt.svg").starts_with("<svg"));
}

#[test]
fn harmonic_clt_theory_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "dist = uniform:0,1\nalpha = 0.5\nn_grid = 100\nreplicates = 30\nwarm_start = true\n",
    );
    assert_eq!(streamrisk(&["clt", "--config", &cfg], dir.path()).status.code(), Some(0));
    let rows: Vec<CltRow> = parse(&read(dir.path(), "clt.csv")).unwrap();
    let r = &rows[0];
    assert!((r.theory_11.unwrap() - 0.25).abs() < 1e-12);
    assert!((r.theory_12.unwrap() - 0.125).abs() < 1e-12);
    assert!((r.theory_22.unwrap() - 0.3541666666666667).abs() < 1e-9);
    assert!(read(dir.path(), "clt.svg").contains("<polygon"));
}

#[test]
fn compare_reports_boundary_for_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(streamrisk(&["compare", "--config", &cfg], dir.path()).status.code(), Some(0));
    let rows: Vec<CompareRow> = parse(&read(dir.path(), "compare.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.verdict == "boundary" && r.agrees == "n/a"));
}

#[test]
fn asymptotics_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = streamrisk(&["asymptotics", "--dist", "exponential:1", "--alpha", "0.9"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = read(dir.path(), "asymptotics.csv");
    assert!(text.contains("c_alpha_b1,324.24539877785"));
    assert!(text.contains("verdict,competitors-win"));
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_streamrisk"))
        .args(["rates", "--config", &cfg, "--out"])
        .arg(dir.path())
        .env("STREAMRISK_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_exits_3_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "dist = uniform:0,1\nalpha = 0.5\nb1 = 1e200\nn_grid = 10,100\nreplicates = 2\n");
    let out = streamrisk(&["rates", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("replicate") && err.contains("diverged at step"), "{err}");
}
