//! Black-box tests of the `doa` binary: exit codes, output file shapes and
//! reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn doa() -> Command {
    Command::new(env!("CARGO_BIN_EXE_doa"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("doa-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    doa().args(args).output().expect("binary runs")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn spectrum_produces_full_grid_csv() {
    let out = temp_dir("spectrum");
    let output = run(&[
        "spectrum",
        "--set",
        "angles_deg=10,28,49",
        "--set",
        "trials=2",
        "--set",
        "estimators=psi55,music",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);

    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "angle_deg,psi55,music");
    assert_eq!(lines.len() - 1, 1801, "0.1 deg grid spans 1801 rows");
    assert!(lines[1].starts_with("-90.000000,"));
    assert!(lines[1801].starts_with("90.000000,"));

    let meta = std::fs::read_to_string(out.join("run_meta.txt")).unwrap();
    assert!(meta.contains("config_hash = "));
    assert!(meta.contains("command = spectrum"));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("config_hash:"));
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let output = run(&["spectrum", "--config", "/nonexistent/path.cfg"]);
    assert_exit(&output, 2);
}

#[test]
fn partition_violation_is_a_usage_error() {
    let output = run(&[
        "simulate",
        "--set",
        "angles_deg=1,2,3",
        "--set",
        "n_sensors=12",
    ]);
    assert_exit(&output, 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("4*p_sources"), "stderr: {stderr}");
}

#[test]
fn empty_estimator_list_is_a_usage_error() {
    let output = run(&["rmse", "--set", "angles_deg=10", "--set", "estimators="]);
    assert_exit(&output, 2);
}

#[test]
fn noise_free_spectrum_peaks_at_truth() {
    let out = temp_dir("noise-free");
    let output = run(&[
        "spectrum",
        "--set",
        "angles_deg=10,28,49",
        "--set",
        "snr_db=inf",
        "--set",
        "trials=1",
        "--set",
        "estimators=psi55",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    let stdout = String::from_utf8_lossy(&output.stdout);
    let peak_line = stdout
        .lines()
        .find(|l| l.starts_with("psi55"))
        .expect("peak table row");
    for want in ["10.00", "28.00", "49.00"] {
        assert!(peak_line.contains(want), "peak line: {peak_line}");
    }
}

#[test]
fn rmse_sweep_writes_one_row_per_snr() {
    let out = temp_dir("rmse");
    let output = run(&[
        "rmse",
        "--config",
        config_path("rmse_sweep.cfg").to_str().unwrap(),
        "--set",
        "trials=1",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    let csv = std::fs::read_to_string(out.join("rmse.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len() - 1, 21, "0..20 dB sweep spans 21 rows");
    assert!(lines[0].starts_with("snr_db,psi51_rmse_deg,psi51_resolve_rate,"));
    assert!(lines[0].contains("esprit_rmse_deg"));
}

#[test]
fn identical_invocations_produce_identical_files() {
    let out1 = temp_dir("det1");
    let out2 = temp_dir("det2");
    let common = [
        "--set",
        "angles_deg=10,28,49",
        "--set",
        "trials=3",
        "--set",
        "seed=7",
        "--set",
        "snr_sweep_db=0,10,20",
        "--set",
        "estimators=psi51,psi55,esprit",
    ];
    let a = doa()
        .arg("rmse")
        .args(common)
        .args(["--output", out1.to_str().unwrap(), "--threads", "1"])
        .output()
        .unwrap();
    let b = doa()
        .arg("rmse")
        .args(common)
        .args(["--output", out2.to_str().unwrap(), "--threads", "3"])
        .output()
        .unwrap();
    assert_exit(&a, 0);
    assert_exit(&b, 0);
    let csv1 = std::fs::read(out1.join("rmse.csv")).unwrap();
    let csv2 = std::fs::read(out2.join("rmse.csv")).unwrap();
    assert_eq!(csv1, csv2, "thread count changed the report bytes");
}

#[test]
fn simulate_writes_snapshot_matrix() {
    let out = temp_dir("simulate");
    let output = run(&[
        "simulate",
        "--set",
        "angles_deg=10,28,49",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_exit(&output, 0);
    let csv = std::fs::read_to_string(out.join("snapshots.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "18,200");
    assert_eq!(lines.len(), 19, "header plus one row per sensor");
    assert_eq!(lines[1].split(',').count(), 400, "re/im interleaved");

    // byte-identical on a second run
    let out2 = temp_dir("simulate2");
    let output2 = run(&[
        "simulate",
        "--set",
        "angles_deg=10,28,49",
        "--output",
        out2.to_str().unwrap(),
    ]);
    assert_exit(&output2, 0);
    let csv2 = std::fs::read_to_string(out2.join("snapshots.csv")).unwrap();
    assert_eq!(csv, csv2);
}

#[test]
fn selftest_default_passes() {
    let output = run(&["selftest"]);
    assert_exit(&output, 0);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("trace(psi) = -4N"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn selftest_coherent_reports_singular_block_and_fails() {
    let output = run(&["selftest", "--coherent"]);
    assert_exit(&output, 3);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("SingularBlock"), "stdout: {stdout}");
}

#[test]
fn selftest_coherent_with_fb_passes() {
    let output = run(&["selftest", "--coherent", "--fb"]);
    assert_exit(&output, 0);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("coherent peaks at true angles"));
}

#[test]
fn shipped_configs_carry_the_bench_parameters() {
    use doa_cli::config::ConfigBuilder;
    for name in ["operators.cfg", "comparison.cfg", "rmse_sweep.cfg"] {
        let mut b = ConfigBuilder::new();
        b.load_file(&config_path(name)).unwrap();
        let cfg = b.build().unwrap();
        assert_eq!(cfg.n_sensors, 18, "{name}");
        assert_eq!(cfg.spacing_ratio, 0.5, "{name}");
        assert_eq!(cfg.angles_deg, vec![10.0, 28.0, 49.0], "{name}");
        assert_eq!(cfg.snapshots, 200, "{name}");
        assert_eq!(cfg.trials, 100, "{name}");
        assert_eq!(cfg.grid_step_deg, 0.1, "{name}");
    }
    let mut b = ConfigBuilder::new();
    b.load_file(&config_path("rmse_sweep.cfg")).unwrap();
    let sweep = b.build().unwrap();
    assert_eq!(sweep.snr_sweep_db.len(), 21);
    assert_eq!(sweep.snr_sweep_db[0], 0.0);
    assert_eq!(sweep.snr_sweep_db[20], 20.0);
}

#[test]
fn env_var_provides_default_output_dir() {
    let out = temp_dir("envvar");
    let output = doa()
        .args(["simulate", "--set", "angles_deg=5", "--set", "snapshots=3"])
        .env("DOA_OUTPUT_DIR", out.to_str().unwrap())
        .output()
        .unwrap();
    assert_exit(&output, 0);
    assert!(out.join("snapshots.csv").exists());
}

#[test]
fn exhausted_skip_budget_is_a_runtime_failure() {
    // N = 13 with P = 3 leaves a one-row fifth block, so psi51 cannot be
    // constructed in any trial: every trial is skipped and the run fails
    let out = temp_dir("skip-budget");
    let output = run(&[
        "spectrum",
        "--set",
        "angles_deg=10,28,49",
        "--set",
        "n_sensors=13",
        "--set",
        "trials=3",
        "--set",
        "estimators=psi51",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_exit(&output, 3);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("skipped"), "stderr: {stderr}");
}
