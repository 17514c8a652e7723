//! `doa`: direction-of-arrival estimation experiments from the command line.
//!
//! Exit codes are a stable contract: 0 success, 2 configuration/usage error,
//! 3 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use doa_cli::config::{load_config, ExperimentConfig};
use doa_cli::formats::{
    render_rmse_csv, render_run_meta, render_snapshots_csv, render_spectrum_csv, write_text,
    RunMeta,
};
use doa_cli::harness::{run_rmse_sweep, run_spectrum_experiment};
use doa_cli::selftest::run_selftest;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

const CONFIG_HELP: &str = "\
Config file keys (one `key = value` per line, `#` comments, comma lists; \
every key also works with --set):
  n_sensors = 18           sensors in the line array (must exceed 4*P)
  spacing_ratio = 0.5      element spacing over wavelength
  carrier_hz = 1e9         carrier frequency
  angles_deg (required)    source azimuths in degrees, inside (-90, 90)
  powers = 1,...           per-source linear power
  snapshots = 200          samples per trial
  snr_db = 5               per-sensor SNR in dB; `inf` disables noise
  seed = 1                 RNG seed (trials derive private streams)
  grid_step_deg = 0.1      scan grid step over [-90, 90]
  trials = 100             Monte-Carlo trials (per SNR point for rmse)
  snr_sweep_db = 0,..,20   SNR points for the rmse sweep
  estimators = all         psi51..psi55, music, esprit, bartlett
  pi_k_mode = first        helper-block choice: first | average
  output_dir = .           report directory (or DOA_OUTPUT_DIR, or --output)
  resolve_threshold_deg = 5  max per-source error counted as resolved

Exit codes: 0 success, 2 config/usage error, 3 runtime failure.";

#[derive(Parser)]
#[command(
    name = "doa",
    version,
    about = "Direction-of-arrival estimation for uniform linear arrays: \
             fifth-order propagator operators, MUSIC, ESPRIT and Bartlett \
             beamforming with a reproducible Monte-Carlo harness",
    after_help = CONFIG_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (`key = value` lines, `#` comments).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set snr_db=10`. Repeatable; applied
    /// after the file in the given order.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory for reports (defaults to the config's `output_dir`,
    /// the DOA_OUTPUT_DIR environment variable, or the current directory).
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,

    /// Worker threads for Monte-Carlo trials; 0 picks the machine default.
    /// Reports are byte-identical at any thread count.
    #[arg(long, default_value_t = 0, value_name = "N")]
    threads: usize,
}

#[derive(Args)]
struct SelftestArgs {
    /// Correlate the first two sources fully; demonstrates the singular
    /// covariance blocks coherent sources produce (expected to fail).
    #[arg(long)]
    coherent: bool,

    /// Apply forward-backward averaging before building the operators.
    #[arg(long = "fb")]
    fb: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Average angular spectra over Monte-Carlo trials and report peaks.
    Spectrum(RunArgs),
    /// Sweep SNR and report RMSE and resolution rate per estimator.
    Rmse(RunArgs),
    /// Write one batch of synthetic snapshots as CSV.
    Simulate(RunArgs),
    /// Run the built-in structural identity battery.
    Selftest(SelftestArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Spectrum(args) => run_command(args, cmd_spectrum),
        Command::Rmse(args) => run_command(args, cmd_rmse),
        Command::Simulate(args) => run_command(args, cmd_simulate),
        Command::Selftest(args) => cmd_selftest(args),
    }
}

fn run_command(
    args: RunArgs,
    body: fn(&ExperimentConfig, &Path, Instant) -> Result<(), String>,
) -> ExitCode {
    let cfg = match load_config(args.config.as_deref(), &args.set, args.output.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if args.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build_global()
        {
            eprintln!("error: could not size thread pool: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    let out_dir = cfg.output_dir.clone();
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("error: cannot create {}: {e}", out_dir.display());
        return ExitCode::from(EXIT_RUNTIME);
    }
    let started = Instant::now();
    match body(&cfg, &out_dir, started) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn cmd_spectrum(cfg: &ExperimentConfig, out_dir: &Path, started: Instant) -> Result<(), String> {
    let report = run_spectrum_experiment(cfg).map_err(|e| e.to_string())?;
    let csv_path = out_dir.join("spectrum.csv");
    write_text(&csv_path, &render_spectrum_csv(&report.grid_deg, &report.columns))
        .map_err(|e| e.to_string())?;

    println!("config_hash: {:016x}", report.config_hash);
    println!(
        "trials: {} ({} skipped), snr_db: {}, grid step: {} deg, rayleigh hpbw: {:.2} deg",
        report.trials,
        report.skipped,
        cfg.snr_db,
        cfg.grid_step_deg,
        doa_core::array_model::rayleigh_hpbw_deg(&cfg.array())
    );
    println!("{:<10} {:<28} heights_db", "estimator", "peaks_deg");
    for (label, peaks) in &report.peaks {
        let angles = peaks
            .angles_deg
            .iter()
            .map(|a| format!("{a:.2}"))
            .collect::<Vec<_>>()
            .join(" ");
        let heights = peaks
            .values
            .iter()
            .map(|v| format!("{:.1}", 10.0 * v.log10()))
            .collect::<Vec<_>>()
            .join(" ");
        let mark = if peaks.complete { "" } else { "  (unresolved)" };
        println!("{:<10} {:<28} {}{}", label.as_str(), angles, heights, mark);
    }
    println!("wrote {}", csv_path.display());
    write_meta(cfg, out_dir, "spectrum", started, &[("skipped_trials".into(), report.skipped.to_string())])
}

fn cmd_rmse(cfg: &ExperimentConfig, out_dir: &Path, started: Instant) -> Result<(), String> {
    let report = run_rmse_sweep(cfg).map_err(|e| e.to_string())?;
    let csv_path = out_dir.join("rmse.csv");
    write_text(&csv_path, &render_rmse_csv(&report.snr_db, &report.series))
        .map_err(|e| e.to_string())?;

    println!("config_hash: {:016x}", report.config_hash);
    println!(
        "snr points: {}, trials per point: {} ({} skipped total)",
        report.snr_db.len(),
        report.trials_per_point,
        report.skipped_total
    );
    let first = 0;
    let last = report.snr_db.len() - 1;
    println!(
        "{:<10} {:>18} {:>18}",
        "estimator",
        format!("rmse@{}dB", report.snr_db[first]),
        format!("rmse@{}dB", report.snr_db[last])
    );
    for (label, cells) in &report.series {
        let fmt = |cell: &Option<(f64, f64)>| match cell {
            Some((rmse, _)) => format!("{rmse:.4} deg"),
            None => "unresolved".to_string(),
        };
        println!(
            "{:<10} {:>18} {:>18}",
            label.as_str(),
            fmt(&cells[first]),
            fmt(&cells[last])
        );
    }
    println!("wrote {}", csv_path.display());
    write_meta(
        cfg,
        out_dir,
        "rmse",
        started,
        &[("skipped_trials".into(), report.skipped_total.to_string())],
    )
}

fn cmd_simulate(cfg: &ExperimentConfig, out_dir: &Path, started: Instant) -> Result<(), String> {
    let scenario = cfg.scenario(cfg.snr_db);
    let (x, _) = doa_core::array_model::generate_snapshots(&scenario).map_err(|e| e.to_string())?;
    let csv_path = out_dir.join("snapshots.csv");
    write_text(&csv_path, &render_snapshots_csv(&x)).map_err(|e| e.to_string())?;
    println!("config_hash: {:016x}", cfg.hash());
    println!(
        "simulated {} sensors x {} snapshots at snr_db {}",
        x.n_sensors(),
        x.snapshots(),
        cfg.snr_db
    );
    println!("wrote {}", csv_path.display());
    write_meta(cfg, out_dir, "simulate", started, &[])
}

fn write_meta(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    command: &str,
    started: Instant,
    extra: &[(String, String)],
) -> Result<(), String> {
    let meta = RunMeta {
        command: command.to_string(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        wall_time_s: started.elapsed().as_secs_f64(),
        extra: extra.to_vec(),
    };
    write_text(&out_dir.join("run_meta.txt"), &render_run_meta(&meta)).map_err(|e| e.to_string())
}

fn cmd_selftest(args: SelftestArgs) -> ExitCode {
    let results = run_selftest(args.coherent, args.fb);
    let mut all_passed = true;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:<40} {}", r.name, r.detail);
        all_passed &= r.passed;
    }
    if all_passed {
        println!("selftest: all {} checks passed", results.len());
        ExitCode::SUCCESS
    } else {
        eprintln!("selftest: checks failed");
        ExitCode::from(EXIT_RUNTIME)
    }
}
