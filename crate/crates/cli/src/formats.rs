//! Report and data file formats: spectrum/RMSE CSVs, the snapshot exchange
//! format and the run-metadata sidecar. All numeric report values print with
//! six decimals so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use doa_core::array_model::SnapshotMatrix;
use doa_core::linalg::{c64, Complex64, ComplexMatrix};

use crate::config::EstimatorLabel;
use crate::harness::RmseCell;

/// Spectrum CSV: `angle_deg,<label>,...`, dB values, one row per grid angle.
pub fn render_spectrum_csv(grid_deg: &[f64], columns: &[(EstimatorLabel, Vec<f64>)]) -> String {
    let mut out = String::new();
    out.push_str("angle_deg");
    for (label, _) in columns {
        out.push(',');
        out.push_str(label.as_str());
    }
    out.push('\n');
    for (i, angle) in grid_deg.iter().enumerate() {
        let _ = write!(out, "{angle:.6}");
        for (_, values) in columns {
            let _ = write!(out, ",{:.6}", values[i]);
        }
        out.push('\n');
    }
    out
}

/// RMSE CSV: `snr_db,<label>_rmse_deg,<label>_resolve_rate,...`; cells with
/// no resolved trial print as `nan`.
pub fn render_rmse_csv(snr_db: &[f64], series: &[(EstimatorLabel, Vec<RmseCell>)]) -> String {
    let mut out = String::new();
    out.push_str("snr_db");
    for (label, _) in series {
        let _ = write!(out, ",{label}_rmse_deg,{label}_resolve_rate", label = label.as_str());
    }
    out.push('\n');
    for (i, snr) in snr_db.iter().enumerate() {
        let _ = write!(out, "{snr:.6}");
        for (_, cells) in series {
            match cells[i] {
                Some((rmse, rate)) => {
                    let _ = write!(out, ",{rmse:.6},{rate:.6}");
                }
                None => out.push_str(",nan,nan"),
            }
        }
        out.push('\n');
    }
    out
}

/// Snapshot exchange CSV: a `N,K` header row, then N rows of 2K reals with
/// re/im interleaved. Values print in shortest round-trip form, so the file
/// is lossless.
pub fn render_snapshots_csv(x: &SnapshotMatrix) -> String {
    let n = x.n_sensors();
    let k = x.snapshots();
    let m = x.matrix();
    let mut out = String::new();
    let _ = writeln!(out, "{n},{k}");
    for i in 0..n {
        for j in 0..k {
            if j > 0 {
                out.push(',');
            }
            let z = m[(i, j)];
            let _ = write!(out, "{},{}", z.re, z.im);
        }
        out.push('\n');
    }
    out
}

/// Parses the snapshot exchange CSV back into a matrix.
pub fn parse_snapshots_csv(text: &str) -> Result<SnapshotMatrix, String> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or("empty snapshot file")?;
    let mut dims = header.split(',');
    let n: usize = dims
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or("header must be `N,K`")?;
    let k: usize = dims
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or("header must be `N,K`")?;
    if n < 1 || k < 1 {
        return Err("header dimensions must be positive".into());
    }

    let mut data: Vec<Complex64> = Vec::with_capacity(n * k);
    let mut rows = 0usize;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 * k {
            return Err(format!(
                "line {}: expected {} values, found {}",
                idx + 1,
                2 * k,
                fields.len()
            ));
        }
        for pair in fields.chunks(2) {
            let re: f64 = pair[0]
                .trim()
                .parse()
                .map_err(|_| format!("line {}: bad number `{}`", idx + 1, pair[0]))?;
            let im: f64 = pair[1]
                .trim()
                .parse()
                .map_err(|_| format!("line {}: bad number `{}`", idx + 1, pair[1]))?;
            data.push(c64(re, im));
        }
    }
    if rows != n {
        return Err(format!("expected {n} sensor rows, found {rows}"));
    }
    let matrix = ComplexMatrix::from_vec(n, k, data).map_err(|e| e.to_string())?;
    Ok(SnapshotMatrix::new(matrix))
}

/// Key/value sidecar describing a finished run.
pub struct RunMeta {
    pub command: String,
    pub config_hash: u64,
    pub seed: u64,
    pub wall_time_s: f64,
    pub extra: Vec<(String, String)>,
}

pub fn render_run_meta(meta: &RunMeta) -> String {
    let finished_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "command = {}", meta.command);
    let _ = writeln!(out, "config_hash = {:016x}", meta.config_hash);
    let _ = writeln!(out, "seed = {}", meta.seed);
    let _ = writeln!(
        out,
        "version = {} {}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    );
    let _ = writeln!(out, "finished_unix = {finished_unix}");
    let _ = writeln!(out, "wall_time_s = {:.3}", meta.wall_time_s);
    for (k, v) in &meta.extra {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use doa_core::array_model::{generate_snapshots, ArrayConfig, Scenario, SourceSet};

    #[test]
    fn spectrum_csv_layout() {
        let grid = vec![-1.0, 0.0, 1.0];
        let cols = vec![
            (EstimatorLabel::Psi55, vec![1.0, 2.0, 3.0]),
            (EstimatorLabel::Music, vec![-1.5, 0.25, 9.0]),
        ];
        let csv = render_spectrum_csv(&grid, &cols);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "angle_deg,psi55,music");
        assert_eq!(lines[1], "-1.000000,1.000000,-1.500000");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn rmse_csv_marks_missing_cells() {
        let csv = render_rmse_csv(
            &[0.0, 1.0],
            &[(EstimatorLabel::Esprit, vec![Some((0.5, 1.0)), None])],
        );
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "snr_db,esprit_rmse_deg,esprit_resolve_rate");
        assert_eq!(lines[1], "0.000000,0.500000,1.000000");
        assert_eq!(lines[2], "1.000000,nan,nan");
    }

    #[test]
    fn snapshot_csv_round_trip_is_lossless() {
        let scenario = Scenario::new(
            ArrayConfig::half_wavelength(6).unwrap(),
            SourceSet::with_unit_powers(vec![10.0, -25.0]).unwrap(),
            17,
            5.0,
            99,
        )
        .unwrap();
        let (x, _) = generate_snapshots(&scenario).unwrap();
        let csv = render_snapshots_csv(&x);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "6,17");
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[1].split(',').count(), 34);

        let back = parse_snapshots_csv(&csv).unwrap();
        assert_eq!(back.matrix(), x.matrix());
    }

    #[test]
    fn snapshot_parser_reports_bad_rows() {
        assert!(parse_snapshots_csv("").is_err());
        assert!(parse_snapshots_csv("2,1\n1.0,2.0\n").is_err()); // one row missing
        let err = parse_snapshots_csv("1,2\n1.0,2.0,zzz,4.0\n").unwrap_err();
        assert!(err.contains("line 2"), "{err}");
    }
}
