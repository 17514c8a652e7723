//! Peak extraction, angle pairing and error metrics shared by all
//! estimators.

use alloc::string::String;
use alloc::vec::Vec;

use crate::array_model::SourceSet;
use crate::error::Error;
use crate::math;
use crate::propagator::AngularSpectrum;

/// Default acceptance window for a peak to count as resolving its source.
pub const DEFAULT_RESOLVE_THRESHOLD_DEG: f64 = 5.0;

/// Extracted spectrum peaks, angles ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakSet {
    pub angles_deg: Vec<f64>,
    /// Linear spectrum heights at the (refined) peaks.
    pub values: Vec<f64>,
    /// True when the requested number of strict local maxima existed; false
    /// when the list was padded with the largest grid values.
    pub complete: bool,
}

/// One estimator's error record for a single Monte-Carlo trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialError {
    pub estimator_label: String,
    pub per_source_error_deg: Vec<f64>,
    pub resolved: bool,
}

/// Aggregated accuracy over a trial set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmseSummary {
    pub rmse_deg: f64,
    /// Fraction of trials that resolved all sources.
    pub resolution_rate: f64,
}

#[inline]
fn db_to_linear(db: f64) -> f64 {
    math::pow(10.0, db / 10.0)
}

/// Finds the `p` tallest strict local maxima (endpoints excluded) and
/// refines each by three-point parabolic interpolation on the dB values. When
/// fewer than `p` interior maxima exist, the `p` largest grid samples fill
/// in and the result is marked incomplete.
pub fn find_peaks(spec: &AngularSpectrum, p: usize) -> PeakSet {
    let grid = &spec.grid_deg;
    let db = &spec.values_db;
    debug_assert!(grid.len() >= 3 && p >= 1);

    let linear: Vec<f64> = db.iter().map(|&v| db_to_linear(v)).collect();
    let mut maxima: Vec<usize> = Vec::new();
    for i in 1..linear.len() - 1 {
        if linear[i] > linear[i - 1] && linear[i] > linear[i + 1] {
            maxima.push(i);
        }
    }

    let complete = maxima.len() >= p;
    let chosen: Vec<usize> = if complete {
        maxima.sort_by(|&a, &b| linear[b].total_cmp(&linear[a]));
        maxima[..p].to_vec()
    } else {
        let mut order: Vec<usize> = (0..linear.len()).collect();
        order.sort_by(|&a, &b| linear[b].total_cmp(&linear[a]));
        order[..p.min(order.len())].to_vec()
    };

    let mut peaks: Vec<(f64, f64)> = Vec::with_capacity(chosen.len());
    for &i in &chosen {
        if complete {
            // parabola through the three dB samples around the maximum
            let (ym, y0, yp) = (db[i - 1], db[i], db[i + 1]);
            let curvature = ym + yp - 2.0 * y0;
            let (offset, height_db) = if math::fabs(curvature) > 1e-12 {
                let delta = (ym - yp) / (2.0 * curvature);
                let delta = math::fmax(-0.5, math::fmin(0.5, delta));
                (delta, y0 - 0.25 * (ym - yp) * delta)
            } else {
                (0.0, y0)
            };
            let step = grid[i + 1] - grid[i];
            peaks.push((grid[i] + offset * step, db_to_linear(height_db)));
        } else {
            peaks.push((grid[i], linear[i]));
        }
    }
    peaks.sort_by(|a, b| a.0.total_cmp(&b.0));

    PeakSet {
        angles_deg: peaks.iter().map(|p| p.0).collect(),
        values: peaks.iter().map(|p| p.1).collect(),
        complete,
    }
}

/// Pairs estimated and true angles in sorted order and records per-source
/// signed errors. The trial counts as resolved when the peak set was
/// complete and every error is inside the threshold.
pub fn pair_and_error(
    est: &PeakSet,
    truth: &SourceSet,
    estimator_label: &str,
    resolve_threshold_deg: f64,
) -> TrialError {
    pair_angles(
        &est.angles_deg,
        est.complete,
        truth,
        estimator_label,
        resolve_threshold_deg,
    )
}

/// Pairing for estimators that yield angles directly (no spectrum).
pub fn pair_angles(
    estimated_deg: &[f64],
    complete: bool,
    truth: &SourceSet,
    estimator_label: &str,
    resolve_threshold_deg: f64,
) -> TrialError {
    let mut truth_sorted: Vec<f64> = truth.angles_deg().to_vec();
    truth_sorted.sort_by(|a, b| a.total_cmp(b));

    if estimated_deg.len() != truth_sorted.len() {
        return TrialError {
            estimator_label: String::from(estimator_label),
            per_source_error_deg: Vec::new(),
            resolved: false,
        };
    }

    let mut est_sorted: Vec<f64> = estimated_deg.to_vec();
    est_sorted.sort_by(|a, b| a.total_cmp(b));

    let errors: Vec<f64> = est_sorted
        .iter()
        .zip(&truth_sorted)
        .map(|(e, t)| e - t)
        .collect();
    let within = errors
        .iter()
        .all(|e| math::fabs(*e) <= resolve_threshold_deg);

    TrialError {
        estimator_label: String::from(estimator_label),
        per_source_error_deg: errors,
        resolved: complete && within,
    }
}

/// RMSE over the resolved trials plus the resolution rate over all trials.
pub fn rmse(trials: &[TrialError]) -> Result<RmseSummary, Error> {
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    let mut resolved = 0usize;
    for t in trials {
        if t.resolved {
            resolved += 1;
            for e in &t.per_source_error_deg {
                sum_sq += e * e;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::NoResolvedTrials);
    }
    Ok(RmseSummary {
        rmse_deg: math::sqrt(sum_sq / count as f64),
        resolution_rate: resolved as f64 / trials.len() as f64,
    })
}
