//! Built-in structural identity battery.
//!
//! The default run builds the bench scenario (18 sensors, three unit-power
//! sources at 10/28/49 degrees, 200 noise-free snapshots) and checks every
//! structural identity of the propagator. The coherent mode replaces the
//! source covariance with a fully correlated pair to demonstrate the failure
//! mode, and the forward-backward switch shows the documented remedy.

use doa_core::array_model::{
    generate_snapshots, steering_matrix, ArrayConfig, Scenario, SourceSet,
};
use doa_core::estimation::find_peaks;
use doa_core::linalg::{c64, singular_values, ComplexMatrix};
use doa_core::propagator::{
    admissible_k, angle_grid, build_propagator, orthogonality_report, pi_operator_with_k,
    spectrum_with_table, PiKMode, SteeringTable,
};
use doa_core::spectral::{
    forward_backward_average, model_covariance_from_source_cov, sample_covariance, BlockPartition,
};
use doa_core::Error;

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

const TRUE_ANGLES: [f64; 3] = [10.0, 28.0, 49.0];

fn bench_scenario() -> Scenario {
    Scenario::new(
        ArrayConfig::half_wavelength(18).expect("valid bench array"),
        SourceSet::with_unit_powers(TRUE_ANGLES.to_vec()).expect("valid bench sources"),
        200,
        f64::INFINITY,
        1,
    )
    .expect("valid bench scenario")
}

/// Runs the battery; `coherent` correlates the first two sources fully,
/// `fb_average` applies forward-backward averaging before constructing the
/// operators.
pub fn run_selftest(coherent: bool, fb_average: bool) -> Vec<CheckResult> {
    if coherent {
        coherent_battery(fb_average)
    } else {
        noise_free_battery()
    }
}

fn noise_free_battery() -> Vec<CheckResult> {
    let mut results = Vec::new();
    let scenario = bench_scenario();
    let part = BlockPartition::new(18, 3).expect("bench partition");
    let (x, _) = generate_snapshots(&scenario).expect("bench snapshots");
    let gamma = sample_covariance(&x);
    let a = steering_matrix(&scenario.sources, &scenario.array).expect("bench steering");

    let set = match build_propagator(&gamma, &part, PiKMode::First) {
        Ok(set) => set,
        Err(e) => {
            results.push(check(
                "propagator construction",
                false,
                format!("failed: {e}"),
            ));
            return results;
        }
    };

    let trace = set.psi.trace();
    results.push(check(
        "trace(psi) = -4N",
        (trace.re + 72.0).abs() <= 1e-9 && trace.im.abs() <= 1e-9,
        format!("trace = {:.9}{:+.2e}i", trace.re, trace.im),
    ));

    let sv = singular_values(&set.psi).expect("singular values");
    let gap = sv[14] / sv[15].max(f64::MIN_POSITIVE);
    results.push(check(
        "rank(psi) = N - P (six-decade gap)",
        gap >= 1e6,
        format!("sv15/sv16 = {gap:.3e}"),
    ));

    let g_res = set.psi.matmul(gamma.matrix()).expect("shape").frobenius_norm()
        / gamma.matrix().frobenius_norm();
    results.push(check(
        "psi * gamma = 0",
        g_res <= 1e-8,
        format!("relative residual = {g_res:.3e}"),
    ));

    let x_res = set.psi.matmul(x.matrix()).expect("shape").frobenius_norm()
        / x.matrix().frobenius_norm();
    results.push(check(
        "psi * x = 0",
        x_res <= 1e-8,
        format!("relative residual = {x_res:.3e}"),
    ));

    let report = orthogonality_report(&set, &a).expect("orthogonality report");
    let worst = report
        .iter()
        .map(|r| (r.principal_angle_rad - std::f64::consts::FRAC_PI_2).abs())
        .fold(0.0, f64::max);
    results.push(check(
        "principal angles = pi/2",
        worst <= 1e-6,
        format!("max deviation = {worst:.3e} rad"),
    ));

    let mut k_dev: f64 = 0.0;
    for (target, source) in [(1usize, 2usize), (2, 5), (5, 3), (4, 1)] {
        let ks = admissible_k(target, source);
        let first = pi_operator_with_k(&gamma, &part, target, source, ks[0]).expect("pi");
        for &k in &ks[1..] {
            let other = pi_operator_with_k(&gamma, &part, target, source, k).expect("pi");
            let rel = other.matrix.sub(&first.matrix).expect("shape").frobenius_norm()
                / first.matrix.frobenius_norm();
            k_dev = k_dev.max(rel);
        }
    }
    results.push(check(
        "pi_ji independent of helper k",
        k_dev <= 1e-8,
        format!("max relative deviation = {k_dev:.3e}"),
    ));

    let grid = angle_grid(0.1).expect("grid");
    let table = SteeringTable::new(&scenario.array, &grid).expect("table");
    let mut worst_peak: f64 = 0.0;
    for row in &set.rows {
        let spec = spectrum_with_table(row, &table, "psi").expect("spectrum");
        let peaks = find_peaks(&spec, 3);
        if !peaks.complete {
            worst_peak = f64::INFINITY;
            break;
        }
        for (got, want) in peaks.angles_deg.iter().zip(TRUE_ANGLES) {
            worst_peak = worst_peak.max((got - want).abs());
        }
    }
    results.push(check(
        "spectrum peaks at true angles",
        worst_peak <= 0.05,
        format!("max |error| = {worst_peak:.4} deg"),
    ));

    results
}

fn coherent_battery(fb_average: bool) -> Vec<CheckResult> {
    let mut results = Vec::new();
    let scenario = bench_scenario();
    let part = BlockPartition::new(18, 3).expect("bench partition");

    // sources 1 and 2 fully correlated, source 3 independent: rank-2
    let mut gs = ComplexMatrix::identity(3);
    gs[(0, 1)] = c64(1.0, 0.0);
    gs[(1, 0)] = c64(1.0, 0.0);
    let gamma =
        model_covariance_from_source_cov(&gs, &scenario.sources, &scenario.array, 0.0)
            .expect("coherent covariance");
    let gamma = if fb_average {
        forward_backward_average(&gamma)
    } else {
        gamma
    };

    match build_propagator(&gamma, &part, PiKMode::First) {
        Err(Error::SingularBlock) => {
            results.push(check(
                "propagator on coherent sources",
                false,
                "SingularBlock: source covariance is rank deficient \
                 (enable forward-backward averaging)"
                    .into(),
            ));
        }
        Err(e) => {
            results.push(check(
                "propagator on coherent sources",
                false,
                format!("unexpected failure: {e}"),
            ));
        }
        Ok(set) => {
            results.push(check(
                "propagator on coherent sources",
                true,
                "construction succeeded".into(),
            ));
            let grid = angle_grid(0.1).expect("grid");
            let table = SteeringTable::new(&scenario.array, &grid).expect("table");
            let spec = spectrum_with_table(&set.rows[4], &table, "psi55").expect("spectrum");
            let peaks = find_peaks(&spec, 3);
            let mut worst: f64 = if peaks.complete { 0.0 } else { f64::INFINITY };
            for (got, want) in peaks.angles_deg.iter().zip(TRUE_ANGLES) {
                worst = worst.max((got - want).abs());
            }
            results.push(check(
                "coherent peaks at true angles",
                worst <= 0.05,
                format!("max |error| = {worst:.4} deg"),
            ));
        }
    }
    results
}
