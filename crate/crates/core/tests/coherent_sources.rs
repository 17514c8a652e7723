//! Coherent (fully correlated) sources break the block-inversion assumption;
//! forward-backward averaging restores it on a ULA.

use doa_core::array_model::{steering_matrix, ArrayConfig, SourceSet};
use doa_core::estimation::find_peaks;
use doa_core::linalg::{c64, ComplexMatrix};
use doa_core::propagator::{angle_grid, build_propagator, psi_row, PiKMode};
use doa_core::spectral::{
    forward_backward_average, model_covariance_from_source_cov, sample_covariance,
    BlockPartition, SpectralMatrix,
};
use doa_core::Error;

fn coherent_pair_sources() -> SourceSet {
    SourceSet::with_unit_powers(vec![10.0, 28.0]).unwrap()
}

/// Fully correlated unit-power pair.
fn coherent_source_cov() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        &[c64(1.0, 0.0), c64(1.0, 0.0)],
        &[c64(1.0, 0.0), c64(1.0, 0.0)],
    ])
}

/// Snapshots for a coherent pair: one waveform through both steering
/// columns, plus white noise. Drawn with the crate RNG seeded per test.
fn coherent_snapshots(
    array: &ArrayConfig,
    sources: &SourceSet,
    k: usize,
    snr_db: f64,
    seed: u64,
) -> SpectralMatrix {
    use doa_core::array_model::{generate_snapshots, Scenario};
    // reuse the generator: a single source provides the shared waveform and
    // per-sensor noise at the right variance
    let lone = SourceSet::with_unit_powers(vec![sources.angles_deg()[0]]).unwrap();
    let scenario = Scenario::new(array.clone(), lone, k, snr_db, seed).unwrap();
    let (x1, s) = generate_snapshots(&scenario).unwrap();
    // x1 = a(theta_1) s + n; add the second coherent path a(theta_2) s
    let a = steering_matrix(sources, array).unwrap();
    let a2 = a.submatrix(0, array.n_sensors(), 1, 2);
    let x = x1.matrix().add(&a2.matmul(&s).unwrap()).unwrap();
    sample_covariance(&doa_core::array_model::SnapshotMatrix::new(x))
}

#[test]
fn coherent_pair_defeats_the_plain_propagator() {
    let array = ArrayConfig::half_wavelength(18).unwrap();
    let sources = coherent_pair_sources();
    let part = BlockPartition::new(18, 2).unwrap();

    // exact (expectation) covariance: block inversion fails outright
    let exact =
        model_covariance_from_source_cov(&coherent_source_cov(), &sources, &array, 0.0).unwrap();
    assert_eq!(
        build_propagator(&exact, &part, PiKMode::First).unwrap_err(),
        Error::SingularBlock
    );

    // sampled covariance at SNR 20 dB: the blocks are noise-perturbed
    // rank-one, so construction either degenerates or misses a source
    let gamma = coherent_snapshots(&array, &sources, 200, 20.0, 404);
    let grid = angle_grid(0.1).unwrap();
    let resolved = match psi_row(&gamma, &part, 5, PiKMode::First) {
        Err(Error::SingularBlock) => false,
        Err(e) => panic!("unexpected error {e}"),
        Ok(row) => {
            let spec =
                doa_core::propagator::spectrum(&row, &array, &grid, "psi55").unwrap();
            let peaks = find_peaks(&spec, 2);
            peaks.complete
                && (peaks.angles_deg[0] - 10.0).abs() <= 1.0
                && (peaks.angles_deg[1] - 28.0).abs() <= 1.0
        }
    };
    assert!(!resolved, "plain propagator should not resolve a coherent pair");
}

#[test]
fn forward_backward_averaging_restores_resolution() {
    let array = ArrayConfig::half_wavelength(18).unwrap();
    let sources = coherent_pair_sources();
    let part = BlockPartition::new(18, 2).unwrap();
    let grid = angle_grid(0.1).unwrap();

    let gamma = coherent_snapshots(&array, &sources, 200, 20.0, 404);
    let fb = forward_backward_average(&gamma);
    let set = build_propagator(&fb, &part, PiKMode::First).unwrap();
    let spec =
        doa_core::propagator::spectrum(&set.rows[4], &array, &grid, "psi55").unwrap();
    let peaks = find_peaks(&spec, 2);
    assert!(peaks.complete);
    assert!(
        (peaks.angles_deg[0] - 10.0).abs() <= 0.5,
        "first peak at {}",
        peaks.angles_deg[0]
    );
    assert!(
        (peaks.angles_deg[1] - 28.0).abs() <= 0.5,
        "second peak at {}",
        peaks.angles_deg[1]
    );
}
