//! Classical comparison estimators: Bartlett beamforming, MUSIC and ESPRIT.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::array_model::ArrayConfig;
use crate::error::Error;
use crate::linalg::{general_eigenvalues, hermitian_eig, ComplexMatrix};
use crate::math;
use crate::propagator::{spectrum_with_table, AngularSpectrum, SteeringTable};
use crate::spectral::SpectralMatrix;

/// Signal/noise subspace split of a spectral matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspacePair {
    /// N x P dominant eigenvector columns.
    pub u_s: ComplexMatrix,
    /// N x (N - P) remaining eigenvector columns.
    pub u_n: ComplexMatrix,
    /// All eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
}

/// Eigendecomposition split into the `p` dominant directions and the rest.
pub fn eigen_split(gamma: &SpectralMatrix, p: usize) -> Result<SubspacePair, Error> {
    let n = gamma.n_sensors();
    if p < 1 || p >= n {
        return Err(Error::InvalidParameter(
            "subspace order must satisfy 1 <= p < n_sensors",
        ));
    }
    let (eigenvalues, vectors) = hermitian_eig(gamma.matrix())?;
    Ok(SubspacePair {
        u_s: vectors.submatrix(0, n, 0, p),
        u_n: vectors.submatrix(0, n, p, n),
        eigenvalues,
    })
}

/// MUSIC pseudo-spectrum `(a^+ a) / (a^+ U_n U_n^+ a)`, sharing the dB
/// convention and denominator floor of the propagator spectra.
pub fn music_spectrum_with_table(
    pair: &SubspacePair,
    table: &SteeringTable,
) -> Result<AngularSpectrum, Error> {
    // ||U_n^+ a||^2 = a^+ U_n U_n^+ a, so MUSIC is the row-operator spectrum
    // of the noise-subspace projector factor
    spectrum_with_table(&pair.u_n.conj_transpose(), table, "music")
}

pub fn music_spectrum(
    pair: &SubspacePair,
    array: &ArrayConfig,
    grid_deg: &[f64],
) -> Result<AngularSpectrum, Error> {
    let table = SteeringTable::new(array, grid_deg)?;
    music_spectrum_with_table(pair, &table)
}

/// Bartlett beamformer `f(theta) = (a^+ Gamma a) / (a^+ a)`, in dB.
pub fn bartlett_spectrum_with_table(
    gamma: &SpectralMatrix,
    table: &SteeringTable,
) -> Result<AngularSpectrum, Error> {
    let n = table.n_sensors();
    if gamma.n_sensors() != n {
        return Err(Error::DimensionMismatch {
            left: (gamma.n_sensors(), gamma.n_sensors()),
            right: (n, 1),
        });
    }
    let g = gamma.matrix();
    let mut values = Vec::with_capacity(table.grid().len());
    for idx in 0..table.grid().len() {
        let a = table.steering(idx);
        // a^+ Gamma a, real for Hermitian Gamma
        let mut quad = 0.0;
        for r in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..n {
                acc += g[(r, c)] * a[c];
            }
            quad += (a[r].conj() * acc).re;
        }
        let f = math::fmax(quad / n as f64, f64::MIN_POSITIVE);
        values.push(10.0 * math::log10(f));
    }
    Ok(AngularSpectrum::new(
        table.grid().to_vec(),
        values,
        "bartlett",
    ))
}

pub fn bartlett_spectrum(
    gamma: &SpectralMatrix,
    array: &ArrayConfig,
    grid_deg: &[f64],
) -> Result<AngularSpectrum, Error> {
    let table = SteeringTable::new(array, grid_deg)?;
    bartlett_spectrum_with_table(gamma, &table)
}

/// ESPRIT with maximally overlapping subarrays (rows 0..N-1 and 1..N) and a
/// least-squares invariance solve. Returns angles in degrees, ascending.
pub fn esprit_angles(
    pair: &SubspacePair,
    array: &ArrayConfig,
    p: usize,
) -> Result<Vec<f64>, Error> {
    let n = pair.u_s.rows();
    if pair.u_s.cols() != p {
        return Err(Error::InvalidParameter(
            "signal subspace width must equal the source count",
        ));
    }
    if n < p + 1 {
        return Err(Error::InvalidParameter(
            "ESPRIT needs at least p + 1 sensors",
        ));
    }
    let upper = pair.u_s.submatrix(0, n - 1, 0, p);
    let lower = pair.u_s.submatrix(1, n, 0, p);
    let rotation = upper.left_pinv()?.matmul(&lower)?;
    let eigs = general_eigenvalues(&rotation)?;

    let two_pi_ratio = 2.0 * core::f64::consts::PI * array.spacing_ratio();
    let mut angles = Vec::with_capacity(p);
    for lambda in eigs {
        // steering convention e^{-j mu}: arg(lambda) = -mu
        let sin_theta = -lambda.arg() / two_pi_ratio;
        if math::fabs(sin_theta) > 1.0 {
            return Err(Error::InvalidShift {
                magnitude: math::fabs(sin_theta),
            });
        }
        angles.push(math::rad_to_deg(math::asin(sin_theta)));
    }
    angles.sort_by(|a, b| a.total_cmp(b));
    Ok(angles)
}
