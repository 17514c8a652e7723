//! Sample spectral (covariance) matrix estimation and its five-way block
//! partition view.

use crate::array_model::{ArrayConfig, SnapshotMatrix, SourceSet};
use crate::error::Error;
use crate::linalg::{c64, ComplexMatrix};

/// N x N spectral matrix, symmetrized on construction so downstream
/// eigensolvers always see exactly Hermitian input.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrix {
    gamma: ComplexMatrix,
    snapshots_used: usize,
}

impl SpectralMatrix {
    /// Wraps an externally built covariance; symmetrizes and validates.
    pub fn from_matrix(gamma: ComplexMatrix, snapshots_used: usize) -> Result<Self, Error> {
        if gamma.rows() != gamma.cols() {
            return Err(Error::NotSquare {
                rows: gamma.rows(),
                cols: gamma.cols(),
            });
        }
        if !gamma.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(SpectralMatrix {
            gamma: symmetrize(&gamma),
            snapshots_used,
        })
    }

    #[inline]
    pub fn n_sensors(&self) -> usize {
        self.gamma.rows()
    }

    #[inline]
    pub fn snapshots_used(&self) -> usize {
        self.snapshots_used
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.gamma
    }
}

fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        (m[(i, j)] + m[(j, i)].conj()) * 0.5
    })
}

/// Sample estimator `(1/K) X X^+`, symmetrized.
pub fn sample_covariance(x: &SnapshotMatrix) -> SpectralMatrix {
    let k = x.snapshots();
    let outer = x
        .matrix()
        .matmul(&x.matrix().conj_transpose())
        .expect("snapshot matrix shapes always agree");
    SpectralMatrix {
        gamma: symmetrize(&outer.scale(c64(1.0 / k as f64, 0.0))),
        snapshots_used: k,
    }
}

/// Model covariance `A Gamma_s A^+ + sigma^2 I` for a diagonal source
/// covariance; the reference surface for noiseless identity checks.
pub fn model_covariance(
    sources: &SourceSet,
    array: &ArrayConfig,
    noise_variance: f64,
) -> Result<SpectralMatrix, Error> {
    let p = sources.p_sources();
    let mut gamma_s = ComplexMatrix::zeros(p, p);
    for i in 0..p {
        gamma_s[(i, i)] = c64(sources.powers()[i], 0.0);
    }
    model_covariance_from_source_cov(&gamma_s, sources, array, noise_variance)
}

/// Model covariance for an arbitrary (possibly rank-deficient) source
/// covariance; lets tests inject coherent sources exactly.
pub fn model_covariance_from_source_cov(
    gamma_s: &ComplexMatrix,
    sources: &SourceSet,
    array: &ArrayConfig,
    noise_variance: f64,
) -> Result<SpectralMatrix, Error> {
    let a = crate::array_model::steering_matrix(sources, array)?;
    let mut gamma = a.matmul(gamma_s)?.matmul(&a.conj_transpose())?;
    if noise_variance != 0.0 {
        for i in 0..gamma.rows() {
            gamma[(i, i)] += c64(noise_variance, 0.0);
        }
    }
    SpectralMatrix::from_matrix(gamma, 0)
}

/// Row ranges of the five-way partition: four blocks of height P followed by
/// one of height N - 4P.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    n_sensors: usize,
    p_sources: usize,
    offsets: [usize; 6],
}

impl BlockPartition {
    pub fn new(n_sensors: usize, p_sources: usize) -> Result<Self, Error> {
        if p_sources == 0 {
            return Err(Error::InvalidParameter("p_sources must be at least 1"));
        }
        // N = 4P leaves the fifth block empty, so strictly more is required
        if n_sensors <= 4 * p_sources {
            return Err(Error::PartitionTooSmall {
                n_sensors,
                p_sources,
            });
        }
        let p = p_sources;
        Ok(BlockPartition {
            n_sensors,
            p_sources,
            offsets: [0, p, 2 * p, 3 * p, 4 * p, n_sensors],
        })
    }

    #[inline]
    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    #[inline]
    pub fn p_sources(&self) -> usize {
        self.p_sources
    }

    /// Height of block `i` in 1..=5.
    pub fn height(&self, i: usize) -> Result<usize, Error> {
        let range = self.row_range(i)?;
        Ok(range.1 - range.0)
    }

    /// Half-open row range of block `i` in 1..=5.
    pub fn row_range(&self, i: usize) -> Result<(usize, usize), Error> {
        if !(1..=5).contains(&i) {
            return Err(Error::BlockIndexOutOfRange { index: i });
        }
        Ok((self.offsets[i - 1], self.offsets[i]))
    }

    /// Heights of all five blocks.
    pub fn heights(&self) -> [usize; 5] {
        let mut h = [0; 5];
        for (idx, slot) in h.iter_mut().enumerate() {
            *slot = self.offsets[idx + 1] - self.offsets[idx];
        }
        h
    }
}

/// Submatrix `Gamma_ij` at block row `i` and block column `j` (1-based).
pub fn block(
    gamma: &SpectralMatrix,
    part: &BlockPartition,
    i: usize,
    j: usize,
) -> Result<ComplexMatrix, Error> {
    if gamma.n_sensors() != part.n_sensors() {
        return Err(Error::DimensionMismatch {
            left: (gamma.n_sensors(), gamma.n_sensors()),
            right: (part.n_sensors(), part.n_sensors()),
        });
    }
    let (r0, r1) = part.row_range(i)?;
    let (c0, c1) = part.row_range(j)?;
    Ok(gamma.matrix().submatrix(r0, r1, c0, c1))
}

/// Same as [`block`] but only admits off-diagonal blocks, the ones free of
/// the additive-noise bias on the diagonal.
pub fn noise_free_block(
    gamma: &SpectralMatrix,
    part: &BlockPartition,
    i: usize,
    j: usize,
) -> Result<ComplexMatrix, Error> {
    if i == j {
        part.row_range(i)?; // report bad index before same-index
        return Err(Error::SameIndexBlock { index: i });
    }
    block(gamma, part, i, j)
}

/// Forward-backward average `(Gamma + J conj(Gamma) J) / 2` with J the
/// exchange matrix; restores rank for a coherent source pair on a ULA.
pub fn forward_backward_average(gamma: &SpectralMatrix) -> SpectralMatrix {
    let n = gamma.n_sensors();
    let g = gamma.matrix();
    let averaged = ComplexMatrix::from_fn(n, n, |i, j| {
        (g[(i, j)] + g[(n - 1 - i, n - 1 - j)].conj()) * 0.5
    });
    SpectralMatrix {
        gamma: symmetrize(&averaged),
        snapshots_used: gamma.snapshots_used(),
    }
}
