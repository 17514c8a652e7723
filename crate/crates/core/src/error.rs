//! Crate-wide error type.
//!
//! A single enum keeps propagation across the module layers simple: a
//! singular covariance block detected deep in an LU factorization surfaces
//! unchanged at the experiment level, where it is the signal that sources
//! are coherent or the partition is misconfigured.

use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix operands have incompatible shapes.
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    /// Operation requires a square matrix.
    NotSquare { rows: usize, cols: usize },
    /// A matrix holds a NaN or infinite component.
    NonFinite,
    /// A covariance block is numerically rank deficient (zero or underflowing
    /// pivot, or pivot ratio beyond the condition gate). Typically means the
    /// source covariance is singular (coherent sources) or the declared
    /// source count is wrong.
    SingularBlock,
    /// Input is not Hermitian within tolerance.
    NotHermitian,
    /// An iterative eigensolver hit its iteration cap.
    NoConvergence,
    /// A subspace argument has numerical rank zero.
    DegenerateSubspace,
    /// Eigenvalue routine invoked above its supported dimension.
    UnsupportedDimension { dim: usize, max: usize },
    /// Azimuth angle outside the admitted open interval.
    AngleOutOfRange { angle_deg: f64 },
    /// Source angles must be strictly distinct.
    DuplicateAngles,
    /// A scenario or array parameter violates its invariant.
    InvalidParameter(&'static str),
    /// Block partition requires strictly more than 4*P sensors.
    PartitionTooSmall { n_sensors: usize, p_sources: usize },
    /// Block index outside 1..=5.
    BlockIndexOutOfRange { index: usize },
    /// Requested a noise-free block on the diagonal (i = j).
    SameIndexBlock { index: usize },
    /// ESPRIT rotation eigenvalue maps outside the physical angle range.
    InvalidShift { magnitude: f64 },
    /// RMSE requested over a trial set with no resolved trials.
    NoResolvedTrials,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { left, right } => write!(
                f,
                "dimension mismatch: {}x{} against {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::NotSquare { rows, cols } => {
                write!(f, "matrix must be square, got {rows}x{cols}")
            }
            Error::NonFinite => write!(f, "matrix contains NaN or infinite components"),
            Error::SingularBlock => write!(
                f,
                "singular covariance block (coherent sources or wrong source count?)"
            ),
            Error::NotHermitian => write!(f, "matrix is not Hermitian within tolerance"),
            Error::NoConvergence => write!(f, "eigensolver did not converge"),
            Error::DegenerateSubspace => write!(f, "subspace has numerical rank zero"),
            Error::UnsupportedDimension { dim, max } => {
                write!(f, "dimension {dim} above supported maximum {max}")
            }
            Error::AngleOutOfRange { angle_deg } => {
                write!(f, "angle {angle_deg} deg outside admitted range")
            }
            Error::DuplicateAngles => write!(f, "source angles must be strictly distinct"),
            Error::InvalidParameter(what) => write!(f, "{what}"),
            Error::PartitionTooSmall {
                n_sensors,
                p_sources,
            } => write!(
                f,
                "n_sensors must exceed 4*p_sources: got N={n_sensors}, P={p_sources}"
            ),
            Error::BlockIndexOutOfRange { index } => {
                write!(f, "block index {index} outside 1..=5")
            }
            Error::SameIndexBlock { index } => write!(
                f,
                "block ({index},{index}) is noise-affected; noise-free access requires i != j"
            ),
            Error::InvalidShift { magnitude } => write!(
                f,
                "ESPRIT rotation eigenvalue is unphysical (|sin| = {magnitude} > 1)"
            ),
            Error::NoResolvedTrials => write!(f, "no resolved trials to aggregate"),
        }
    }
}

impl core::error::Error for Error {}
