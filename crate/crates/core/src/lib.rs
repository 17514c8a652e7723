//! Direction-of-arrival estimation for uniform linear arrays.
//!
//! The centerpiece is the fifth-order phase propagator: the array steering
//! matrix is split into five row blocks, linear maps between the blocks are
//! extracted from off-diagonal blocks of the sample spectral matrix, and the
//! resulting operators annihilate the steering matrix without any
//! eigendecomposition. Classical baselines (Bartlett beamforming, MUSIC,
//! ESPRIT) and shared peak/error machinery round out the crate.
//!
//! The crate is `no_std` (with `alloc`); all float math goes through `libm`
//! so results are identical with or without the standard library. Everything
//! here is pure value-in/value-out and safe to call from parallel workers.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod array_model;
pub mod baselines;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod propagator;
pub mod spectral;

mod math;

pub use error::Error;
pub use linalg::{Complex64, ComplexMatrix};
