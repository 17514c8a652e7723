//! Thin shims over `libm` so the crate uses one float-math implementation
//! everywhere, independent of whether `std` is linked.

#![allow(dead_code)]

pub use libm::{asin, atan2, fabs, hypot, log10, pow, sin, sqrt};

pub const DEG_PER_RAD: f64 = 180.0 / core::f64::consts::PI;

#[inline]
pub fn deg_to_rad(deg: f64) -> f64 {
    deg * core::f64::consts::PI / 180.0
}

#[inline]
pub fn rad_to_deg(rad: f64) -> f64 {
    rad * DEG_PER_RAD
}

#[inline]
pub fn fmax(a: f64, b: f64) -> f64 {
    if a > b {
        a
    } else {
        b
    }
}

#[inline]
pub fn fmin(a: f64, b: f64) -> f64 {
    if a < b {
        a
    } else {
        b
    }
}

/// Natural logarithm, used by the Box-Muller transform.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
