//! Angle helpers shared by every module.

use core::f64::consts::{PI, TAU};

/// Maps `angle` into (−π, π].
pub fn wrap(angle: f64) -> f64 {
    let mut a = libm::remainder(angle, TAU);
    if a <= -PI {
        a += TAU;
    }
    a
}

/// Signed distance between two angles, measured modulo 2π, in (−π, π].
pub fn mod_2pi_distance(a: f64, b: f64) -> f64 {
    wrap(a - b)
}

/// Continuous version of `phases`, chaining each value to the nearest
/// multiple of 2π from its predecessor. The first element is kept as is.
pub fn unwrap(phases: &[f64]) -> alloc::vec::Vec<f64> {
    let mut out = alloc::vec::Vec::with_capacity(phases.len());
    let mut prev: Option<f64> = None;
    for &p in phases {
        let v = match prev {
            None => p,
            Some(q) => p + TAU * libm::round((q - p) / TAU),
        };
        out.push(v);
        prev = Some(v);
    }
    out
}

pub fn deg(value: f64) -> f64 {
    value * PI / 180.0
}
