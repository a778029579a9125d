//! Physical constants (SI, angular-frequency units for gyromagnetic ratios).
//!
//! Fundamental constants follow CODATA 2018. Nuclear gyromagnetic ratios are
//! the unshielded values tabulated by CODATA and the IUPAC NMR tables.

use core::f64::consts::PI;

/// Vacuum permeability, N/A².
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const KB: f64 = 1.380_649e-23;

/// Free electron, rad s⁻¹ T⁻¹ (negative: moment antiparallel to spin).
pub const GAMMA_E: f64 = -1.760_859_630_23e11;
pub const GAMMA_1H: f64 = 2.675_221_874_4e8;
pub const GAMMA_13C: f64 = 6.728_284e7;
pub const GAMMA_19F: f64 = 2.518_15e8;
pub const GAMMA_14N: f64 = 1.933_779_2e7;
pub const GAMMA_15N: f64 = -2.712_618_04e7;

/// NV ground-state zero-field splitting, rad/s.
pub const D_NV: f64 = 2.0 * PI * 2.87e9;

/// Hz to rad/s.
pub fn f2w(f: f64) -> f64 {
    2.0 * PI * f
}

/// rad/s to Hz.
pub fn w2f(w: f64) -> f64 {
    w / (2.0 * PI)
}
