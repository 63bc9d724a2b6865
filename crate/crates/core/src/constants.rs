//! CODATA 2018 exact and recommended values, SI units.

use std::f64::consts::PI;

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * PI);
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Unified atomic mass unit, also the CSL reference mass m0.
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;

pub const HPA: f64 = 100.0;
pub const LN2: f64 = std::f64::consts::LN_2;
