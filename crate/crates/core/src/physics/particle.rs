use crate::constants::ATOMIC_MASS;
use crate::error::{invalid, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Constant complex relative permittivity per spectral band.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Permittivity {
    /// At the grating laser wavelength.
    pub grating: Option<Complex64>,
    /// Over the thermal (blackbody) band.
    pub thermal: Option<Complex64>,
}

/// Homogeneous dielectric sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    mass: f64,
    density: f64,
    radius: f64,
    pub permittivity: Permittivity,
}

impl Particle {
    pub fn new(mass_kg: f64, density: f64, permittivity: Permittivity) -> Result<Self> {
        if !(mass_kg > 0.0 && mass_kg.is_finite()) {
            return Err(invalid(format!("particle mass must be positive, got {mass_kg:e} kg")));
        }
        if !(density > 0.0 && density.is_finite()) {
            return Err(invalid(format!("particle density must be positive, got {density:e}")));
        }
        let radius = (3.0 * mass_kg / (4.0 * PI * density)).cbrt();
        Ok(Self { mass: mass_kg, density, radius, permittivity })
    }

    pub fn from_amu(mass_amu: f64, density: f64, permittivity: Permittivity) -> Result<Self> {
        Self::new(mass_amu * ATOMIC_MASS, density, permittivity)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn mass_amu(&self) -> f64 {
        self.mass / ATOMIC_MASS
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3)
    }

    /// Clausius–Mossotti susceptibility `3V(eps-1)/(eps+2)`, in m^3.
    pub fn susceptibility(&self, eps: Complex64) -> Complex64 {
        3.0 * self.volume() * (eps - 1.0) / (eps + 2.0)
    }
}
