use super::config::ExperimentConfig;
use super::particle::Particle;
use crate::constants::{BOLTZMANN, PLANCK};
use crate::error::{invalid, Result};
use std::f64::consts::PI;

/// Time and length scales that follow from a configuration and a particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedGeometry {
    pub mass: f64,
    pub pitch: f64,
    /// `m d^2 / h`
    pub talbot_time: f64,
    pub t1: f64,
    pub t2: f64,
    /// Magnified period `D = d (t1 + t2) / t1` at the detector.
    pub period: f64,
    /// Fringe wavenumber `2 pi / D`.
    pub wavenumber: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
    /// `sqrt(2 pi) sigma_p (t1 + t2)`
    pub z_norm: f64,
    /// `t1 t2 / ((t1 + t2) t_T)`
    pub kappa: f64,
}

impl DerivedGeometry {
    pub fn total_time(&self) -> f64 {
        self.t1 + self.t2
    }

    /// Argument `n d t2 / (t_T D)` of the n-th Talbot coefficient.
    pub fn shear_over_pitch(&self, n: usize) -> f64 {
        n as f64 * self.pitch * self.t2 / (self.talbot_time * self.period)
    }

    /// Shear `s` for order n; equals the decoherence separation `n h t2 / (m D)`.
    pub fn shear(&self, n: usize) -> f64 {
        self.shear_over_pitch(n) * self.pitch
    }

    /// Separation probed by order-n decoherence, `n h t2 / (m D)`.
    pub fn separation(&self, n: usize) -> f64 {
        n as f64 * PLANCK * self.t2 / (self.mass * self.period)
    }

    /// Thermal washout `exp[-2 (n pi sigma_x t2 / (D t1))^2]`.
    pub fn thermal_factor(&self, n: usize) -> f64 {
        let q = n as f64 * PI * self.sigma_x * self.t2 / (self.period * self.t1);
        (-2.0 * q * q).exp()
    }

    /// Initial-state normalisation `m / Z` of the arrival density.
    pub fn density_scale(&self) -> f64 {
        self.mass / self.z_norm
    }
}

/// Compute the derived scales and check the window/sampling invariants.
pub fn derive_geometry(config: &ExperimentConfig, particle: &Particle) -> Result<DerivedGeometry> {
    let geometry = geometry_scales(config, particle)?;
    let period = geometry.period;
    let width = 2.0 * config.window_half_width;
    if width < 10.0 * period {
        return Err(invalid(format!(
            "window of {width:e} m covers fewer than 10 periods of {period:e} m"
        )));
    }
    let spacing = width / (config.samples - 1) as f64;
    if period / spacing < 2.0 * config.n_max as f64 {
        return Err(invalid(format!(
            "{} samples undersample order {} (need {} per period, have {:.2})",
            config.samples,
            config.n_max,
            2 * config.n_max,
            period / spacing
        )));
    }
    Ok(geometry)
}

/// Derived scales without the detection-window checks.
pub fn geometry_scales(config: &ExperimentConfig, particle: &Particle) -> Result<DerivedGeometry> {
    config.check_scalars()?;
    let mass = particle.mass();
    let pitch = config.grating_pitch;
    let talbot_time = mass * pitch * pitch / PLANCK;
    let t1 = config.t1.resolve(talbot_time);
    let t2 = config.t2.resolve(talbot_time);
    let period = pitch * (t1 + t2) / t1;
    let omega = config.trap_frequency;
    let sigma_x = (BOLTZMANN * config.com_temperature / (4.0 * PI * PI * mass * omega * omega)).sqrt();
    let sigma_p = (mass * BOLTZMANN * config.com_temperature).sqrt();
    let geometry = DerivedGeometry {
        mass,
        pitch,
        talbot_time,
        t1,
        t2,
        period,
        wavenumber: 2.0 * PI / period,
        sigma_x,
        sigma_p,
        z_norm: (2.0 * PI).sqrt() * sigma_p * (t1 + t2),
        kappa: t1 * t2 / ((t1 + t2) * talbot_time),
    };
    let all = [
        geometry.talbot_time,
        geometry.period,
        geometry.sigma_x,
        geometry.sigma_p,
        geometry.z_norm,
        geometry.kappa,
    ];
    if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(invalid("derived geometry is not finite and positive"));
    }
    Ok(geometry)
}
