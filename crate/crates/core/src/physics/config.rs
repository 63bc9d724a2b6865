use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// A free-fall duration, either absolute or in units of the Talbot time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FlightTime {
    Seconds(f64),
    TalbotTimes(f64),
}

impl FlightTime {
    pub fn resolve(self, talbot_time: f64) -> f64 {
        match self {
            FlightTime::Seconds(t) => t,
            FlightTime::TalbotTimes(f) => f * talbot_time,
        }
    }
}

/// How the particle scatters and absorbs grating light.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpticalModel {
    /// Coherent phase grating only; no absorption or scattering masks.
    PurePhase,
    /// Clausius–Mossotti dipole.
    #[default]
    Rayleigh,
    /// Full Mie series.
    Mie,
}

/// Explicit grating pulse; when absent it is derived from `phi0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GratingPulse {
    /// J
    pub energy: f64,
    /// m^2
    pub spot_area: f64,
}

/// Control and environment parameters of one interferometer run, SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Trap frequency in Hz (the thermal width uses 4 pi^2 Omega^2).
    pub trap_frequency: f64,
    pub com_temperature: f64,
    pub internal_temperature: f64,
    pub environment_temperature: f64,
    /// Pa
    pub gas_pressure: f64,
    /// kg
    pub gas_mass: f64,
    /// Collision cross-section override in m^2; geometric `pi R^2` otherwise.
    pub collision_cross_section: Option<f64>,
    pub grating_pitch: f64,
    pub phi0: f64,
    pub pulse: Option<GratingPulse>,
    pub t1: FlightTime,
    pub t2: FlightTime,
    /// Constant blur offset in m; the initial position width when `None`.
    pub blur_offset: Option<f64>,
    /// m/s
    pub drift_rate: f64,
    pub window_half_width: f64,
    pub samples: usize,
    pub n_max: usize,
    pub optical_model: OpticalModel,
}

impl ExperimentConfig {
    /// Grating laser wavelength, twice the pitch.
    pub fn grating_wavelength(&self) -> f64 {
        2.0 * self.grating_pitch
    }

    pub fn grating_wavenumber(&self) -> f64 {
        std::f64::consts::PI / self.grating_pitch
    }

    pub(crate) fn check_scalars(&self) -> Result<()> {
        let positive = [
            ("trap frequency", self.trap_frequency),
            ("centre-of-mass temperature", self.com_temperature),
            ("grating pitch", self.grating_pitch),
            ("window half-width", self.window_half_width),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v:e}")));
            }
        }
        let non_negative = [
            ("internal temperature", self.internal_temperature),
            ("environment temperature", self.environment_temperature),
            ("gas pressure", self.gas_pressure),
            ("drift rate", self.drift_rate),
            ("phi0", self.phi0),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be non-negative, got {v:e}")));
            }
        }
        for (name, t) in [("t1", self.t1), ("t2", self.t2)] {
            let v = match t {
                FlightTime::Seconds(v) | FlightTime::TalbotTimes(v) => v,
            };
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v:e}")));
            }
        }
        if self.gas_pressure > 0.0 && !(self.gas_mass > 0.0) {
            return Err(invalid("gas molecular mass must be positive"));
        }
        if let Some(p) = self.pulse {
            if !(p.energy >= 0.0 && p.spot_area > 0.0) {
                return Err(invalid("grating pulse needs energy >= 0 and spot area > 0"));
            }
        }
        if self.samples < 2 || self.n_max == 0 {
            return Err(invalid("need at least two window samples and n_max >= 1"));
        }
        Ok(())
    }
}
