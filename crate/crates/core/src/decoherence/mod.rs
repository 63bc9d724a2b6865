//! Decoherence channels and the fringe reduction factors they produce.

pub mod blackbody;
pub mod csl;
pub mod environment;

pub use blackbody::{ThermalProcess, ThermalSpectrum};
pub use csl::{
    csl_form_integral, csl_rate, csl_reduction, csl_resolution, point_like_resolution, rate_per_lambda, CslColumn,
    CslParams,
};
pub use environment::{collision_rate, measurement_reduction};

use crate::error::Result;
use crate::physics::{DerivedGeometry, ExperimentConfig, Particle};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Csl,
    BlackbodyAbsorption,
    BlackbodyEmission,
    BlackbodyScattering,
    Collision,
    Measurement,
}

/// Spatial resolution of a channel.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolution {
    /// Every event fully decoheres: `f(x) = 0` for `x > 0`.
    FullyResolving,
    Csl { r_c: f64, particle: Particle },
    Thermal(ThermalSpectrum),
    /// Gaussian position blur of the given width; not a rate process.
    Blur { sigma: f64 },
}

/// A localisation process with rate `Gamma` and resolution function `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceChannel {
    pub kind: ChannelKind,
    pub rate: f64,
    pub resolution: Resolution,
}

impl DecoherenceChannel {
    pub fn csl(theta: CslParams, particle: &Particle) -> Result<Self> {
        Ok(Self {
            kind: ChannelKind::Csl,
            rate: csl_rate(theta, particle)?,
            resolution: Resolution::Csl { r_c: theta.r_c, particle: particle.clone() },
        })
    }

    pub fn thermal(spectrum: ThermalSpectrum) -> Self {
        let kind = match spectrum.process {
            ThermalProcess::Absorption => ChannelKind::BlackbodyAbsorption,
            ThermalProcess::Emission => ChannelKind::BlackbodyEmission,
            ThermalProcess::Scattering => ChannelKind::BlackbodyScattering,
        };
        Self { kind, rate: spectrum.rate, resolution: Resolution::Thermal(spectrum) }
    }

    /// Collisions with residual gas at `pressure` (Pa) and `temperature`.
    pub fn collision(pressure: f64, temperature: f64, gas_mass: f64, cross_section: f64) -> Self {
        Self {
            kind: ChannelKind::Collision,
            rate: collision_rate(pressure, temperature, gas_mass, cross_section),
            resolution: Resolution::FullyResolving,
        }
    }

    pub fn measurement(sigma: f64) -> Self {
        Self { kind: ChannelKind::Measurement, rate: 0.0, resolution: Resolution::Blur { sigma } }
    }

    /// `1 - f(x)`.
    pub fn one_minus_resolution(&self, x: f64) -> Result<f64> {
        Ok(match &self.resolution {
            Resolution::FullyResolving => {
                if x == 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            Resolution::Csl { r_c, particle } => csl::csl_one_minus_resolution(x, *r_c, particle)?,
            Resolution::Thermal(s) => s.one_minus_resolution(x),
            Resolution::Blur { sigma } => 1.0 - (-0.5 * (2.0 * PI * x / sigma.max(f64::MIN_POSITIVE)).powi(2)).exp(),
        })
    }

    /// Reduction factor `R_n` for the given geometry.
    pub fn reduction(&self, n: usize, geometry: &DerivedGeometry) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        if let Resolution::Blur { sigma } = self.resolution {
            return Ok(measurement_reduction(n, sigma, geometry.period));
        }
        if self.rate == 0.0 {
            return Ok(1.0);
        }
        let omf = self.one_minus_resolution(geometry.separation(n))?;
        Ok((-self.rate * omf * geometry.total_time()).exp())
    }
}

/// Blur width at the detector, `sigma_m = offset + drift (t1 + t2)`.
pub fn measurement_width(config: &ExperimentConfig, geometry: &DerivedGeometry) -> f64 {
    config.blur_offset.unwrap_or(geometry.sigma_x) + config.drift_rate * geometry.total_time()
}

/// Every channel other than CSL for one configuration.
///
/// The thermal channels are included only when a thermal-band permittivity is
/// configured.
pub fn environment_channels(
    config: &ExperimentConfig,
    particle: &Particle,
    geometry: &DerivedGeometry,
) -> Result<Vec<DecoherenceChannel>> {
    let mut out = Vec::new();
    if let Some(eps) = particle.permittivity.thermal {
        let chi = particle.susceptibility(eps);
        let specs = [
            (ThermalProcess::Absorption, config.environment_temperature),
            (ThermalProcess::Emission, config.internal_temperature),
            (ThermalProcess::Scattering, config.environment_temperature),
        ];
        for (process, t) in specs {
            out.push(DecoherenceChannel::thermal(ThermalSpectrum::new(process, t, chi)?));
        }
    }
    let cross_section = config.collision_cross_section.unwrap_or(PI * particle.radius().powi(2));
    out.push(DecoherenceChannel::collision(
        config.gas_pressure,
        config.environment_temperature,
        config.gas_mass,
        cross_section,
    ));
    out.push(DecoherenceChannel::measurement(measurement_width(config, geometry)));
    Ok(out)
}

/// Per-order reduction factors, split into the CSL part and everything else.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionFactors {
    pub per_channel: Vec<(ChannelKind, Vec<f64>)>,
    /// `R_n^mod`
    pub model: Vec<f64>,
    /// `R_n^oth`
    pub other: Vec<f64>,
}

impl ReductionFactors {
    /// `R_n = R_n^mod R_n^oth`.
    pub fn total(&self) -> Vec<f64> {
        self.model.iter().zip(&self.other).map(|(a, b)| a * b).collect()
    }
}

/// Multiply channel factors order by order.
pub fn combine(channels: &[DecoherenceChannel], geometry: &DerivedGeometry, n_max: usize) -> Result<ReductionFactors> {
    let mut out = ReductionFactors {
        per_channel: Vec::with_capacity(channels.len()),
        model: vec![1.0; n_max + 1],
        other: vec![1.0; n_max + 1],
    };
    for channel in channels {
        let factors = (0..=n_max).map(|n| channel.reduction(n, geometry)).collect::<Result<Vec<_>>>()?;
        let target = if channel.kind == ChannelKind::Csl { &mut out.model } else { &mut out.other };
        for (t, f) in target.iter_mut().zip(&factors) {
            *t *= f;
        }
        out.per_channel.push((channel.kind, factors));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ATOMIC_MASS, HPA};
    use crate::physics::{derive_geometry, FlightTime, OpticalModel, Permittivity};
    use num_complex::Complex64;

    fn setup(pressure_hpa: f64) -> (ExperimentConfig, Particle, DerivedGeometry) {
        let cfg = ExperimentConfig {
            trap_frequency: 2e5,
            com_temperature: 0.02,
            internal_temperature: 25.0,
            environment_temperature: 20.0,
            gas_pressure: pressure_hpa * HPA,
            gas_mass: 2.016 * ATOMIC_MASS,
            collision_cross_section: None,
            grating_pitch: 177e-9,
            phi0: 2.0,
            pulse: None,
            t1: FlightTime::TalbotTimes(2.0),
            t2: FlightTime::TalbotTimes(1.0),
            blur_offset: None,
            drift_rate: 1e-10,
            window_half_width: 5e-6,
            samples: 1000,
            n_max: 6,
            optical_model: OpticalModel::Rayleigh,
        };
        let perm = Permittivity { grating: None, thermal: Some(Complex64::new(11.7, 0.1)) };
        let p = Particle::from_amu(1e8, 2329.0, perm).unwrap();
        let g = derive_geometry(&cfg, &p).unwrap();
        (cfg, p, g)
    }

    #[test]
    fn grw_point_reduction() {
        let (_, p, g) = setup(1e-15);
        let theta = CslParams::new(1e-16, 1e-7).unwrap();
        let r1 = csl_reduction(1, theta, &p, &g).unwrap();
        // composed from the rate, separation and resolution oracles
        assert!((r1 / 0.091_379_787_456_353_79 - 1.0).abs() < 1e-8, "{r1}");
        assert_eq!(csl_reduction(0, theta, &p, &g).unwrap(), 1.0);
        let column = CslColumn::new(1e-7, &p, &g, 3).unwrap();
        assert!((column.reduction(1, 1e-16) / r1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn empty_and_single_channel_combination() {
        let (_, _, g) = setup(1e-15);
        let none = combine(&[], &g, 4).unwrap();
        assert_eq!(none.total(), vec![1.0; 5]);
        let ch = DecoherenceChannel::collision(1e-13, 20.0, 2.016 * ATOMIC_MASS, 2e-15);
        let one = combine(&[ch.clone()], &g, 4).unwrap();
        for n in 0..=4 {
            assert_eq!(one.other[n], ch.reduction(n, &g).unwrap());
        }
    }

    #[test]
    fn doubling_pressure_squares_collision_factor() {
        let (_, _, g) = setup(1e-15);
        let a = DecoherenceChannel::collision(1e-12, 20.0, 2.016 * ATOMIC_MASS, 2e-15).reduction(1, &g).unwrap();
        let b = DecoherenceChannel::collision(2e-12, 20.0, 2.016 * ATOMIC_MASS, 2e-15).reduction(1, &g).unwrap();
        assert!((b / (a * a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collisions_dominate_at_high_pressure() {
        let (cfg, p, g) = setup(1e-12);
        let channels = environment_channels(&cfg, &p, &g).unwrap();
        let red = combine(&channels, &g, 1).unwrap();
        let collision = red.per_channel.iter().find(|(k, _)| *k == ChannelKind::Collision).unwrap().1[1];
        for (kind, f) in &red.per_channel {
            assert!(f[1] >= collision || *kind == ChannelKind::Collision);
        }
        let product: f64 = red.per_channel.iter().map(|(_, f)| f[1]).product();
        assert!((product / red.other[1] - 1.0).abs() < 1e-14);
    }
}
