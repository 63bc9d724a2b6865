//! Optical response of the particle to the grating laser and the resulting
//! scattering and absorption masks.

use super::config::{ExperimentConfig, OpticalModel};
use super::geometry::DerivedGeometry;
use super::mie::MieCoefficients;
use super::particle::Particle;
use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::error::{invalid, numerical, Error, Result};
use crate::quadrature::gauss_legendre;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Susceptibility-level response at the grating wavelength.
#[derive(Debug, Clone)]
pub struct OpticalResponse {
    pub model: OpticalModel,
    /// Laser wavenumber `pi / d`.
    pub wavenumber: f64,
    /// Gradient-force factor entering `phi0 = 4 F0 E_G / (hbar c k^3 a_G)`.
    pub f0: f64,
    /// Absorption cross-section, m^2.
    pub sigma_abs: f64,
    rayleigh_amplitude: Complex64,
    mie: Option<MieCoefficients>,
}

impl OpticalResponse {
    pub fn new(config: &ExperimentConfig, particle: &Particle) -> Result<Self> {
        let k = config.grating_wavenumber();
        let eps = particle.permittivity.grating.ok_or_else(|| {
            invalid("grating-band permittivity is required unless the optical model is pure_phase")
        });
        match config.optical_model {
            OpticalModel::PurePhase => {
                // Only the phase matters; keep a Rayleigh force factor when a
                // permittivity is available so pulse energies can still be derived.
                let (f0, amp) = match eps {
                    Ok(eps) => {
                        let chi = particle.susceptibility(eps);
                        (k.powi(3) * chi.re / 2.0, Complex64::new(0.0, 0.0))
                    }
                    Err(_) => (f64::NAN, Complex64::new(0.0, 0.0)),
                };
                Ok(Self {
                    model: OpticalModel::PurePhase,
                    wavenumber: k,
                    f0,
                    sigma_abs: 0.0,
                    rayleigh_amplitude: amp,
                    mie: None,
                })
            }
            OpticalModel::Rayleigh => {
                let eps = eps?;
                let chi = particle.susceptibility(eps);
                Ok(Self {
                    model: OpticalModel::Rayleigh,
                    wavenumber: k,
                    f0: k.powi(3) * chi.re / 2.0,
                    sigma_abs: k * chi.im,
                    rayleigh_amplitude: -Complex64::i() * k.powi(3) * chi / (4.0 * PI),
                    mie: None,
                })
            }
            OpticalModel::Mie => {
                let eps = eps?;
                let index = eps.sqrt();
                let x = k * particle.radius();
                let mie = MieCoefficients::new(x, index)?;
                let (s0, _) = mie.amplitudes(0.0);
                let geometric = PI * particle.radius().powi(2);
                let sigma_abs = (mie.q_ext() - mie.q_sca()) * geometric;
                Ok(Self {
                    model: OpticalModel::Mie,
                    wavenumber: k,
                    f0: 2.0 * PI * (Complex64::i() * s0).re,
                    sigma_abs: sigma_abs.max(0.0),
                    rayleigh_amplitude: Complex64::new(0.0, 0.0),
                    mie: Some(mie),
                })
            }
        }
    }

    /// Far-field amplitudes `(S1, S2)` at polar angle `theta`.
    pub fn amplitudes(&self, theta: f64) -> (Complex64, Complex64) {
        match (&self.mie, self.model) {
            (Some(mie), _) => mie.amplitudes(theta),
            (None, OpticalModel::Rayleigh) => (self.rayleigh_amplitude, self.rayleigh_amplitude * theta.cos()),
            _ => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        }
    }

    fn checked_f0(&self) -> Result<f64> {
        if self.f0 > 0.0 && self.f0.is_finite() {
            Ok(self.f0)
        } else {
            Err(Error::InvalidMaterial(format!(
                "gradient-force factor F0 = {:e} is not positive; a phase grating cannot be formed",
                self.f0
            )))
        }
    }

    /// Pulse fluence `E_G / a_G` that produces the phase `phi0`.
    pub fn fluence_for_phase(&self, phi0: f64) -> Result<f64> {
        let f0 = self.checked_f0()?;
        Ok(phi0 * HBAR * SPEED_OF_LIGHT * self.wavenumber.powi(3) / (4.0 * f0))
    }

    /// Phase produced by a pulse of the given fluence.
    pub fn phase_for_fluence(&self, fluence: f64) -> Result<f64> {
        let f0 = self.checked_f0()?;
        Ok(4.0 * f0 * fluence / (HBAR * SPEED_OF_LIGHT * self.wavenumber.powi(3)))
    }
}

/// Pulse spot area and energy realising `phi0_target`.
///
/// The spot covers three thermal widths of the cloud after the first flight,
/// `a_G = pi (3 (sigma_x + sigma_p t1 / m))^2`.
pub fn grating_pulse(
    phi0_target: f64,
    config: &ExperimentConfig,
    particle: &Particle,
    geometry: &DerivedGeometry,
) -> Result<(f64, f64)> {
    if !(phi0_target >= 0.0 && phi0_target.is_finite()) {
        return Err(invalid(format!("target phase must be non-negative, got {phi0_target:e}")));
    }
    let response = OpticalResponse::new(config, particle)?;
    let width = geometry.sigma_x + geometry.sigma_p * geometry.t1 / geometry.mass;
    let area = PI * (3.0 * width).powi(2);
    let energy = response.fluence_for_phase(phi0_target)? * area;
    Ok((area, energy))
}

/// Scattering and absorption mask parameters at one shear.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MaskTerms {
    pub a_theta: f64,
    pub a_phi: f64,
    pub b_theta: f64,
    pub b_phi: f64,
    pub f_theta: f64,
    pub f_phi: f64,
    pub zeta_abs: f64,
    pub zeta_coh: f64,
    /// Mean number of absorbed photons.
    pub n0: f64,
}

impl MaskTerms {
    /// Coherent phase only; every mask vanishes.
    pub fn pure_phase(zeta_coh: f64) -> Self {
        Self { zeta_coh, ..Self::default() }
    }

    pub fn a(&self) -> f64 {
        self.a_theta + self.a_phi
    }

    pub fn b(&self) -> f64 {
        self.b_theta + self.b_phi
    }

    pub fn f(&self) -> f64 {
        self.f_theta + self.f_phi
    }
}

// Amplitude products tabulated at the Gauss-Legendre nodes in cos(theta).
#[derive(Debug, Clone)]
struct AngularLevel {
    mu: Vec<f64>,
    weight: Vec<f64>,
    // S2*(theta) (-S2(pi - theta)) / k^2 and S1*(theta) S1(pi - theta) / k^2
    cross_theta: Vec<Complex64>,
    cross_phi: Vec<Complex64>,
    // |S2|^2 / k^2 and |S1|^2 / k^2
    self_theta: Vec<f64>,
    self_phi: Vec<f64>,
}

const LEVELS: [usize; 4] = [64, 128, 256, 512];
const PHI_NODES: usize = 64;

/// Precomputed grating interaction for one configuration and particle.
#[derive(Debug, Clone)]
pub struct GratingInteraction {
    pub response: OpticalResponse,
    pub pitch: f64,
    pub phi0: f64,
    /// Fluence `E_G / a_G` in J m^-2.
    pub fluence: f64,
    pub n0: f64,
    prefactor: f64,
    // Trapezoid sums of cos^2 and sin^2 over the azimuth.
    azimuth_cos2: f64,
    azimuth_sin2: f64,
    // tabulated on first use; most shears converge at the coarsest level
    levels: Vec<OnceLock<AngularLevel>>,
}

impl GratingInteraction {
    pub fn new(config: &ExperimentConfig, particle: &Particle) -> Result<Self> {
        let response = OpticalResponse::new(config, particle)?;
        let k = response.wavenumber;
        let pure = response.model == OpticalModel::PurePhase;
        let fluence = match (config.pulse, pure) {
            (_, true) => 0.0,
            (Some(p), false) => p.energy / p.spot_area,
            (None, false) => response.fluence_for_phase(config.phi0)?,
        };
        let photon = HBAR * SPEED_OF_LIGHT * k;
        let n0 = 2.0 * response.sigma_abs * fluence / photon;
        let prefactor = 8.0 * PI / photon * fluence;

        let h = 2.0 * PI / PHI_NODES as f64;
        let (mut c2, mut s2) = (0.0, 0.0);
        for j in 0..PHI_NODES {
            let phi = j as f64 * h;
            c2 += h * phi.cos().powi(2);
            s2 += h * phi.sin().powi(2);
        }

        let levels = if pure || fluence == 0.0 {
            Vec::new()
        } else {
            LEVELS.iter().map(|_| OnceLock::new()).collect()
        };
        Ok(Self {
            response,
            pitch: config.grating_pitch,
            phi0: config.phi0,
            fluence,
            n0,
            prefactor,
            azimuth_cos2: c2,
            azimuth_sin2: s2,
            levels,
        })
    }

    /// Mask parameters at shear `s` (metres).
    pub fn mask_terms(&self, s: f64) -> Result<MaskTerms> {
        let arg = PI * s / self.pitch;
        let zeta_coh = self.phi0 * arg.sin();
        let zeta_abs = 0.5 * self.n0 * (1.0 - arg.cos());
        if self.levels.is_empty() {
            return Ok(MaskTerms { zeta_coh, zeta_abs, n0: self.n0, ..MaskTerms::default() });
        }
        let level = |i: usize| self.levels[i].get_or_init(|| tabulate(&self.response, LEVELS[i]));
        let mut prev = self.integrate_level(level(0), s);
        for i in 1..self.levels.len() {
            let next = self.integrate_level(level(i), s);
            let scale = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let change = prev.iter().zip(&next).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            prev = next;
            if change <= 1e-8 * scale.max(1e-300) || change == 0.0 {
                return Ok(self.assemble(prev, zeta_coh, zeta_abs));
            }
        }
        Err(numerical(format!("angular quadrature of the grating masks did not converge at shear {s:e} m")))
    }

    fn assemble(&self, v: [f64; 6], zeta_coh: f64, zeta_abs: f64) -> MaskTerms {
        MaskTerms {
            a_theta: v[0],
            a_phi: v[1],
            b_theta: v[2],
            b_phi: v[3],
            f_theta: v[4],
            f_phi: v[5],
            zeta_abs,
            zeta_coh,
            n0: self.n0,
        }
    }

    fn integrate_level(&self, level: &AngularLevel, s: f64) -> [f64; 6] {
        let k = self.response.wavenumber;
        let ks = k * s;
        let cos_ks = ks.cos();
        let mut acc = [0.0; 6];
        for i in 0..level.mu.len() {
            let mu = level.mu[i];
            let w = level.weight[i];
            let even = (ks * mu).cos() - cos_ks;
            let odd = (ks * mu).sin();
            let forward = (ks * (1.0 - mu)).cos() - 1.0;
            acc[0] += w * level.cross_theta[i].re * even;
            acc[1] += w * level.cross_phi[i].re * even;
            acc[2] += w * level.cross_theta[i].im * odd;
            acc[3] += w * level.cross_phi[i].im * odd;
            acc[4] += w * level.self_theta[i] * forward;
            acc[5] += w * level.self_phi[i] * forward;
        }
        let p = self.prefactor;
        [
            p * self.azimuth_cos2 * acc[0],
            p * self.azimuth_sin2 * acc[1],
            p * self.azimuth_cos2 * acc[2],
            p * self.azimuth_sin2 * acc[3],
            p * self.azimuth_cos2 * acc[4],
            p * self.azimuth_sin2 * acc[5],
        ]
    }
}

fn tabulate(response: &OpticalResponse, n: usize) -> AngularLevel {
    let (mu, weight) = gauss_legendre(n);
    let k2 = response.wavenumber.powi(2);
    let mut level = AngularLevel {
        cross_theta: Vec::with_capacity(n),
        cross_phi: Vec::with_capacity(n),
        self_theta: Vec::with_capacity(n),
        self_phi: Vec::with_capacity(n),
        mu,
        weight,
    };
    for &mu in &level.mu {
        let theta = mu.clamp(-1.0, 1.0).acos();
        let (s1, s2) = response.amplitudes(theta);
        let (r1, r2) = response.amplitudes(PI - theta);
        level.cross_theta.push(s2.conj() * (-r2) / k2);
        level.cross_phi.push(s1.conj() * r1 / k2);
        level.self_theta.push(s2.norm_sqr() / k2);
        level.self_phi.push(s1.norm_sqr() / k2);
    }
    level
}

/// Mask parameters at shear `s` for a configuration and particle.
pub fn grating_mask_terms(s: f64, config: &ExperimentConfig, particle: &Particle) -> Result<MaskTerms> {
    GratingInteraction::new(config, particle)?.mask_terms(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::config::{FlightTime, GratingPulse};
    use crate::physics::particle::Permittivity;

    fn config(model: OpticalModel) -> ExperimentConfig {
        ExperimentConfig {
            trap_frequency: 2e5,
            com_temperature: 0.02,
            internal_temperature: 25.0,
            environment_temperature: 20.0,
            gas_pressure: 1e-13,
            gas_mass: 2.016 * crate::constants::ATOMIC_MASS,
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
            optical_model: model,
        }
    }

    fn particle() -> Particle {
        let perm = Permittivity {
            grating: Some(Complex64::new(22.36, 33.6)),
            thermal: Some(Complex64::new(11.7, 0.1)),
        };
        Particle::from_amu(1e8, 2329.0, perm).unwrap()
    }

    // Brute-force midpoint rule over (theta, phi) using the full vector amplitudes.
    fn brute_force(g: &GratingInteraction, s: f64, n: usize) -> [f64; 6] {
        let k = g.response.wavenumber;
        let mut acc = [0.0; 6];
        let (ht, hp) = (PI / n as f64, 2.0 * PI / n as f64);
        for i in 0..n {
            let theta = (i as f64 + 0.5) * ht;
            let nx = theta.cos();
            let (s1, s2) = g.response.amplitudes(theta);
            let (r1, r2) = g.response.amplitudes(PI - theta);
            for j in 0..n {
                let phi = (j as f64 + 0.5) * hp;
                let dw = theta.sin() * ht * hp;
                let (c, sn) = (phi.cos(), phi.sin());
                let f_t = s2 * c / k;
                let f_p = -s1 * sn / k;
                let x_t = (s2 * c / k).conj() * (-r2 * c / k);
                let x_p = (s1 * sn / k).conj() * (r1 * sn / k);
                let even = (k * nx * s).cos() - (k * s).cos();
                let fwd = (k * (1.0 - nx) * s).cos() - 1.0;
                acc[0] += dw * x_t.re * even;
                acc[1] += dw * x_p.re * even;
                acc[2] += dw * x_t.im * (k * nx * s).sin();
                acc[3] += dw * x_p.im * (k * nx * s).sin();
                acc[4] += dw * f_t.norm_sqr() * fwd;
                acc[5] += dw * f_p.norm_sqr() * fwd;
            }
        }
        acc.map(|v| v * g.prefactor)
    }

    #[test]
    fn zero_shear_gives_zero_masks() {
        let m = grating_mask_terms(0.0, &config(OpticalModel::Rayleigh), &particle()).unwrap();
        assert_eq!(m.zeta_abs, 0.0);
        assert_eq!(m.zeta_coh, 0.0);
        for v in [m.a_theta, m.a_phi, m.b_theta, m.b_phi, m.f_theta, m.f_phi] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn zero_pulse_energy_gives_zero_masks() {
        let mut cfg = config(OpticalModel::Rayleigh);
        cfg.pulse = Some(GratingPulse { energy: 0.0, spot_area: 1e-10 });
        let m = grating_mask_terms(60e-9, &cfg, &particle()).unwrap();
        for v in [m.a_theta, m.a_phi, m.b_theta, m.b_phi, m.f_theta, m.f_phi, m.zeta_abs, m.n0] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn rayleigh_masks_match_closed_form_and_brute_force() {
        let cfg = config(OpticalModel::Rayleigh);
        let g = GratingInteraction::new(&cfg, &particle()).unwrap();
        let s = cfg.grating_pitch / 2.0;
        let m = g.mask_terms(s).unwrap();
        let k = g.response.wavenumber;
        let ks = k * s;
        let amp2 = g.response.amplitudes(0.0).0.norm_sqr() / (k * k);
        let scale = g.prefactor * PI * amp2;
        let a_phi = scale * (2.0 * ks.sin() / ks - 2.0 * ks.cos());
        let f_phi = scale * ((2.0 * ks).sin() / ks - 2.0);
        assert!((m.a_phi / a_phi - 1.0).abs() < 1e-12);
        assert!((m.f_phi / f_phi - 1.0).abs() < 1e-12);
        assert!(m.b_theta.abs() < 1e-12 * scale);
        assert!(m.b_phi.abs() < 1e-12 * scale);
        let oracle = brute_force(&g, s, 640);
        let got = [m.a_theta, m.a_phi, m.b_theta, m.b_phi, m.f_theta, m.f_phi];
        for (g, o) in got.iter().zip(oracle) {
            assert!((g - o).abs() <= 1e-5 * o.abs().max(scale), "{g} vs {o}");
        }
        assert!(m.f_theta <= 0.0 && m.f_phi <= 0.0);
    }

    #[test]
    fn mie_masks_match_brute_force() {
        let cfg = config(OpticalModel::Mie);
        let mut p = particle();
        p.permittivity.grating = Some(Complex64::new(2.25, 0.05));
        let g = GratingInteraction::new(&cfg, &p).unwrap();
        let s = 0.3 * cfg.grating_pitch;
        let m = g.mask_terms(s).unwrap();
        let oracle = brute_force(&g, s, 640);
        let got = [m.a_theta, m.a_phi, m.b_theta, m.b_phi, m.f_theta, m.f_phi];
        let scale = oracle.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (g, o) in got.iter().zip(oracle) {
            assert!((g - o).abs() <= 1e-5 * scale, "{g} vs {o}");
        }
    }

    #[test]
    fn mie_and_rayleigh_agree_for_small_spheres() {
        let mut cfg = config(OpticalModel::Rayleigh);
        let perm = Permittivity { grating: Some(Complex64::new(2.25, 0.1)), thermal: None };
        let p = Particle::from_amu(1e4, 2329.0, perm).unwrap();
        let ray = OpticalResponse::new(&cfg, &p).unwrap();
        cfg.optical_model = OpticalModel::Mie;
        let mie = OpticalResponse::new(&cfg, &p).unwrap();
        assert!((ray.f0 / mie.f0 - 1.0).abs() < 1e-3);
        assert!((ray.sigma_abs / mie.sigma_abs - 1.0).abs() < 1e-2);
    }

    #[test]
    fn non_positive_force_factor_is_invalid_material() {
        let cfg = config(OpticalModel::Rayleigh);
        let mut p = particle();
        p.permittivity.grating = Some(Complex64::new(0.5, 0.0));
        assert!(matches!(GratingInteraction::new(&cfg, &p), Err(Error::InvalidMaterial(_))));
    }

    #[test]
    fn pulse_round_trip() {
        let cfg = config(OpticalModel::Rayleigh);
        let p = particle();
        let geo = crate::physics::derive_geometry(&cfg, &p).unwrap();
        let (area, energy) = grating_pulse(2.7, &cfg, &p, &geo).unwrap();
        let back = OpticalResponse::new(&cfg, &p).unwrap().phase_for_fluence(energy / area).unwrap();
        assert!((back / 2.7 - 1.0).abs() < 1e-12);
        assert_eq!(grating_pulse(0.0, &cfg, &p, &geo).unwrap().1, 0.0);
    }
}
