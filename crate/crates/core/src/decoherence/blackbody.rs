//! Thermal photon absorption, emission and Rayleigh scattering.

use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT};
use crate::error::{numerical, Result};
use crate::quadrature::gauss_legendre;
use crate::special::{one_minus_scattering_kernel, one_minus_si_ratio};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Which thermal process a channel describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermalProcess {
    Absorption,
    Emission,
    Scattering,
}

// Wien peak of the spectral photon energy density in wavenumber.
const WIEN: f64 = 2.821_439_372_122_078_8;
const BAND: f64 = 500.0;
const PANELS: usize = 96;
const ORDER: usize = 16;

/// Rate and normalised spectral weights of one thermal channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSpectrum {
    pub process: ThermalProcess,
    pub temperature: f64,
    /// Total event rate, s^-1.
    pub rate: f64,
    /// Quadrature wavenumbers and `gamma(k) dk / Gamma` weights.
    nodes: Vec<(f64, f64)>,
}

/// `zeta(7)`
const ZETA7: f64 = 1.008_349_277_381_922_8;

impl ThermalSpectrum {
    /// Spectrum for susceptibility `chi` (m^3) at temperature `t`.
    ///
    /// The spectral rate is `c (k/pi)^2 sigma(k) / (exp(hbar c k / k_B T) - 1)`
    /// with `sigma = k Im chi` for absorption and emission and
    /// `k^4 |chi|^2 / 6 pi` for scattering.
    pub fn new(process: ThermalProcess, temperature: f64, chi: Complex64) -> Result<Self> {
        let empty = Self { process, temperature, rate: 0.0, nodes: Vec::new() };
        if temperature <= 0.0 {
            return Ok(empty);
        }
        let a = HBAR * SPEED_OF_LIGHT / (BOLTZMANN * temperature);
        let sigma = |k: f64| match process {
            ThermalProcess::Absorption | ThermalProcess::Emission => k * chi.im,
            ThermalProcess::Scattering => k.powi(4) * chi.norm_sqr() / (6.0 * PI),
        };
        let closed = match process {
            ThermalProcess::Absorption | ThermalProcess::Emission => {
                SPEED_OF_LIGHT * chi.im * PI * PI / (15.0 * a.powi(4))
            }
            ThermalProcess::Scattering => {
                SPEED_OF_LIGHT * chi.norm_sqr() * 720.0 * ZETA7 / (6.0 * PI.powi(3) * a.powi(7))
            }
        };
        if closed == 0.0 {
            return Ok(empty);
        }
        let spectral = |k: f64| SPEED_OF_LIGHT * (k / PI).powi(2) * sigma(k) / (a * k).exp_m1();

        let k_peak = WIEN / a;
        let (lo, hi) = ((k_peak / BAND).ln(), (k_peak * BAND).ln());
        let (gx, gw) = gauss_legendre(ORDER);
        let step = (hi - lo) / PANELS as f64;
        let mut nodes = Vec::with_capacity(PANELS * ORDER);
        let mut rate = 0.0;
        for p in 0..PANELS {
            let c = lo + (p as f64 + 0.5) * step;
            for (x, w) in gx.iter().zip(&gw) {
                let k = (c + 0.5 * step * x).exp();
                let weight = 0.5 * step * w * k * spectral(k);
                rate += weight;
                nodes.push((k, weight));
            }
        }
        let truncation = (rate / closed - 1.0).abs();
        if truncation > 1e-6 {
            return Err(numerical(format!(
                "thermal band integral deviates from the full-spectrum rate by {truncation:e}"
            )));
        }
        for node in &mut nodes {
            node.1 /= rate;
        }
        Ok(Self { process, temperature, rate, nodes })
    }

    /// `1 - f(x)`, normalised so that `f(0) = 1`.
    pub fn one_minus_resolution(&self, x: f64) -> f64 {
        if x == 0.0 || self.nodes.is_empty() {
            return 0.0;
        }
        let kernel: fn(f64) -> f64 = match self.process {
            ThermalProcess::Scattering => one_minus_scattering_kernel,
            _ => one_minus_si_ratio,
        };
        self.nodes.iter().map(|&(k, w)| w * kernel(k * x)).sum()
    }

    pub fn resolution(&self, x: f64) -> f64 {
        1.0 - self.one_minus_resolution(x)
    }
}
