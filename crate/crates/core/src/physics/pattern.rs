use super::geometry::DerivedGeometry;
use crate::error::{Error, Result};

// Truncated cosine series may dip below zero; anything beyond this fraction of
// the mean density signals a coefficient error rather than rounding.
const NEGATIVITY_TOLERANCE: f64 = 1e-9;

/// Arrival density `W(x) (m/Z) [1 + 2 sum_{n>=1} R_n A_n cos(n k x)]` over a
/// square window centred on the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FringePattern {
    pub scale: f64,
    pub wavenumber: f64,
    pub half_width: f64,
    /// `R_n A_n` for n = 0..=n_max; the n = 0 entry is not used.
    pub harmonics: Vec<f64>,
}

impl FringePattern {
    pub fn new(geometry: &DerivedGeometry, amplitudes: &[f64], reduction: &[f64], half_width: f64) -> Self {
        let harmonics = amplitudes.iter().zip(reduction).map(|(a, r)| a * r).collect();
        Self { scale: geometry.density_scale(), wavenumber: geometry.wavenumber, half_width, harmonics }
    }

    /// Relative density `1 + 2 sum R_n A_n cos(n k x)` without window or scale.
    pub fn profile(&self, x: f64) -> f64 {
        let mut sum = 0.0;
        for (n, h) in self.harmonics.iter().enumerate().skip(1) {
            sum += h * (n as f64 * self.wavenumber * x).cos();
        }
        1.0 + 2.0 * sum
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        if x.abs() > self.half_width {
            return Ok(0.0);
        }
        let p = self.profile(x);
        if p < -NEGATIVITY_TOLERANCE {
            return Err(Error::NumericalConsistency(format!(
                "fringe density is negative ({p:e} of its mean) at x = {x:e} m; the Talbot series is under-resolved"
            )));
        }
        Ok(self.scale * p.max(0.0))
    }

    /// Fringe visibility of the first harmonic, `2 |R_1 A_1|`.
    pub fn first_harmonic_visibility(&self) -> f64 {
        2.0 * self.harmonics.get(1).copied().unwrap_or(0.0).abs()
    }
}

/// Unnormalised arrival density at `x`.
pub fn pattern_density(
    x: f64,
    geometry: &DerivedGeometry,
    amplitudes: &[f64],
    reduction: &[f64],
    half_width: f64,
) -> Result<f64> {
    FringePattern::new(geometry, amplitudes, reduction, half_width).density(x)
}

/// `samples` equally spaced positions spanning `[-half_width, half_width]`.
pub fn window_grid(half_width: f64, samples: usize) -> Vec<f64> {
    let h = 2.0 * half_width / (samples - 1) as f64;
    (0..samples).map(|i| -half_width + i as f64 * h).collect()
}
