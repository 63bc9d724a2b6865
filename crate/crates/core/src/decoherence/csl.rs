//! Continuous spontaneous localisation for a homogeneous sphere.

use crate::constants::ATOMIC_MASS;
use crate::error::{invalid, Result};
use crate::physics::{DerivedGeometry, Particle};
use crate::quadrature::{integrate_over, Tolerance};
use crate::special::{one_minus_si_ratio, spherical_j1};
use std::f64::consts::PI;

/// Upper limit of the Gaussian-weighted integrals; `exp(-144)` is negligible.
const ALPHA_MAX: f64 = 12.0;

/// CSL parameters `(lambda_c, r_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CslParams {
    /// Collapse rate, s^-1.
    pub lambda: f64,
    /// Localisation length, m.
    pub r_c: f64,
}

impl CslParams {
    pub fn new(lambda: f64, r_c: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("collapse rate must be non-negative, got {lambda:e}")));
        }
        if !(r_c > 0.0 && r_c.is_finite()) {
            return Err(invalid(format!("localisation length must be positive, got {r_c:e}")));
        }
        Ok(Self { lambda, r_c })
    }

    /// The no-collapse hypothesis.
    pub fn none() -> Self {
        Self { lambda: 0.0, r_c: 1e-7 }
    }
}

fn tolerance() -> Tolerance {
    Tolerance { abs: 0.0, rel: 1e-12, max_panels: 20_000 }
}

// Zeros of j1 (roots of tan z = z) mapped into alpha, used as panel breaks
// once the integrand oscillates.
fn breakpoints(ratio: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    if ratio > 5.0 {
        let mut k = 1.0;
        loop {
            let mut z = (k + 0.5) * PI - 1.0 / ((k + 0.5) * PI);
            for _ in 0..8 {
                let g = z.sin() - z * z.cos();
                z -= g / (z * z.sin());
            }
            let alpha = z / ratio;
            if alpha >= ALPHA_MAX {
                break;
            }
            breaks.push(alpha);
            k += 1.0;
        }
    }
    breaks.push(ALPHA_MAX);
    breaks
}

/// `int_0^inf exp(-a^2) j1(a R/r_c)^2 da` as a function of `R/r_c`.
pub fn csl_form_integral(ratio: f64) -> Result<f64> {
    let f = |a: f64| (-a * a).exp() * spherical_j1(a * ratio).powi(2);
    integrate_over(&f, &breakpoints(ratio), tolerance())
}

/// `(36/sqrt(pi)) (m/m0)^2 (r_c/R)^2`, the prefactor of the sphere rate.
fn prefactor(particle: &Particle, r_c: f64) -> f64 {
    let mass_ratio = particle.mass() / ATOMIC_MASS;
    36.0 / PI.sqrt() * mass_ratio.powi(2) * (r_c / particle.radius()).powi(2)
}

/// Localisation rate `Gamma_CSL` of the sphere.
pub fn csl_rate(theta: CslParams, particle: &Particle) -> Result<f64> {
    if theta.lambda == 0.0 {
        return Ok(0.0);
    }
    Ok(theta.lambda * rate_per_lambda(theta.r_c, particle)?)
}

/// `Gamma_CSL / lambda_c`, independent of the collapse rate.
pub fn rate_per_lambda(r_c: f64, particle: &Particle) -> Result<f64> {
    let ratio = particle.radius() / r_c;
    Ok(prefactor(particle, r_c) * csl_form_integral(ratio)?)
}

/// `1 - f(x)` computed directly so small separations keep full precision.
pub fn csl_one_minus_resolution(x: f64, r_c: f64, particle: &Particle) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let ratio = particle.radius() / r_c;
    let scaled = x.abs() / r_c;
    let norm = csl_form_integral(ratio)?;
    let g = |a: f64| (-a * a).exp() * spherical_j1(a * ratio).powi(2) * one_minus_si_ratio(a * scaled);
    Ok(integrate_over(&g, &breakpoints(ratio), tolerance())? / norm)
}

/// Resolution function `f(x)` of the sphere; `f(0) = 1`.
pub fn csl_resolution(x: f64, theta: CslParams, particle: &Particle) -> Result<f64> {
    Ok(1.0 - csl_one_minus_resolution(x, theta.r_c, particle)?)
}

/// Point-particle resolution `sqrt(pi) (r_c/x) erf(x / 2 r_c)`.
pub fn point_like_resolution(x: f64, r_c: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    PI.sqrt() * r_c / x * crate::special::erf(x / (2.0 * r_c))
}

/// CSL quantities at one `r_c` that do not depend on `lambda_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CslColumn {
    pub r_c: f64,
    pub rate_per_lambda: f64,
    /// `1 - f(x_n)` at the order-n separations, n = 0..=n_max.
    pub one_minus_f: Vec<f64>,
    /// `t1 + t2`.
    pub total_time: f64,
}

impl CslColumn {
    pub fn new(r_c: f64, particle: &Particle, geometry: &DerivedGeometry, n_max: usize) -> Result<Self> {
        let rate_per_lambda = rate_per_lambda(r_c, particle)?;
        let one_minus_f = (0..=n_max)
            .map(|n| csl_one_minus_resolution(geometry.separation(n), r_c, particle))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { r_c, rate_per_lambda, one_minus_f, total_time: geometry.total_time() })
    }

    /// `-ln R_n` per unit collapse rate.
    pub fn exponent_per_lambda(&self, n: usize) -> f64 {
        self.rate_per_lambda * self.one_minus_f[n] * self.total_time
    }

    pub fn reduction(&self, n: usize, lambda: f64) -> f64 {
        if n == 0 || lambda == 0.0 {
            return 1.0;
        }
        (-lambda * self.exponent_per_lambda(n)).exp()
    }
}

/// `R_n` of the CSL channel at the order-n separation `n h t2 / (m D)`.
pub fn csl_reduction(n: usize, theta: CslParams, particle: &Particle, geometry: &DerivedGeometry) -> Result<f64> {
    if n == 0 || theta.lambda == 0.0 {
        return Ok(1.0);
    }
    let gamma = csl_rate(theta, particle)?;
    let omf = csl_one_minus_resolution(geometry.separation(n), theta.r_c, particle)?;
    Ok((-gamma * omf * geometry.total_time()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::Permittivity;

    fn sphere() -> Particle {
        Particle::from_amu(1e8, 2329.0, Permittivity::default()).unwrap()
    }

    #[test]
    fn form_integral_matches_oracle() {
        // 40-digit reference values
        assert!((csl_form_integral(1.0).unwrap() / 0.037_153_239_537_718_242 - 1.0).abs() < 1e-11);
        assert!((csl_form_integral(5.0).unwrap() / 0.070_215_986_822_022_37 - 1.0).abs() < 1e-11);
    }

    #[test]
    fn form_integral_matches_dense_trapezoid() {
        let ratio = 1.0;
        let n = 1_000_000;
        let h = ALPHA_MAX / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let a = i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            sum += w * (-a * a).exp() * spherical_j1(a * ratio).powi(2);
        }
        assert!((csl_form_integral(ratio).unwrap() / (sum * h) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn resolution_matches_oracle() {
        let p = sphere();
        let r_c = p.radius();
        let v = csl_one_minus_resolution(r_c, r_c, &p).unwrap();
        assert!((v / 0.064_644_504_467_539_986 - 1.0).abs() < 1e-10);
        let r_c = p.radius() / 0.3;
        let v = csl_one_minus_resolution(2.0 * r_c, r_c, &p).unwrap();
        assert!((v / 0.249_790_908_945_048_59 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn point_like_limit() {
        let p = sphere();
        let r_c = p.radius() * 1e3;
        let theta = CslParams::new(1e-16, r_c).unwrap();
        let gamma = csl_rate(theta, &p).unwrap();
        assert!((gamma - 1.0).abs() < 1e-3);
        let f = csl_resolution(2.0 * r_c, theta, &p).unwrap();
        assert!((f / 0.746_824_132_812_427 - 1.0).abs() < 1e-3);
        assert!((point_like_resolution(2.0 * r_c, r_c) - 0.746_824_132_812_427).abs() < 1e-14);
    }

    #[test]
    fn limits_of_the_resolution() {
        let p = sphere();
        let theta = CslParams::new(1e-10, 1e-7).unwrap();
        assert_eq!(csl_resolution(0.0, theta, &p).unwrap(), 1.0);
        assert!(csl_resolution(1e-4, theta, &p).unwrap() < 1e-2);
        assert_eq!(csl_rate(CslParams::new(0.0, 1e-7).unwrap(), &p).unwrap(), 0.0);
    }

    #[test]
    fn large_sphere_uses_panel_breaks() {
        let v = csl_form_integral(40.0).unwrap();
        let n = 400_000;
        let h = ALPHA_MAX / n as f64;
        let simpson: f64 = (0..=n)
            .map(|i| {
                let a = i as f64 * h;
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w * (-a * a).exp() * spherical_j1(a * 40.0).powi(2)
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((v / simpson - 1.0).abs() < 1e-9);
    }
}
