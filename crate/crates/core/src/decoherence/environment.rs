//! Gas collisions and detector blur.

use crate::constants::BOLTZMANN;
use std::f64::consts::PI;

/// Hard-sphere collision rate `n_g v_mean sigma` with `n_g = P / k_B T`.
pub fn collision_rate(pressure: f64, temperature: f64, gas_mass: f64, cross_section: f64) -> f64 {
    if pressure == 0.0 {
        return 0.0;
    }
    let density = pressure / (BOLTZMANN * temperature);
    let mean_speed = (8.0 * BOLTZMANN * temperature / (PI * gas_mass)).sqrt();
    density * mean_speed * cross_section
}

/// Gaussian blur attenuation `exp[-(2 pi n sigma_m / D)^2 / 2]`.
pub fn measurement_reduction(n: usize, sigma_m: f64, period: f64) -> f64 {
    let q = 2.0 * PI * n as f64 * sigma_m / period;
    (-0.5 * q * q).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ATOMIC_MASS, HPA};

    #[test]
    fn collision_rate_matches_oracle() {
        let radius = 2.572_351_621_771_293_7e-8;
        let rate = collision_rate(1e-15 * HPA, 20.0, 2.016 * ATOMIC_MASS, PI * radius * radius);
        assert!((rate / 3.450_278_440_798_958_8e-4 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn blur_matches_oracle() {
        let r = measurement_reduction(1, 10e-9, 265.5e-9);
        assert!((r - 0.972_385_692_295_068_5).abs() < 1e-15);
        assert_eq!(measurement_reduction(3, 0.0, 1e-7), 1.0);
    }

    #[test]
    fn blur_equals_gaussian_convolution() {
        // density 1 + 2 sum c_n cos(n k x), convolved with a normalised Gaussian
        let period = 265.5e-9;
        let k = 2.0 * PI / period;
        let sigma = 12e-9;
        let coeffs = [0.0, 0.3, -0.12, 0.05, 0.02];
        let profile = |x: f64, blur: bool| {
            1.0 + 2.0
                * coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(n, c)| {
                        let r = if blur { measurement_reduction(n, sigma, period) } else { 1.0 };
                        c * r * (n as f64 * k * x).cos()
                    })
                    .sum::<f64>()
        };
        let steps = 4000;
        let span = 12.0 * sigma;
        let h = 2.0 * span / steps as f64;
        let mut worst = 0.0f64;
        for i in 0..50 {
            let x = i as f64 * period / 50.0;
            let mut conv = 0.0;
            for j in 0..=steps {
                let u = -span + j as f64 * h;
                let w = if j == 0 || j == steps { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
                let g = (-0.5 * (u / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt());
                conv += w * g * profile(x - u, false);
            }
            conv *= h / 3.0;
            worst = worst.max((conv - profile(x, true)).abs());
        }
        assert!(worst < 1e-6, "{worst}");
    }
}
