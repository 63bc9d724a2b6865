//! Far-field Mie amplitudes for a homogeneous sphere (Bohren–Huffman conventions).

use crate::error::{numerical, Result};
use num_complex::Complex64;

/// Expansion coefficients `a_n`, `b_n` for n = 1.. of one sphere.
#[derive(Debug, Clone)]
pub struct MieCoefficients {
    pub size_parameter: f64,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

fn n_stop(x: f64) -> usize {
    (x + 4.0 * x.cbrt() + 2.0).ceil() as usize
}

impl MieCoefficients {
    /// Compute the series for size parameter `x` and relative refractive index `m`.
    ///
    /// Terms are accumulated until they fall below 1e-16 of the leading
    /// coefficient; the order is capped 60 past the Wiscombe estimate.
    pub fn new(x: f64, m: Complex64) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(numerical(format!("size parameter must be positive, got {x:e}")));
        }
        if !(m.re.is_finite() && m.im.is_finite()) || m.norm() == 0.0 {
            return Err(numerical("refractive index must be finite and non-zero"));
        }
        let nstop = n_stop(x);
        let cap = nstop + 60;
        let y = m * x;
        let nmx = cap.max(y.norm().ceil() as usize) + 16;

        // Log-derivatives by downward recurrence, stable for any argument.
        let mut d_y = vec![Complex64::new(0.0, 0.0); nmx + 1];
        let mut d_x = vec![0.0; nmx + 1];
        for n in (1..=nmx).rev() {
            let nf = n as f64;
            d_y[n - 1] = nf / y - 1.0 / (d_y[n] + nf / y);
            d_x[n - 1] = nf / x - 1.0 / (d_x[n] + nf / x);
        }

        let mut psi_prev = x.sin();
        let mut chi_prev = x.cos();
        let mut chi_prev2 = -x.sin();
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut lead = 0.0f64;
        let mut converged = false;
        for n in 1..=cap {
            let nf = n as f64;
            // psi_n / psi_{n-1} = 1 / (D_n(x) + n/x); chi grows and is stable upward.
            let psi = psi_prev / (d_x[n] + nf / x);
            let chi = (2.0 * nf - 1.0) * chi_prev / x - chi_prev2;
            let xi = Complex64::new(psi, -chi);
            let xi_prev = Complex64::new(psi_prev, -chi_prev);
            let ta = d_y[n] / m + nf / x;
            let tb = d_y[n] * m + nf / x;
            let an = (ta * psi - psi_prev) / (ta * xi - xi_prev);
            let bn = (tb * psi - psi_prev) / (tb * xi - xi_prev);
            if !(an.re.is_finite() && an.im.is_finite() && bn.re.is_finite() && bn.im.is_finite()) {
                return Err(numerical(format!("Mie coefficient of order {n} is not finite")));
            }
            a.push(an);
            b.push(bn);
            let size = (2.0 * nf + 1.0) * (an.norm() + bn.norm());
            lead = lead.max(size);
            if n >= nstop && size <= 1e-16 * lead {
                converged = true;
                break;
            }
            psi_prev = psi;
            chi_prev2 = chi_prev;
            chi_prev = chi;
        }
        if !converged {
            let last = a.len() as f64;
            let tail = (2.0 * last + 1.0) * (a[a.len() - 1].norm() + b[b.len() - 1].norm());
            if tail > 1e-12 * lead {
                return Err(numerical(format!(
                    "Mie series did not converge by order {cap}: relative tail {:e}",
                    tail / lead
                )));
            }
        }
        Ok(Self { size_parameter: x, a, b })
    }

    /// Scattering amplitudes `(S1, S2)` at polar angle `theta`.
    pub fn amplitudes(&self, theta: f64) -> (Complex64, Complex64) {
        let mu = theta.cos();
        let mut pi_prev = 0.0;
        let mut pi = 1.0;
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut s2 = Complex64::new(0.0, 0.0);
        for (i, (an, bn)) in self.a.iter().zip(&self.b).enumerate() {
            let n = (i + 1) as f64;
            let tau = n * mu * pi - (n + 1.0) * pi_prev;
            let f = (2.0 * n + 1.0) / (n * (n + 1.0));
            s1 += f * (an * pi + bn * tau);
            s2 += f * (an * tau + bn * pi);
            let next = ((2.0 * n + 1.0) * mu * pi - (n + 1.0) * pi_prev) / n;
            pi_prev = pi;
            pi = next;
        }
        (s1, s2)
    }

    /// Extinction efficiency `Q_ext`.
    pub fn q_ext(&self) -> f64 {
        let x = self.size_parameter;
        let sum: f64 = self
            .a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(i, (a, b))| (2.0 * (i + 1) as f64 + 1.0) * (a + b).re)
            .sum();
        2.0 * sum / (x * x)
    }

    /// Scattering efficiency `Q_sca`.
    pub fn q_sca(&self) -> f64 {
        let x = self.size_parameter;
        let sum: f64 = self
            .a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(i, (a, b))| (2.0 * (i + 1) as f64 + 1.0) * (a.norm_sqr() + b.norm_sqr()))
            .sum();
        2.0 * sum / (x * x)
    }
}

/// Mie amplitudes `(S1, S2)` at angle `theta` for size parameter `x` and index `m`.
pub fn mie_amplitudes(theta: f64, x: f64, m: Complex64) -> Result<(Complex64, Complex64)> {
    Ok(MieCoefficients::new(x, m)?.amplitudes(theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm()
    }

    // Reference values from a 40-digit mpmath evaluation of the full series.
    #[test]
    fn matches_high_precision_series_small_sphere() {
        let mie = MieCoefficients::new(0.5, c(1.5, 0.0)).unwrap();
        let cases = [
            (0.0, c(9.104_142_647_246_597e-4, -3.908_445_674_592_613e-2), c(9.104_142_647_246_597e-4, -3.908_445_674_592_613e-2)),
            (PI / 6.0, c(9.102_251_170_318_804e-4, -3.878_664_148_466_591e-2), c(7.884_869_510_974_716e-4, -3.370_497_828_822_616e-2)),
            (PI / 2.0, c(9.090_026_284_788_1e-4, -3.689_719_821_993_944e-2), c(8.353_828_425_554_775e-7, -4.495_636_849_423_521e-4)),
            (2.0 * PI / 3.0, c(9.082_969_674_039_63e-4, -3.583_405_687_406_913e-2), c(-4.535_220_000_433_165e-4, 1.758_390_260_435_195e-2)),
            (PI, c(9.075_914_110_195_31e-4, -3.479_085_578_328_801e-2), c(-9.075_914_110_195_31e-4, 3.479_085_578_328_801e-2)),
        ];
        for (theta, s1, s2) in cases {
            let (a1, a2) = mie.amplitudes(theta);
            assert!(close(a1, s1, 1e-11), "S1 at {theta}: {a1} vs {s1}");
            assert!(close(a2, s2, 1e-9), "S2 at {theta}: {a2} vs {s2}");
        }
    }

    #[test]
    fn matches_high_precision_series_absorbing_sphere() {
        let (s1, s2) = mie_amplitudes(PI / 3.0, 2.0, c(1.5, 0.1)).unwrap();
        assert!(close(s1, c(1.184_695_390_459_142_4, -0.935_820_011_868_075_3), 1e-11));
        assert!(close(s2, c(1.064_992_661_415_842_9, -0.405_028_371_047_092_6), 1e-11));
    }

    #[test]
    fn rayleigh_limit() {
        let m = c(1.5, 0.02);
        let x: f64 = 1e-3;
        let eps = m * m;
        let s_rayleigh = -Complex64::i() * x.powi(3) * (eps - 1.0) / (eps + 2.0);
        for theta in [0.0, 0.4, 1.2, PI / 2.0, 2.5] {
            let (s1, s2) = mie_amplitudes(theta, x, m).unwrap();
            assert!(close(s1, s_rayleigh, 1e-4));
            if theta != PI / 2.0 {
                assert!(close(s2, s_rayleigh * theta.cos(), 1e-4));
            } else {
                assert!(s2.norm() / s1.norm() < 1e-6);
            }
        }
        let (f1, f2) = mie_amplitudes(0.0, x, m).unwrap();
        assert!(close(f1, f2, 1e-14));
    }

    #[test]
    fn optical_theorem_for_lossless_sphere() {
        let mie = MieCoefficients::new(3.0, c(1.33, 0.0)).unwrap();
        assert!((mie.q_ext() / mie.q_sca() - 1.0).abs() < 1e-12);
        let (s0, _) = mie.amplitudes(0.0);
        assert!((4.0 * s0.re / (3.0 * 3.0) / mie.q_ext() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_sphere_converges() {
        let mie = MieCoefficients::new(60.0, c(3.5, 0.01)).unwrap();
        assert!(mie.q_ext() > 1.5 && mie.q_ext() < 3.0);
    }
}
