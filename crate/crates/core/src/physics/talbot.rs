//! Generalised Talbot coefficients and the fringe amplitudes built from them.

use super::geometry::DerivedGeometry;
use super::grating::{GratingInteraction, MaskTerms};
use crate::error::{numerical, Error, Result};
use crate::special::bessel_j_orders;
use std::f64::consts::PI;

const MAX_TERMS: usize = 1 << 12;

fn truncation(m: &MaskTerms) -> usize {
    let k = 4.0 * (m.zeta_coh.abs() + m.zeta_abs.abs() + m.a().abs() + m.b().abs());
    (k.ceil() as usize).max(20)
}

/// `J_m(x)` for `m` in `lo..=hi`, indexed from `lo`.
fn bessel_range(x: f64, lo: i64, hi: i64) -> Vec<f64> {
    let top = lo.unsigned_abs().max(hi.unsigned_abs()) as usize;
    let pos = bessel_j_orders(x, top);
    (lo..=hi)
        .map(|m| {
            let v = pos[m.unsigned_abs() as usize];
            if m < 0 && m % 2 != 0 {
                -v
            } else {
                v
            }
        })
        .collect()
}

// Sum over |k| <= K of J_k(b) c_{n+k}, growing K until the outermost pair is negligible.
fn bessel_sum<C>(n: i64, masks: &MaskTerms, k_start: usize, coefficients: C) -> Result<f64>
where
    C: Fn(i64, i64) -> Result<Vec<f64>>,
{
    let b = masks.b();
    let mut kk = k_start;
    loop {
        let k = kk as i64;
        let jb = bessel_range(b, -k, k);
        let c = coefficients(n - k, n + k)?;
        let term = |i: i64| jb[(i + k) as usize] * c[(i + k) as usize];
        // Fixed order: outermost terms first so the small ones are not swamped.
        let mut sum = 0.0;
        for i in (1..=k).rev() {
            sum += term(i) + term(-i);
        }
        sum += term(0);
        let edge = term(k).abs() + term(-k).abs();
        if !sum.is_finite() {
            return Err(numerical(format!("Talbot coefficient of order {n} is not finite")));
        }
        if edge < 1e-12 {
            return Ok(sum);
        }
        if kk >= MAX_TERMS {
            return Err(numerical(format!(
                "Bessel sum for order {n} did not converge with {kk} terms (edge {edge:e})"
            )));
        }
        kk *= 2;
    }
}

/// `B~_n` from the closed Bessel-sum formula.
///
/// The formula raises `(u + v) / (u - v)` to half-integer powers, with
/// `u = zeta_coh` and `v = a + zeta_abs`, and takes `sqrt(u^2 - v^2)`; when
/// `|u| <= |v|` (other than `u = v = 0`) it is undefined and
/// [`Error::FormulaDomain`] is returned.
pub fn talbot_coefficient(n: i64, masks: &MaskTerms) -> Result<f64> {
    talbot_coefficient_with(n, masks, truncation(masks))
}

pub(crate) fn talbot_coefficient_with(n: i64, masks: &MaskTerms, k_start: usize) -> Result<f64> {
    let envelope = (masks.f() - masks.zeta_abs).exp();
    let u = masks.zeta_coh;
    let v = masks.a() + masks.zeta_abs;
    if u == 0.0 && v == 0.0 {
        return Ok(envelope * crate::special::bessel_j(-n, masks.b()));
    }
    let base = (u + v) / (u - v);
    let gap = u.abs() - v.abs();
    if !(gap > 1e-8 * (u.abs() + v.abs())) || !base.is_finite() {
        return Err(Error::FormulaDomain { order: n, base, exponent: 0.5 * (n as f64 + 1.0) });
    }
    let root = base.sqrt();
    let z = (u - v).signum() * (u * u - v * v).sqrt();
    let sum = bessel_sum(n, masks, k_start, |lo, hi| {
        let j = bessel_range(z, lo, hi);
        let out: Vec<f64> = (lo..=hi).zip(j).map(|(m, jm)| root.powi(m as i32) * jm).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(numerical(format!("power of {base:e} overflowed for order {n}")));
        }
        Ok(out)
    })?;
    Ok(envelope * sum)
}

/// Fourier coefficients `(1/2pi) int exp(i u sin t + v cos t - i m t) dt` for
/// `m` in `lo..=hi`.
///
/// These equal `((u+v)/(u-v))^(m/2) J_m(sqrt(u^2 - v^2))` wherever that
/// expression is defined and continue it analytically elsewhere.
pub fn phase_mask_fourier(u: f64, v: f64, lo: i64, hi: i64) -> Result<Vec<f64>> {
    let reach = lo.unsigned_abs().max(hi.unsigned_abs()) as f64 + u.abs() + v.abs();
    if !(reach < (1u64 << 19) as f64) {
        return Err(numerical(format!("grating mask too strong for a Fourier expansion (u = {u:e}, v = {v:e})")));
    }
    let mut nodes = ((2.0 * reach + 64.0) as usize).next_power_of_two();
    let mut prev = fourier_at(u, v, lo, hi, nodes);
    let scale = v.abs().exp();
    loop {
        nodes *= 2;
        let next = fourier_at(u, v, lo, hi, nodes);
        let change = prev.iter().zip(&next).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if change <= 1e-14 * scale {
            return Ok(next);
        }
        if nodes > 1 << 20 {
            return Err(numerical("Fourier series of the grating mask did not converge"));
        }
        prev = next;
    }
}

fn fourier_at(u: f64, v: f64, lo: i64, hi: i64, nodes: usize) -> Vec<f64> {
    let h = 2.0 * PI / nodes as f64;
    let samples: Vec<(f64, f64)> = (0..nodes)
        .map(|j| {
            let t = j as f64 * h;
            ((v * t.cos()).exp(), u * t.sin())
        })
        .collect();
    (lo..=hi)
        .map(|m| {
            let mut acc = 0.0;
            for (j, (r, phase)) in samples.iter().enumerate() {
                acc += r * (phase - m as f64 * j as f64 * h).cos();
            }
            acc / nodes as f64
        })
        .collect()
}

/// `B~_n`, falling back to the Fourier form of the same series when the
/// closed formula is outside its domain. The flag reports the fallback.
pub fn talbot_coefficient_continued(n: i64, masks: &MaskTerms) -> Result<(f64, bool)> {
    match talbot_coefficient(n, masks) {
        Ok(v) => Ok((v, false)),
        Err(Error::FormulaDomain { .. }) => {
            let u = masks.zeta_coh;
            let v = masks.a() + masks.zeta_abs;
            let envelope = (masks.f() - masks.zeta_abs).exp();
            let sum = bessel_sum(n, masks, truncation(masks), |lo, hi| phase_mask_fourier(u, v, lo, hi))?;
            Ok((envelope * sum, true))
        }
        Err(e) => Err(e),
    }
}

/// Talbot coefficients and the mask terms they were computed from.
#[derive(Debug, Clone)]
pub struct TalbotSpectrum {
    /// `A_n` for n = 0..=n_max.
    pub amplitudes: Vec<f64>,
    /// `B~_n` at the order's own shear.
    pub raw: Vec<f64>,
    pub masks: Vec<MaskTerms>,
    /// Orders whose coefficient needed the Fourier continuation.
    pub continued_orders: Vec<usize>,
}

impl TalbotSpectrum {
    pub fn compute(geometry: &DerivedGeometry, grating: &GratingInteraction, n_max: usize) -> Result<Self> {
        let mut out = Self {
            amplitudes: Vec::with_capacity(n_max + 1),
            raw: Vec::with_capacity(n_max + 1),
            masks: Vec::with_capacity(n_max + 1),
            continued_orders: Vec::new(),
        };
        for n in 0..=n_max {
            let masks = grating.mask_terms(geometry.shear(n))?;
            let (b, continued) = talbot_coefficient_continued(n as i64, &masks)?;
            if continued {
                out.continued_orders.push(n);
            }
            out.raw.push(b);
            out.masks.push(masks);
        }
        out.amplitudes = fringe_amplitudes(geometry, &out.raw);
        Ok(out)
    }
}

/// `A_n = B~_n exp[-2 (n pi sigma_x t2 / (D t1))^2]`.
pub fn fringe_amplitudes(geometry: &DerivedGeometry, raw: &[f64]) -> Vec<f64> {
    raw.iter()
        .enumerate()
        .map(|(n, b)| if n == 0 { *b } else { b * geometry.thermal_factor(n) })
        .collect()
}
