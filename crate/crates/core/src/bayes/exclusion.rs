//! Constant-decoherence-strength exclusion lines.

use super::grid::ThetaGrid;
use super::posterior::PosteriorGrid;
use crate::decoherence::CslColumn;
use crate::error::{invalid, Error, Result};
use crate::physics::DerivedGeometry;

/// Curve below which a given fraction of posterior mass lies.
#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionCurve {
    /// Decoherence strength on the curve, s^-1 m^-2.
    pub strength: f64,
    pub confidence: f64,
    /// Posterior mass below the curve.
    pub mass: f64,
    /// `(r_c, lambda_c)` at the grid's `r_c` nodes.
    pub points: Vec<(f64, f64)>,
}

/// `lambda_c` on the line of constant strength `Lambda` at each column:
/// `lambda_c = Lambda (kappa d)^2 / (3 Gamma_1 [1 - f(x_1)])` with `Gamma_1` the
/// rate per unit collapse rate and `x_1` the first-order separation.
pub struct StrengthLine {
    scale: Vec<f64>,
}

impl StrengthLine {
    pub fn new(columns: &[CslColumn], geometry: &DerivedGeometry) -> Result<Self> {
        let kd2 = (geometry.kappa * geometry.pitch).powi(2);
        let scale = columns
            .iter()
            .map(|c| {
                let denominator = 3.0 * c.rate_per_lambda * c.one_minus_f.get(1).copied().unwrap_or(0.0);
                if denominator > 0.0 {
                    Ok(kd2 / denominator)
                } else {
                    Err(invalid(format!("CSL produces no first-order decoherence at r_c = {:e} m", c.r_c)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { scale })
    }

    pub fn lambda(&self, strength: f64, column: usize) -> f64 {
        strength * self.scale[column]
    }

    /// Posterior mass with `lambda_c` below the line, resolving partial cells.
    pub fn mass_below(&self, grid: &ThetaGrid, posterior: &PosteriorGrid, strength: f64) -> f64 {
        let mut mass = 0.0;
        for j in 0..grid.n_r_c() {
            let limit = self.lambda(strength, j);
            let (r_lo, r_hi) = grid.r_c_cell(j);
            for i in 0..grid.n_lambda() {
                let (lo, hi) = grid.lambda_cell(i);
                if limit <= lo {
                    break;
                }
                let covered = limit.min(hi) - lo;
                mass += posterior.density[j * grid.n_lambda() + i] * covered * (r_hi - r_lo);
            }
        }
        mass
    }
}

/// Find the strength whose line holds `confidence` of the posterior mass:
/// geometric bracketing, then bisection in `ln Lambda`.
pub fn exclusion_line(
    grid: &ThetaGrid,
    posterior: &PosteriorGrid,
    columns: &[CslColumn],
    geometry: &DerivedGeometry,
    confidence: f64,
) -> Result<ExclusionCurve> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let line = StrengthLine::new(columns, geometry)?;
    let mass = |s: f64| line.mass_below(grid, posterior, s);

    // start where the line crosses the grid centre
    let mid = grid.n_r_c() / 2;
    let centre = (grid.lambda[0] * grid.lambda[grid.n_lambda() - 1]).sqrt();
    let mut lo = centre / line.scale[mid];
    let mut hi = lo;
    let (mut m_lo, mut m_hi) = (mass(lo), mass(hi));
    let mut steps = 0;
    while m_lo > confidence && steps < 200 {
        lo /= 10.0;
        m_lo = mass(lo);
        steps += 1;
    }
    steps = 0;
    while m_hi < confidence && steps < 200 {
        hi *= 10.0;
        m_hi = mass(hi);
        steps += 1;
    }
    let bracket_error =
        |lo: f64, m_lo: f64, hi: f64, m_hi: f64| Error::Bracketing { strength_low: lo, mass_low: m_lo, strength_high: hi, mass_high: m_hi };
    if !(m_lo <= confidence && m_hi >= confidence) {
        return Err(bracket_error(lo, m_lo, hi, m_hi));
    }
    for _ in 0..200 {
        if (m_hi - confidence).abs() < 1e-4 || hi / lo - 1.0 < 1e-12 {
            break;
        }
        let m = (lo * hi).sqrt();
        let v = mass(m);
        if v < confidence {
            lo = m;
            m_lo = v;
        } else {
            hi = m;
            m_hi = v;
        }
    }
    // report whichever end is closer to the target
    let (strength, achieved) = if (m_lo - confidence).abs() < (m_hi - confidence).abs() { (lo, m_lo) } else { (hi, m_hi) };
    if (achieved - confidence).abs() > 0.005 {
        return Err(bracket_error(lo, m_lo, hi, m_hi));
    }
    let points = (0..grid.n_r_c()).map(|j| (grid.r_c[j], line.lambda(strength, j))).collect();
    Ok(ExclusionCurve { strength, confidence, mass: achieved, points })
}

/// Interpolate the curve at `r_c` in log-log coordinates.
pub fn lambda_at_rc(curve: &ExclusionCurve, r_c: f64) -> Result<f64> {
    let p = &curve.points;
    let (first, last) = (p[0].0, p[p.len() - 1].0);
    if !(r_c >= first && r_c <= last) {
        return Err(Error::Range { value: r_c, min: first, max: last });
    }
    if let Some(q) = p.iter().find(|q| q.0 == r_c) {
        return Ok(q.1);
    }
    let i = p.partition_point(|q| q.0 <= r_c) - 1;
    let (r0, l0) = p[i];
    let (r1, l1) = p[i + 1];
    let t = (r_c / r0).ln() / (r1 / r0).ln();
    Ok((l0.ln() + t * (l1 / l0).ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_contract() {
        let curve = ExclusionCurve {
            strength: 1.0,
            confidence: 0.95,
            mass: 0.95,
            points: vec![(1e-8, 1e-10), (1e-7, 1e-9), (1e-6, 1e-5)],
        };
        assert_eq!(lambda_at_rc(&curve, 1e-7).unwrap(), 1e-9);
        let mid = lambda_at_rc(&curve, (1e-7f64 * 1e-6).sqrt()).unwrap();
        assert!((mid / 1e-7 - 1.0).abs() < 1e-12);
        assert!(matches!(lambda_at_rc(&curve, 1e-3), Err(Error::Range { .. })));
    }
}
