use super::grid::ThetaGrid;
use super::model::GridModel;
use crate::error::{invalid, numerical, Result};

/// A probability density on the grid nodes, normalised with the grid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    pub density: Vec<f64>,
}

impl Prior {
    /// Normalise non-negative node values.
    pub fn from_unnormalized(grid: &ThetaGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() || values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(numerical("prior values must be finite and non-negative, one per node"));
        }
        let mass = grid.integrate(&values);
        if !(mass > 0.0) {
            return Err(invalid("prior has no support on the grid"));
        }
        Ok(Self { density: values.into_iter().map(|v| v / mass).collect() })
    }

    pub fn uniform(grid: &ThetaGrid) -> Self {
        Self::from_unnormalized(grid, vec![1.0; grid.len()]).expect("uniform prior on a non-empty grid")
    }

    /// Normalise from log values, subtracting the maximum first.
    pub fn from_log(grid: &ThetaGrid, log_values: &[f64]) -> Result<Self> {
        let max = log_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(numerical("log prior has no finite maximum"));
        }
        Self::from_unnormalized(grid, log_values.iter().map(|v| (v - max).exp()).collect())
    }
}

/// Maximal data information prior `p(theta) ~ exp(int p(x|theta) ln p(x|theta) dx)`.
pub fn mdip_prior<M: GridModel + ?Sized>(model: &M) -> Result<Prior> {
    let exponents = model.neg_entropies()?;
    if exponents.iter().any(|v| !v.is_finite()) {
        return Err(numerical("non-finite entropy in the MDIP exponent"));
    }
    Prior::from_log(model.grid(), &exponents)
}

/// Upper limits `lambda_c^max(r_c)` from earlier experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionBoundary {
    /// `(r_c, lambda_c^max)` sorted by `r_c`.
    pub points: Vec<(f64, f64)>,
}

impl ExclusionBoundary {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() || points.iter().any(|(r, l)| !(*r > 0.0 && *l > 0.0) || !r.is_finite() || !l.is_finite()) {
            return Err(invalid("boundary needs at least one row of positive (r_c, lambda_c) values"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("boundary has repeated r_c values"));
        }
        Ok(Self { points })
    }

    /// Log-log linear interpolation, flat beyond the first and last rows.
    pub fn lambda_max(&self, r_c: f64) -> f64 {
        let p = &self.points;
        if r_c <= p[0].0 {
            return p[0].1;
        }
        if r_c >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let i = p.partition_point(|q| q.0 <= r_c) - 1;
        let (r0, l0) = p[i];
        let (r1, l1) = p[i + 1];
        let t = (r_c / r0).ln() / (r1 / r0).ln();
        (l0.ln() + t * (l1 / l0).ln()).exp()
    }
}

/// Uniform on the not-yet-excluded region `lambda_c < lambda_c^max(r_c)`.
///
/// Each node is weighted by the fraction of its lambda cell below the
/// boundary, so a boundary between nodes is resolved continuously.
pub fn experimental_prior(grid: &ThetaGrid, boundary: &ExclusionBoundary) -> Result<Prior> {
    let mut values = vec![0.0; grid.len()];
    for node in 0..grid.len() {
        let (i, j) = grid.split(node);
        let (lo, hi) = grid.lambda_cell(i);
        let limit = boundary.lambda_max(grid.r_c[j]);
        values[node] = ((limit - lo) / (hi - lo)).clamp(0.0, 1.0);
    }
    if values.iter().all(|v| *v == 0.0) {
        return Err(invalid("the experimental boundary leaves no allowed region on the grid"));
    }
    Prior::from_unnormalized(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::grid::GridSpec;

    fn grid() -> ThetaGrid {
        ThetaGrid::new(&GridSpec { n_lambda: 30, n_r_c: 20, ..GridSpec::default() }).unwrap()
    }

    #[test]
    fn boundary_at_grid_top_is_uniform() {
        let g = grid();
        let b = ExclusionBoundary::new(vec![(1e-9, 1e-6), (1e-4, 1e-6)]).unwrap();
        let p = experimental_prior(&g, &b).unwrap();
        let u = Prior::uniform(&g);
        for (a, b) in p.density.iter().zip(&u.density) {
            assert!((a / b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_at_grid_bottom_is_an_error() {
        let b = ExclusionBoundary::new(vec![(1e-7, 1e-20)]).unwrap();
        assert!(experimental_prior(&grid(), &b).is_err());
    }

    #[test]
    fn interpolation_is_log_log_and_flat_outside() {
        let b = ExclusionBoundary::new(vec![(1e-8, 1e-10), (1e-6, 1e-6)]).unwrap();
        assert!((b.lambda_max(1e-7) / 1e-8 - 1.0).abs() < 1e-12);
        assert_eq!(b.lambda_max(1e-12), 1e-10);
        assert_eq!(b.lambda_max(1.0), 1e-6);
    }

    #[test]
    fn prior_is_normalised() {
        let g = grid();
        let b = ExclusionBoundary::new(vec![(1e-9, 1e-12), (1e-5, 1e-8)]).unwrap();
        let p = experimental_prior(&g, &b).unwrap();
        assert!((g.integrate(&p.density) - 1.0).abs() < 1e-12);
    }
}
