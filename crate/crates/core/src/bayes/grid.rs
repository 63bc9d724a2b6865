use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Bounds and resolution of the `(lambda_c, r_c)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub r_c_min: f64,
    pub r_c_max: f64,
    pub n_lambda: usize,
    pub n_r_c: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { lambda_min: 1e-20, lambda_max: 1e-6, r_c_min: 1e-9, r_c_max: 1e-4, n_lambda: 120, n_r_c: 120 }
    }
}

/// Log-spaced nodes over the `(lambda_c, r_c)` plane.
///
/// Densities are with respect to the linear parameters. Each node carries
/// the linear measure of its cell; cell edges sit at the geometric midpoints
/// between nodes and at the axis bounds, so the weights tile the rectangle
/// exactly. Node `i_r * n_lambda + i_lambda` holds `(lambda[i_lambda], r_c[i_r])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaGrid {
    pub lambda: Vec<f64>,
    pub r_c: Vec<f64>,
    lambda_edges: Vec<f64>,
    r_c_edges: Vec<f64>,
    weights: Vec<f64>,
}

fn log_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(lo * hi).sqrt()];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

fn edges(nodes: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut e = Vec::with_capacity(nodes.len() + 1);
    e.push(lo);
    for w in nodes.windows(2) {
        e.push((w[0] * w[1]).sqrt());
    }
    e.push(hi);
    e
}

impl ThetaGrid {
    pub fn new(spec: &GridSpec) -> Result<Self> {
        let ok = |lo: f64, hi: f64| lo > 0.0 && hi > lo && hi.is_finite();
        if !ok(spec.lambda_min, spec.lambda_max) || !ok(spec.r_c_min, spec.r_c_max) {
            return Err(invalid("grid bounds must be positive, finite and increasing"));
        }
        if spec.n_lambda < 2 || spec.n_r_c < 2 {
            return Err(invalid("grid needs at least two nodes per axis"));
        }
        let lambda = log_axis(spec.lambda_min, spec.lambda_max, spec.n_lambda);
        let r_c = log_axis(spec.r_c_min, spec.r_c_max, spec.n_r_c);
        let lambda_edges = edges(&lambda, spec.lambda_min, spec.lambda_max);
        let r_c_edges = edges(&r_c, spec.r_c_min, spec.r_c_max);
        let mut weights = Vec::with_capacity(lambda.len() * r_c.len());
        for r in r_c_edges.windows(2) {
            for l in lambda_edges.windows(2) {
                weights.push((l[1] - l[0]) * (r[1] - r[0]));
            }
        }
        Ok(Self { lambda, r_c, lambda_edges, r_c_edges, weights })
    }

    /// Arbitrary nodes with explicit weights, for small test problems.
    pub fn from_nodes(lambda: Vec<f64>, r_c: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != lambda.len() * r_c.len() || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(invalid("need one positive weight per node"));
        }
        let lambda_edges = edges(&lambda, lambda[0], lambda[lambda.len() - 1]);
        let r_c_edges = edges(&r_c, r_c[0], r_c[r_c.len() - 1]);
        Ok(Self { lambda, r_c, lambda_edges, r_c_edges, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn n_lambda(&self) -> usize {
        self.lambda.len()
    }

    pub fn n_r_c(&self) -> usize {
        self.r_c.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(i_lambda, i_r)` of a node.
    pub fn split(&self, node: usize) -> (usize, usize) {
        (node % self.lambda.len(), node / self.lambda.len())
    }

    /// `(lambda_c, r_c)` of a node.
    pub fn theta(&self, node: usize) -> (f64, f64) {
        let (i, j) = self.split(node);
        (self.lambda[i], self.r_c[j])
    }

    /// Edges `[lo, hi]` of the lambda cell of column index `i`.
    pub fn lambda_cell(&self, i: usize) -> (f64, f64) {
        (self.lambda_edges[i], self.lambda_edges[i + 1])
    }

    pub fn r_c_cell(&self, j: usize) -> (f64, f64) {
        (self.r_c_edges[j], self.r_c_edges[j + 1])
    }

    /// Weighted sum `sum_j w_j v_j`, in node order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Total measure of the grid rectangle.
    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_tile_the_rectangle() {
        let spec = GridSpec { n_lambda: 37, n_r_c: 23, ..GridSpec::default() };
        let g = ThetaGrid::new(&spec).unwrap();
        let exact = (spec.lambda_max - spec.lambda_min) * (spec.r_c_max - spec.r_c_min);
        assert!((g.integrate(&vec![1.0; g.len()]) / exact - 1.0).abs() < 1e-10);
        assert!(g.weights().iter().all(|w| *w > 0.0));
        assert_eq!(g.theta(37), (g.lambda[0], g.r_c[1]));
    }
}
