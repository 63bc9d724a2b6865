use super::grid::ThetaGrid;
use super::model::GridModel;
use super::prior::Prior;
use crate::error::{numerical, Result};

/// Normalised posterior on the grid with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorGrid {
    pub density: Vec<f64>,
    /// Natural log of `density`; `-inf` where the prior vanishes.
    pub log_density: Vec<f64>,
    pub n_points: usize,
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
}

impl PosteriorGrid {
    /// Use this posterior as the prior for further data.
    pub fn as_prior(&self) -> Prior {
        Prior { density: self.density.clone() }
    }
}

/// Combine per-node log-likelihood sums with a prior.
pub fn posterior_from_log_likelihood(grid: &ThetaGrid, prior: &Prior, log_like: &[f64], n_points: usize) -> Result<PosteriorGrid> {
    if log_like.iter().any(|v| v.is_nan()) {
        return Err(numerical("log-likelihood is NaN"));
    }
    let log_post: Vec<f64> = prior
        .density
        .iter()
        .zip(log_like)
        .map(|(p, l)| if *p > 0.0 { p.ln() + l } else { f64::NEG_INFINITY })
        .collect();
    let max = log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(numerical("every grid node has zero posterior probability"));
    }
    let unnorm: Vec<f64> = log_post.iter().map(|v| (v - max).exp()).collect();
    let mass = grid.integrate(&unnorm);
    let log_mass = mass.ln();
    let log_density: Vec<f64> = log_post.iter().map(|v| v - max - log_mass).collect();
    let density = unnorm.iter().map(|v| v / mass).collect();
    Ok(PosteriorGrid { density, log_density, n_points, seed: None, config_hash: None })
}

/// `p(theta | x)` on the model grid. With no data the prior is returned exactly.
pub fn posterior<M: GridModel + ?Sized>(model: &M, prior: &Prior, data: &[f64]) -> Result<PosteriorGrid> {
    if data.is_empty() {
        let log_density = prior.density.iter().map(|p| if *p > 0.0 { p.ln() } else { f64::NEG_INFINITY }).collect();
        return Ok(PosteriorGrid { density: prior.density.clone(), log_density, n_points: 0, seed: None, config_hash: None });
    }
    let log_like = model.log_likelihood_sums(data)?;
    posterior_from_log_likelihood(model.grid(), prior, &log_like, data.len())
}
