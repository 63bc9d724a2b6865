//! Information gain, evidence and Monte-Carlo expected information.

use crate::bayes::{posterior_from_log_likelihood, stream_rng, GridModel, PosteriorGrid, Prior, ThetaGrid};
use crate::constants::LN2;
use crate::error::{invalid, numerical, Error, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicBool, Ordering};

/// Kullback–Leibler divergence of the posterior from the prior, in bits.
pub fn info_gain(grid: &ThetaGrid, posterior: &[f64], prior: &[f64]) -> Result<f64> {
    let mut h = 0.0;
    for (node, ((w, p), q)) in grid.weights().iter().zip(posterior).zip(prior).enumerate() {
        if *p <= 0.0 {
            continue;
        }
        if *q <= 0.0 {
            return Err(Error::InfiniteDivergence { node });
        }
        h += w * p * (p / q).log2();
    }
    if h.is_nan() {
        return Err(numerical("information gain is NaN"));
    }
    Ok(h)
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln p(x)` from per-node log-likelihood sums.
pub fn log_evidence_from(grid: &ThetaGrid, prior: &Prior, log_like: &[f64]) -> Result<f64> {
    let terms = grid.weights().iter().zip(&prior.density).zip(log_like).filter(|((_, p), _)| **p > 0.0);
    let v = log_sum_exp(terms.map(|((w, p), l)| (w * p).ln() + l));
    if v.is_nan() {
        return Err(numerical("log evidence is NaN"));
    }
    Ok(v)
}

/// `ln p(x) = ln int prod_i p(x_i | theta) p(theta) dtheta`.
pub fn evidence<M: GridModel + ?Sized>(model: &M, prior: &Prior, data: &[f64]) -> Result<f64> {
    log_evidence_from(model.grid(), prior, &model.log_likelihood_sums(data)?)
}

/// How simulated data sets are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InfoMode {
    /// `theta ~ p(theta)`, `x ~ p(x | theta)`.
    PriorPredictive,
    /// `x ~ p(x | theta_0)` with the model's reference hypothesis.
    Conditioned,
}

impl InfoMode {
    pub fn label(&self) -> &'static str {
        match self {
            InfoMode::PriorPredictive => "prior-predictive",
            InfoMode::Conditioned => "conditioned",
        }
    }
}

/// Monte-Carlo estimate of the expected information gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoResult {
    pub mode: InfoMode,
    pub n_points: usize,
    pub iterations: usize,
    pub completed: usize,
    pub seed: u64,
    /// Mean gain, bits.
    pub mean_bits: f64,
    /// Statistical error `sqrt((<H^2> - <H>^2) / M)`, bits.
    pub delta_bits: f64,
    pub samples_bits: Vec<f64>,
}

impl InfoResult {
    pub fn is_partial(&self) -> bool {
        self.completed < self.iterations
    }
}

fn categorical(cumulative: &[f64], u: f64) -> usize {
    cumulative.partition_point(|c| *c <= u).min(cumulative.len() - 1)
}

/// Expected information over `iterations` simulated data sets of `n_points` each.
///
/// Realisation `i` uses generator stream `i` of `seed`, so the result does not
/// depend on scheduling. Setting `cancel` stops new realisations; the result
/// then reports how many completed.
pub fn expected_information<M: GridModel + ?Sized>(
    model: &M,
    prior: &Prior,
    n_points: usize,
    iterations: usize,
    seed: u64,
    mode: InfoMode,
    cancel: Option<&AtomicBool>,
) -> Result<InfoResult> {
    if iterations < 2 {
        return Err(invalid("expected information needs at least two iterations"));
    }
    let grid = model.grid();
    let reference = match mode {
        InfoMode::Conditioned => Some(model.reference_table()?),
        InfoMode::PriorPredictive => None,
    };
    let mut cumulative = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    for (w, p) in grid.weights().iter().zip(&prior.density) {
        acc += w * p;
        cumulative.push(acc);
    }
    for c in &mut cumulative {
        *c /= acc;
    }

    let realisation = |i: usize| -> Result<Option<f64>> {
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Ok(None);
        }
        if n_points == 0 {
            return Ok(Some(0.0));
        }
        let mut rng = stream_rng(seed, i as u64);
        match mode {
            InfoMode::Conditioned => {
                let table = reference.as_ref().expect("reference table in conditioned mode");
                let data = table.sample_with(n_points, &mut rng);
                let log_like = model.log_likelihood_sums(&data)?;
                let post = posterior_from_log_likelihood(grid, prior, &log_like, n_points)?;
                Ok(Some(info_gain(grid, &post.density, &prior.density)?))
            }
            InfoMode::PriorPredictive => {
                let node = categorical(&cumulative, rng.gen::<f64>());
                let data = model.node_table(node)?.sample_with(n_points, &mut rng);
                let log_like = model.log_likelihood_sums(&data)?;
                let evidence = log_evidence_from(grid, prior, &log_like)?;
                Ok(Some((log_like[node] - evidence) / LN2))
            }
        }
    };
    let results = (0..iterations).into_par_iter().map(realisation).collect::<Result<Vec<_>>>()?;
    let samples: Vec<f64> = results.into_iter().flatten().collect();
    let m = samples.len();
    let (mean, delta) = if m == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let mean = samples.iter().sum::<f64>() / m as f64;
        let mean_sq = samples.iter().map(|h| h * h).sum::<f64>() / m as f64;
        (mean, ((mean_sq - mean * mean).max(0.0) / m as f64).sqrt())
    };
    Ok(InfoResult {
        mode,
        n_points,
        iterations,
        completed: m,
        seed,
        mean_bits: mean,
        delta_bits: delta,
        samples_bits: samples,
    })
}

/// Information gain of one posterior relative to its prior.
pub fn posterior_information(grid: &ThetaGrid, posterior: &PosteriorGrid, prior: &Prior) -> Result<f64> {
    info_gain(grid, &posterior.density, &prior.density)
}
