//! Likelihood models over a parameter grid.

use super::grid::ThetaGrid;
use super::likelihood::LikelihoodTable;
use crate::decoherence::{combine, environment_channels, CslColumn, CslParams};
use crate::error::{Error, Result};
use crate::physics::{
    derive_geometry, window_grid, DerivedGeometry, ExperimentConfig, GratingInteraction, Particle, TalbotSpectrum,
};
use rayon::prelude::*;

/// Anything that supplies `p(x | theta)` at every node of a grid.
pub trait GridModel: Sync {
    fn grid(&self) -> &ThetaGrid;

    /// Likelihood table at one node.
    fn node_table(&self, node: usize) -> Result<LikelihoodTable>;

    /// Table that simulated data are drawn from in the conditioned mode.
    fn reference_table(&self) -> Result<LikelihoodTable>;

    /// `sum_i ln p(x_i | theta)` for every node, in node order.
    fn log_likelihood_sums(&self, data: &[f64]) -> Result<Vec<f64>> {
        (0..self.grid().len())
            .into_par_iter()
            .map(|node| {
                let t = self.node_table(node)?;
                Ok(data.iter().map(|&x| t.density(x).ln()).sum())
            })
            .collect()
    }

    /// `int p ln p dx` per node, for the MDIP prior.
    fn neg_entropies(&self) -> Result<Vec<f64>> {
        (0..self.grid().len()).into_par_iter().map(|node| Ok(self.node_table(node)?.neg_entropy())).collect()
    }
}

/// Physics of one interferometer configuration, independent of the CSL parameters.
#[derive(Debug, Clone)]
pub struct Interferometer {
    pub config: ExperimentConfig,
    pub particle: Particle,
    pub geometry: DerivedGeometry,
    pub spectrum: TalbotSpectrum,
    /// `R_n^oth` from every non-collapse channel.
    pub other: Vec<f64>,
    /// Window sample positions.
    pub x: Vec<f64>,
    // h_n = A_n R_n^oth
    harmonics: Vec<f64>,
    // cos(n k x_j), row per order n >= 1
    cosines: Vec<Vec<f64>>,
    // trapezoid integrals of the rows and of 1
    cosine_integrals: Vec<f64>,
    window_length: f64,
}

impl Interferometer {
    pub fn new(config: &ExperimentConfig, particle: &Particle) -> Result<Self> {
        let geometry = derive_geometry(config, particle)?;
        let grating = GratingInteraction::new(config, particle)?;
        let spectrum = TalbotSpectrum::compute(&geometry, &grating, config.n_max)?;
        let channels = environment_channels(config, particle, &geometry)?;
        let other = combine(&channels, &geometry, config.n_max)?.other;
        let harmonics: Vec<f64> = spectrum.amplitudes.iter().zip(&other).map(|(a, r)| a * r).collect();
        let x = window_grid(config.window_half_width, config.samples);
        let k = geometry.wavenumber;
        let cosines: Vec<Vec<f64>> =
            (1..=config.n_max).map(|n| x.iter().map(|&xi| (n as f64 * k * xi).cos()).collect()).collect();
        let h = x[1] - x[0];
        let trapz = |row: &[f64]| {
            let inner: f64 = row[1..row.len() - 1].iter().sum();
            h * (inner + 0.5 * (row[0] + row[row.len() - 1]))
        };
        let cosine_integrals = cosines.iter().map(|r| trapz(r)).collect();
        let window_length = h * (x.len() - 1) as f64;
        Ok(Self {
            config: config.clone(),
            particle: particle.clone(),
            geometry,
            spectrum,
            other,
            x,
            harmonics,
            cosines,
            cosine_integrals,
            window_length,
        })
    }

    pub fn n_max(&self) -> usize {
        self.config.n_max
    }

    /// `A_n R_n^oth`
    pub fn harmonics(&self) -> &[f64] {
        &self.harmonics
    }

    /// Relative density `1 + 2 sum_n rho_n h_n cos(n k x_j)` on the window grid.
    pub fn profile(&self, rho: &[f64]) -> Vec<f64> {
        let mut out = vec![1.0; self.x.len()];
        for (n, row) in self.cosines.iter().enumerate() {
            let c = 2.0 * rho[n + 1] * self.harmonics[n + 1];
            for (o, v) in out.iter_mut().zip(row) {
                *o += c * v;
            }
        }
        out
    }

    /// Likelihood table for CSL reduction factors `rho_n = R_n^mod`.
    pub fn table_for(&self, rho: &[f64]) -> Result<LikelihoodTable> {
        let raw = self.profile(rho);
        let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(Error::NumericalConsistency(format!(
                "interference density is negative ({min:e} of its mean) inside the window"
            )));
        }
        LikelihoodTable::from_unnormalized(self.x.clone(), raw.into_iter().map(|v| v.max(0.0)).collect())
    }

    /// `p(x | theta)` on the window grid.
    pub fn likelihood(&self, theta: CslParams) -> Result<LikelihoodTable> {
        let column = CslColumn::new(theta.r_c, &self.particle, &self.geometry, self.n_max())?;
        let rho: Vec<f64> = (0..=self.n_max()).map(|n| column.reduction(n, theta.lambda)).collect();
        self.table_for(&rho)
    }

    /// Per-datum coefficients for fast evaluation of interpolated likelihoods.
    pub fn data_coefficients(&self, data: &[f64]) -> DataCoefficients {
        let n_max = self.n_max();
        let h = self.x[1] - self.x[0];
        let x0 = self.x[0];
        let last = self.x.len() - 1;
        let mut e = vec![0.0; data.len() * n_max];
        let mut outside = 0usize;
        for (i, &xi) in data.iter().enumerate() {
            if xi < x0 || xi > self.x[last] {
                outside += 1;
                continue;
            }
            let pos = (xi - x0) / h;
            let j = (pos.floor() as usize).min(last - 1);
            let t = pos - j as f64;
            for n in 0..n_max {
                let row = &self.cosines[n];
                let interp = row[j] + t * (row[j + 1] - row[j]);
                e[i * n_max + n] = 2.0 * self.harmonics[n + 1] * interp;
            }
        }
        let g = (0..n_max).map(|n| 2.0 * self.harmonics[n + 1] * self.cosine_integrals[n]).collect();
        DataCoefficients { n_max, count: data.len(), e, g, base: self.window_length, outside }
    }
}

/// Precomputed per-datum terms: with `rho_n` the CSL factors,
/// `ln p(x_i) = ln(1 + sum_n rho_n e_{n,i}) - ln(L + sum_n rho_n g_n)`.
#[derive(Debug, Clone)]
pub struct DataCoefficients {
    n_max: usize,
    count: usize,
    e: Vec<f64>,
    g: Vec<f64>,
    base: f64,
    outside: usize,
}

impl DataCoefficients {
    /// `sum_i ln p(x_i | rho)`; `rho` has entries for n = 0..=n_max.
    pub fn log_likelihood(&self, rho: &[f64]) -> Result<f64> {
        if self.outside > 0 {
            return Ok(f64::NEG_INFINITY);
        }
        let rho = &rho[1..];
        let mut sum = 0.0;
        for chunk in self.e.chunks_exact(self.n_max) {
            let mut v = 1.0;
            for (r, c) in rho.iter().zip(chunk) {
                v += r * c;
            }
            if v < -1e-9 {
                return Err(Error::NumericalConsistency(format!(
                    "interpolated likelihood is negative ({v:e})"
                )));
            }
            sum += v.max(0.0).ln();
        }
        let norm: f64 = self.base + rho.iter().zip(&self.g).map(|(r, g)| r * g).sum::<f64>();
        Ok(sum - self.count as f64 * norm.ln())
    }
}

/// The interferometer evaluated on a `(lambda_c, r_c)` grid.
#[derive(Debug, Clone)]
pub struct InterferometerModel {
    pub interferometer: Interferometer,
    pub grid: ThetaGrid,
    /// CSL quantities per `r_c` node.
    pub columns: Vec<CslColumn>,
    /// Hypothesis data are simulated from; `lambda_c = 0` by default.
    pub theta_true: CslParams,
}

impl InterferometerModel {
    pub fn new(interferometer: Interferometer, grid: ThetaGrid) -> Result<Self> {
        let columns = grid
            .r_c
            .par_iter()
            .map(|&r_c| {
                CslColumn::new(r_c, &interferometer.particle, &interferometer.geometry, interferometer.n_max())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { interferometer, grid, columns, theta_true: CslParams::none() })
    }

    pub fn with_truth(mut self, theta: CslParams) -> Self {
        self.theta_true = theta;
        self
    }

    /// `R_n^mod` at a node.
    pub fn node_reduction(&self, node: usize) -> Vec<f64> {
        let (i, j) = self.grid.split(node);
        let lambda = self.grid.lambda[i];
        (0..=self.interferometer.n_max()).map(|n| self.columns[j].reduction(n, lambda)).collect()
    }
}

impl GridModel for InterferometerModel {
    fn grid(&self) -> &ThetaGrid {
        &self.grid
    }

    fn node_table(&self, node: usize) -> Result<LikelihoodTable> {
        self.interferometer.table_for(&self.node_reduction(node))
    }

    fn reference_table(&self) -> Result<LikelihoodTable> {
        self.interferometer.likelihood(self.theta_true)
    }

    fn log_likelihood_sums(&self, data: &[f64]) -> Result<Vec<f64>> {
        let coeffs = self.interferometer.data_coefficients(data);
        (0..self.grid.len())
            .into_par_iter()
            .map(|node| coeffs.log_likelihood(&self.node_reduction(node)))
            .collect()
    }
}

/// Explicit likelihood tables, one per node.
#[derive(Debug, Clone)]
pub struct TabulatedModel {
    pub grid: ThetaGrid,
    pub tables: Vec<LikelihoodTable>,
    pub reference: usize,
}

impl TabulatedModel {
    pub fn new(grid: ThetaGrid, tables: Vec<LikelihoodTable>, reference: usize) -> Result<Self> {
        if tables.len() != grid.len() || reference >= tables.len() {
            return Err(crate::error::invalid("need one table per grid node"));
        }
        Ok(Self { grid, tables, reference })
    }
}

impl GridModel for TabulatedModel {
    fn grid(&self) -> &ThetaGrid {
        &self.grid
    }

    fn node_table(&self, node: usize) -> Result<LikelihoodTable> {
        Ok(self.tables[node].clone())
    }

    fn reference_table(&self) -> Result<LikelihoodTable> {
        Ok(self.tables[self.reference].clone())
    }

    fn log_likelihood_sums(&self, data: &[f64]) -> Result<Vec<f64>> {
        Ok(self.tables.iter().map(|t| data.iter().map(|&x| t.density(x).ln()).sum()).collect())
    }
}
