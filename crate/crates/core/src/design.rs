//! Choice of the grating phase and second flight time.

use crate::decoherence::{csl, CslParams};
use crate::error::{Error, Result};
use crate::physics::{
    geometry_scales, talbot_coefficient_continued, DerivedGeometry, ExperimentConfig, FlightTime, GratingInteraction,
    Particle,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Controls `(phi0, t2)` with `t2` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlVector {
    pub phi0: f64,
    pub t2: f64,
}

/// Box over which the controls are searched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignBounds {
    pub phi0: (f64, f64),
    pub t2: (f64, f64),
}

impl DesignBounds {
    /// `phi0` in `[0, 3 pi]`, `t2` in `[t_T / 4, 2 t_T]`.
    pub fn around_talbot_time(talbot_time: f64) -> Self {
        Self { phi0: (0.0, 3.0 * PI), t2: (0.25 * talbot_time, 2.0 * talbot_time) }
    }
}

/// First-harmonic visibility with and without collapse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visibility {
    pub sin: f64,
    pub reduced: f64,
}

impl Visibility {
    pub fn difference(&self) -> f64 {
        self.sin - self.reduced
    }
}

/// Evaluates visibilities for a fixed particle, configuration and reference
/// hypothesis; only the controls vary.
pub struct DesignProblem {
    config: ExperimentConfig,
    particle: Particle,
    theta_ref: CslParams,
    rate_per_lambda: f64,
}

impl DesignProblem {
    pub fn new(config: &ExperimentConfig, particle: &Particle, theta_ref: CslParams) -> Result<Self> {
        let mut config = config.clone();
        // the pulse follows the phase
        config.pulse = None;
        let rate_per_lambda = csl::rate_per_lambda(theta_ref.r_c, particle)?;
        Ok(Self { config, particle: particle.clone(), theta_ref, rate_per_lambda })
    }

    pub fn config_with(&self, c: ControlVector) -> ExperimentConfig {
        let mut cfg = self.config.clone();
        cfg.phi0 = c.phi0;
        cfg.t2 = FlightTime::Seconds(c.t2);
        cfg
    }

    fn geometry(&self, c: ControlVector) -> Result<DerivedGeometry> {
        geometry_scales(&self.config_with(c), &self.particle)
    }

    /// `nu_sin = 2 |B~_1| exp[-2 (pi sigma_x t2 / (D t1))^2]` and `nu_red = nu_sin R_1^mod`.
    pub fn visibility(&self, c: ControlVector) -> Result<Visibility> {
        let cfg = self.config_with(c);
        let geometry = self.geometry(c)?;
        let grating = GratingInteraction::new(&cfg, &self.particle)?;
        let masks = grating.mask_terms(geometry.shear(1))?;
        let (b1, _) = talbot_coefficient_continued(1, &masks)?;
        let sin = 2.0 * b1.abs() * geometry.thermal_factor(1);
        let r1 = if self.theta_ref.lambda == 0.0 {
            1.0
        } else {
            let omf = csl::csl_one_minus_resolution(geometry.separation(1), self.theta_ref.r_c, &self.particle)?;
            (-self.theta_ref.lambda * self.rate_per_lambda * omf * geometry.total_time()).exp()
        };
        Ok(Visibility { sin, reduced: sin * r1 })
    }

    pub fn objective(&self, c: ControlVector) -> Result<f64> {
        Ok(self.visibility(c)?.difference())
    }
}

/// Optimiser output with the value reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOutcome {
    pub controls: ControlVector,
    pub objective: f64,
    pub visibility: Visibility,
}

const MAX_ROUNDS: usize = 200;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn golden_max<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let tol = 1e-10 * (b - a).abs().max(1e-300);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Maximise `nu_sin - nu_red` over the controls: a `coarse x coarse` grid,
/// then alternating golden-section searches on each axis.
pub fn optimize_controls(problem: &DesignProblem, bounds: DesignBounds, coarse: usize) -> Result<DesignOutcome> {
    let coarse = coarse.max(3);
    let axis = |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * i as f64 / (coarse - 1) as f64;
    let values = (0..coarse * coarse)
        .into_par_iter()
        .map(|k| {
            let c = ControlVector { phi0: axis(bounds.phi0, k % coarse), t2: axis(bounds.t2, k / coarse) };
            problem.objective(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let (best, best_value) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if *v > acc.1 { (k, *v) } else { acc });
    if !(best_value > 1e-12) {
        return Err(Error::DegenerateObjective(
            "visibility difference below 1e-12 everywhere; supply a reference hypothesis with lambda_c > 0".into(),
        ));
    }
    let mut c = ControlVector { phi0: axis(bounds.phi0, best % coarse), t2: axis(bounds.t2, best / coarse) };
    let mut value = best_value;
    let step_phi = (bounds.phi0.1 - bounds.phi0.0) / (coarse - 1) as f64;
    let step_t2 = (bounds.t2.1 - bounds.t2.0) / (coarse - 1) as f64;
    let window = |x: f64, step: f64, (lo, hi): (f64, f64)| ((x - step).max(lo), (x + step).min(hi));
    // three alternating rounds, continued while a diagonal ridge still yields gains
    for round in 0..MAX_ROUNDS {
        let start = value;
        let (a, b) = window(c.phi0, step_phi, bounds.phi0);
        let (phi0, v) = golden_max(|p| problem.objective(ControlVector { phi0: p, t2: c.t2 }), a, b)?;
        if v >= value {
            c.phi0 = phi0;
            value = v;
        }
        let (a, b) = window(c.t2, step_t2, bounds.t2);
        let (t2, v) = golden_max(|t| problem.objective(ControlVector { phi0: c.phi0, t2: t }), a, b)?;
        if v >= value {
            c.t2 = t2;
            value = v;
        }
        if round + 1 >= 3 && value - start <= 1e-15 * value.abs() {
            break;
        }
    }
    Ok(DesignOutcome { controls: c, objective: value, visibility: problem.visibility(c)? })
}

/// Largest objective increase found at the eight neighbours `(phi0 +- d1, t2 +- d2)`,
/// with `d = 1e-3` of each bound width and neighbours clamped to the box.
pub fn local_max_excess(problem: &DesignProblem, bounds: DesignBounds, outcome: &DesignOutcome) -> Result<f64> {
    let d1 = 1e-3 * (bounds.phi0.1 - bounds.phi0.0);
    let d2 = 1e-3 * (bounds.t2.1 - bounds.t2.0);
    let mut worst = f64::NEG_INFINITY;
    for i in -1..=1 {
        for j in -1..=1 {
            if i == 0 && j == 0 {
                continue;
            }
            let c = ControlVector {
                phi0: (outcome.controls.phi0 + i as f64 * d1).clamp(bounds.phi0.0, bounds.phi0.1),
                t2: (outcome.controls.t2 + j as f64 * d2).clamp(bounds.t2.0, bounds.t2.1),
            };
            worst = worst.max(problem.objective(c)? - outcome.objective);
        }
    }
    Ok(worst)
}
