//! End-to-end runs driven by a [`Scenario`].

use super::output::{self, DensitySummary, ExclusionSummary, InfoSummary, Provenance, SweepRow};
use super::scenario::{PriorChoice, Scenario, SweepSpec, SweepVariable};
use crate::bayes::{
    exclusion_line, experimental_prior, lambda_at_rc, mdip_prior, posterior, sample_positions, ExclusionCurve,
    GridModel, Interferometer, InterferometerModel, PosteriorGrid, Prior, ThetaGrid,
};
use crate::design::{local_max_excess, optimize_controls, DesignBounds, DesignProblem};
use crate::error::{invalid, Result};
use crate::information::{expected_information, posterior_information, InfoResult};
use crate::physics::{geometry_scales, grating_pulse, ExperimentConfig, FlightTime, Particle};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::atomic::AtomicBool;

/// Length scale at which single-number bounds are quoted.
pub const REFERENCE_R_C: f64 = 1e-7;

/// Controls used by a run and the grating pulse that realises them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedControls {
    pub phi0_rad: f64,
    pub t2_s: f64,
    pub t2_in_talbot_times: f64,
    pub talbot_time_s: f64,
    pub optimized: bool,
    pub nu_sin: Option<f64>,
    pub nu_red: Option<f64>,
    /// Largest objective gain found next to the optimum (non-positive at a local maximum).
    pub local_max_excess: Option<f64>,
    pub pulse_spot_area_m2: f64,
    pub pulse_energy_j: f64,
}

/// Scenario with controls fixed and the particle built.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub particle: Particle,
    pub config: ExperimentConfig,
    pub controls: ResolvedControls,
}

fn design_bounds(scenario: &Scenario, talbot_time: f64) -> DesignBounds {
    let d = &scenario.design;
    DesignBounds {
        phi0: (0.0, d.phi0_max_rad),
        t2: (d.t2_min_in_talbot_times * talbot_time, d.t2_max_in_talbot_times * talbot_time),
    }
}

/// Optimise `(phi0, t2)` unless the scenario fixes both.
pub fn prepare(scenario: &Scenario) -> Result<Prepared> {
    scenario.validate()?;
    let particle = scenario.particle()?;
    let mut config = scenario.experiment_config();
    let talbot_time = geometry_scales(&config, &particle)?.talbot_time;
    let mut controls = ResolvedControls {
        phi0_rad: config.phi0,
        t2_s: config.t2.resolve(talbot_time),
        t2_in_talbot_times: 0.0,
        talbot_time_s: talbot_time,
        optimized: false,
        nu_sin: None,
        nu_red: None,
        local_max_excess: None,
        pulse_spot_area_m2: 0.0,
        pulse_energy_j: 0.0,
    };
    if !scenario.controls_fixed() {
        let problem = DesignProblem::new(&config, &particle, scenario.theta_ref()?)?;
        let bounds = design_bounds(scenario, talbot_time);
        let outcome = optimize_controls(&problem, bounds, scenario.design.coarse_grid)?;
        controls.phi0_rad = outcome.controls.phi0;
        controls.t2_s = outcome.controls.t2;
        controls.optimized = true;
        controls.nu_sin = Some(outcome.visibility.sin);
        controls.nu_red = Some(outcome.visibility.reduced);
        controls.local_max_excess = Some(local_max_excess(&problem, bounds, &outcome)?);
        config.phi0 = outcome.controls.phi0;
        config.t2 = FlightTime::Seconds(outcome.controls.t2);
    }
    controls.t2_in_talbot_times = controls.t2_s / talbot_time;
    let geometry = geometry_scales(&config, &particle)?;
    match config.pulse {
        Some(p) => {
            controls.pulse_spot_area_m2 = p.spot_area;
            controls.pulse_energy_j = p.energy;
        }
        None => {
            let (area, energy) = grating_pulse(config.phi0, &config, &particle, &geometry)?;
            controls.pulse_spot_area_m2 = area;
            controls.pulse_energy_j = energy;
        }
    }
    Ok(Prepared { scenario: scenario.clone(), particle, config, controls })
}

/// Interferometer on the scenario grid, simulating data from its `theta_true`.
pub fn build_model(prepared: &Prepared) -> Result<InterferometerModel> {
    let s = &prepared.scenario;
    let interferometer = Interferometer::new(&prepared.config, &prepared.particle)?;
    let grid = ThetaGrid::new(&s.grid.spec())?;
    Ok(InterferometerModel::new(interferometer, grid)?.with_truth(s.theta_true()?))
}

pub fn build_prior(scenario: &Scenario, model: &InterferometerModel) -> Result<Prior> {
    match &scenario.run.prior {
        PriorChoice::Mdip => mdip_prior(model),
        PriorChoice::Experimental(path) => experimental_prior(&model.grid, &output::read_boundary_csv(path)?),
    }
}

fn provenance(scenario: &Scenario) -> Provenance {
    Provenance::new(scenario.run.seed, scenario.config_hash())
}

/// Inputs needed to rerun from the output directory alone.
fn write_inputs(prepared: &Prepared, out: &Path) -> Result<()> {
    output::ensure_dir(out)?;
    std::fs::write(out.join("scenario.toml"), prepared.scenario.to_toml())?;
    #[derive(Serialize)]
    struct ControlsFile<'a> {
        controls: &'a ResolvedControls,
        provenance: Provenance,
    }
    output::write_json(
        &out.join("controls.json"),
        &ControlsFile { controls: &prepared.controls, provenance: provenance(&prepared.scenario) },
    )
}

/// Draw `n_points` arrival positions at `theta_true` and write `positions.csv`.
pub fn run_simulate(scenario: &Scenario, out: &Path) -> Result<Vec<f64>> {
    let prepared = prepare(scenario)?;
    let model = build_model(&prepared)?;
    let table = model.reference_table()?;
    let x = sample_positions(&table, scenario.run.n_points, scenario.run.seed);
    write_inputs(&prepared, out)?;
    output::write_positions_csv(&out.join("positions.csv"), &x)?;
    Ok(x)
}

/// Everything a posterior run produces.
#[derive(Debug, Clone)]
pub struct PosteriorArtifacts {
    pub controls: ResolvedControls,
    pub grid: ThetaGrid,
    pub prior: Prior,
    pub posterior: PosteriorGrid,
    pub information_bits: Option<f64>,
    pub curve: ExclusionCurve,
    pub lambda_at_reference: Option<f64>,
}

/// Controls, simulated data, prior, posterior and exclusion line.
///
/// Files: `scenario.toml`, `controls.json`, `positions.csv`, `prior.csv`,
/// `posterior.csv`, `posterior.json`, `exclusion.csv`, `exclusion.json`,
/// `landmarks.json`. When the exclusion line fails the density files are
/// kept and `exclusion.json` records the failure.
pub fn run_posterior(scenario: &Scenario, out: &Path) -> Result<PosteriorArtifacts> {
    let prepared = prepare(scenario)?;
    let model = build_model(&prepared)?;
    let prior = build_prior(scenario, &model)?;
    let data = sample_positions(&model.reference_table()?, scenario.run.n_points, scenario.run.seed);
    let mut post = posterior(&model, &prior, &data)?;
    post.seed = Some(scenario.run.seed);
    post.config_hash = Some(scenario.config_hash());
    let information_bits = posterior_information(&model.grid, &post, &prior).ok();

    write_inputs(&prepared, out)?;
    output::write_positions_csv(&out.join("positions.csv"), &data)?;
    output::write_density_csv(&out.join("prior.csv"), &model.grid, &prior.density)?;
    output::write_density_csv(&out.join("posterior.csv"), &model.grid, &post.density)?;
    std::fs::write(out.join("landmarks.json"), output::LANDMARKS_JSON)?;
    let grid = &model.grid;
    let summary = |kind: &str, density: &[f64], n_points: usize, info: Option<f64>| DensitySummary {
        kind: kind.into(),
        prior: scenario.run.prior.to_string(),
        normalization: grid.integrate(density),
        n_points,
        n_lambda: grid.n_lambda(),
        n_r_c: grid.n_r_c(),
        lambda_range_per_s: [scenario.grid.lambda_min_per_s, scenario.grid.lambda_max_per_s],
        r_c_range_m: [scenario.grid.r_c_min_m, scenario.grid.r_c_max_m],
        information_bits: info,
        provenance: provenance(scenario),
    };
    output::write_json(&out.join("prior.json"), &summary("prior", &prior.density, 0, None))?;
    output::write_json(
        &out.join("posterior.json"),
        &summary("posterior", &post.density, data.len(), information_bits),
    )?;

    let confidence = scenario.run.confidence;
    let curve = match exclusion_line(grid, &post, &model.columns, &model.interferometer.geometry, confidence) {
        Ok(c) => c,
        Err(e) => {
            let failed = ExclusionSummary {
                status: "failed".into(),
                error: Some(e.to_string()),
                confidence,
                strength: None,
                mass_below: None,
                lambda_c_at_1e_7_m: None,
                provenance: provenance(scenario),
            };
            output::write_json(&out.join("exclusion.json"), &failed)?;
            return Err(e);
        }
    };
    let lambda_at_reference = lambda_at_rc(&curve, REFERENCE_R_C).ok();
    output::write_exclusion_csv(&out.join("exclusion.csv"), &curve)?;
    output::write_json(
        &out.join("exclusion.json"),
        &ExclusionSummary {
            status: "ok".into(),
            error: None,
            confidence,
            strength: Some(curve.strength),
            mass_below: Some(curve.mass),
            lambda_c_at_1e_7_m: lambda_at_reference,
            provenance: provenance(scenario),
        },
    )?;
    Ok(PosteriorArtifacts {
        controls: prepared.controls,
        grid: model.grid.clone(),
        prior,
        posterior: post,
        information_bits,
        curve,
        lambda_at_reference,
    })
}

/// `lambda_c` on a written exclusion line at `r_c`.
pub fn lambda_from_artifacts(dir: &Path, r_c: f64) -> Result<f64> {
    let points = output::read_exclusion_csv(&dir.join("exclusion.csv"))?;
    if points.is_empty() {
        return Err(invalid(format!("{} has no rows", dir.join("exclusion.csv").display())));
    }
    let curve = ExclusionCurve { strength: f64::NAN, confidence: f64::NAN, mass: f64::NAN, points };
    lambda_at_rc(&curve, r_c)
}

fn information_for(prepared: &Prepared, cancel: Option<&AtomicBool>) -> Result<InfoResult> {
    let s = &prepared.scenario;
    let model = build_model(prepared)?;
    let prior = build_prior(s, &model)?;
    expected_information(&model, &prior, s.run.n_points, s.run.mc_iters, s.run.seed, s.run.mode, cancel)
}

/// Expected information gain; appends to `info.csv` and writes `info.json` when `out` is given.
pub fn run_info(scenario: &Scenario, out: Option<&Path>, cancel: Option<&AtomicBool>) -> Result<InfoResult> {
    let prepared = prepare(scenario)?;
    let result = information_for(&prepared, cancel)?;
    if let Some(out) = out {
        write_inputs(&prepared, out)?;
        output::append_info_row(&out.join("info.csv"), &result)?;
        output::write_json(
            &out.join("info.json"),
            &InfoSummary {
                mode: result.mode.label().into(),
                n_points: result.n_points,
                iterations: result.iterations,
                completed: result.completed,
                partial: result.is_partial(),
                mean_bits: result.mean_bits,
                delta_bits: result.delta_bits,
                prior: scenario.run.prior.to_string(),
                provenance: provenance(scenario),
            },
        )?;
    }
    Ok(result)
}

/// Expected information at every value of `sweep`. A failing point is
/// recorded in its row and the rest of the sweep continues.
pub fn run_info_sweep(scenario: &Scenario, sweep: &SweepSpec, out: Option<&Path>) -> Result<Vec<SweepRow>> {
    sweep.validate()?;
    scenario.validate()?;
    // controls shared by every point when they are not re-optimised
    let shared = if sweep.optimize_each && sweep.variable != SweepVariable::NPoints {
        None
    } else {
        let base = prepare(scenario)?;
        let mut fixed = scenario.clone();
        // t2 stays in Talbot times so that mass points keep the same fringe geometry
        fixed.experiment.phi0_rad = Some(base.controls.phi0_rad);
        fixed.experiment.t2_in_talbot_times = Some(base.controls.t2_in_talbot_times);
        fixed.experiment.t2_s = None;
        Some(fixed)
    };
    let rows: Vec<SweepRow> = sweep
        .values
        .par_iter()
        .map(|&value| {
            let point = shared.as_ref().unwrap_or(scenario).with_sweep_value(sweep.variable, value);
            let mut row = SweepRow {
                variable: sweep.variable.label().into(),
                value,
                h_bits: None,
                delta_bits: None,
                phi0_rad: None,
                t2_s: None,
                status: "ok".into(),
            };
            match prepare(&point).and_then(|p| {
                row.phi0_rad = Some(p.controls.phi0_rad);
                row.t2_s = Some(p.controls.t2_s);
                information_for(&p, None)
            }) {
                Ok(r) => {
                    row.h_bits = Some(r.mean_bits);
                    row.delta_bits = Some(r.delta_bits);
                }
                Err(e) => row.status = e.to_string(),
            }
            row
        })
        .collect();
    if let Some(out) = out {
        output::ensure_dir(out)?;
        std::fs::write(out.join("scenario.toml"), scenario.to_toml())?;
        output::write_sweep_csv(&out.join("sweep.csv"), &rows)?;
    }
    Ok(rows)
}

/// Optimised controls and pulse; writes `controls.json` when `out` is given.
pub fn run_design(scenario: &Scenario, out: Option<&Path>) -> Result<ResolvedControls> {
    let mut s = scenario.clone();
    // always optimise, even when the file fixes the controls
    s.experiment.phi0_rad = None;
    s.experiment.pulse_energy_j = None;
    s.experiment.spot_area_m2 = None;
    let prepared = prepare(&s)?;
    if let Some(out) = out {
        write_inputs(&prepared, out)?;
    }
    Ok(prepared.controls)
}
