//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criterion 6 takes about an hour and runs only with `--extended`
//! (`cargo test --test acceptance -- --extended`) or `TALBOT_EXTENDED=1`.

use rand::Rng;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;
use talbot_core::bayes::{
    exclusion_line, lambda_at_rc, mdip_prior, posterior, sample_positions, stream_rng, GridModel, GridSpec,
    LikelihoodTable, Prior, TabulatedModel, ThetaGrid,
};
use talbot_core::cli_io::{build_model, build_prior, output, prepare, Scenario, REFERENCE_R_C};
use talbot_core::constants::ATOMIC_MASS;
use talbot_core::decoherence::{
    csl_rate, csl_resolution, point_like_resolution, CslParams, DecoherenceChannel,
};
use talbot_core::design::{local_max_excess, optimize_controls, ControlVector, DesignBounds, DesignProblem};
use talbot_core::information::{expected_information, info_gain, InfoMode};
use talbot_core::physics::{
    derive_geometry, geometry_scales, grating_pulse, talbot_coefficient, GratingInteraction, OpticalModel,
    OpticalResponse, Particle, Permittivity,
};
use talbot_core::quadrature::{gauss_legendre, integrate, Tolerance};
use talbot_core::special::{bessel_j, erf, sine_integral};

enum Outcome {
    Pass(String),
    Fail(String),
    Skipped(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn tol(rel: f64) -> Tolerance {
    Tolerance { abs: 0.0, rel, max_panels: 20_000 }
}

fn analytic_limits() -> Outcome {
    let mut worst = [0.0f64; 5];

    // point-like CSL: a 1e8 u silicon sphere against r_c at least 100 radii
    let p = Particle::from_amu(1e8, 2329.0, Permittivity::default()).unwrap();
    for ratio in [1e-2, 3e-3, 1e-4] {
        let r_c = p.radius() / ratio;
        let theta = CslParams::new(1e-12, r_c).unwrap();
        let expected = (p.mass() / ATOMIC_MASS).powi(2) * theta.lambda;
        worst[0] = worst[0].max((csl_rate(theta, &p).unwrap() / expected - 1.0).abs());
        for x in [0.1, 0.5, 1.0, 3.0, 10.0] {
            let x = x * r_c;
            let f = csl_resolution(x, theta, &p).unwrap();
            let point = PI.sqrt() * (r_c / x) * erf(x / (2.0 * r_c));
            worst[1] = worst[1].max((f / point - 1.0).abs());
            worst[1] = worst[1].max((point_like_resolution(x, r_c) / point - 1.0).abs());
        }
    }

    // Gaussian-weighted integrals behind the sphere reduction
    let gauss_moment = integrate(|a| (-a * a).exp() * a * a, 0.0, 12.0, tol(1e-13)).unwrap();
    worst[2] = (gauss_moment / (PI.sqrt() / 4.0) - 1.0).abs();
    for beta in [0.1, 1.0, 10.0] {
        let v = integrate(|a| (-a * a).exp() * a * sine_integral(a * beta), 0.0, 12.0, tol(1e-13)).unwrap();
        worst[2] = worst[2].max((v / (PI / 4.0 * erf(beta / 2.0)) - 1.0).abs());
    }

    // pure phase grating
    let mut s = Scenario::maqro();
    s.experiment.optical_model = OpticalModel::PurePhase;
    s.experiment.t2_in_talbot_times = Some(1.0);
    for phi0 in [0.3, 1.3, 4.0, 9.0] {
        s.experiment.phi0_rad = Some(phi0);
        let cfg = s.experiment_config();
        let grating = GratingInteraction::new(&cfg, &s.particle().unwrap()).unwrap();
        for frac in [0.0, 0.13, 0.5, 0.77, 1.0, 1.6] {
            let shear = frac * cfg.grating_pitch;
            let masks = grating.mask_terms(shear).unwrap();
            let arg = phi0 * (PI * shear / cfg.grating_pitch).sin();
            for n in -8..=8 {
                let b = talbot_coefficient(n, &masks).unwrap();
                worst[3] = worst[3].max((b - bessel_j(n, arg)).abs());
            }
        }
    }

    // detector blur against direct convolution of cos(2 pi n y / D) with a Gaussian
    let cfg = Scenario::maqro();
    let mut cfg_e = cfg.experiment_config();
    cfg_e.t2 = talbot_core::physics::FlightTime::TalbotTimes(1.4);
    let geometry = derive_geometry(&cfg_e, &cfg.particle().unwrap()).unwrap();
    let d = geometry.period;
    for frac in [0.01, 0.05, 0.1, 0.2, 0.4] {
        let sigma = frac * d;
        let channel = DecoherenceChannel::measurement(sigma);
        for n in 1..=6 {
            let direct = integrate(
                |y| (2.0 * PI * n as f64 * y / d).cos() * (-0.5 * (y / sigma).powi(2)).exp(),
                -12.0 * sigma,
                12.0 * sigma,
                Tolerance { abs: 1e-14, ..tol(1e-12) },
            )
            .unwrap()
                / ((2.0 * PI).sqrt() * sigma);
            worst[4] = worst[4].max((channel.reduction(n, &geometry).unwrap() - direct).abs());
        }
    }

    let ok = worst[0] < 1e-3 && worst[1] < 1e-3 && worst[2] < 1e-8 && worst[3] < 1e-10 && worst[4] < 1e-6;
    verdict(
        ok,
        format!(
            "rate rel {:.1e}, resolution rel {:.1e}, identities rel {:.1e}, pure phase abs {:.1e}, blur sup {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn ks_statistic(table: &LikelihoodTable, mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = table.cdf_at(x);
            (c - i as f64 / n).abs().max((c - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

fn maqro_fixed(n_lambda: usize, n_r_c: usize) -> Scenario {
    let mut s = Scenario::maqro();
    s.experiment.phi0_rad = Some(1.3);
    s.experiment.t2_in_talbot_times = Some(1.4);
    s.grid.n_lambda = n_lambda;
    s.grid.n_r_c = n_r_c;
    s
}

fn normalization() -> Outcome {
    let s = maqro_fixed(120, 120);
    let prepared = prepare(&s).unwrap();
    let model = build_model(&prepared).unwrap();
    let mut like_err = 0.0f64;
    for node in 0..model.grid.len() {
        like_err = like_err.max((model.node_table(node).unwrap().integral() - 1.0).abs());
    }
    let prior = mdip_prior(&model).unwrap();
    let prior_err = (model.grid.integrate(&prior.density) - 1.0).abs();
    let data = sample_positions(&model.reference_table().unwrap(), 1000, 3);
    let post = posterior(&model, &prior, &data).unwrap();
    let post_err = (model.grid.integrate(&post.density) - 1.0).abs();

    let spec = GridSpec::default();
    let area = (spec.lambda_max - spec.lambda_min) * (spec.r_c_max - spec.r_c_min);
    let grid = ThetaGrid::new(&spec).unwrap();
    let measure_err = (grid.integrate(&vec![1.0; grid.len()]) / area - 1.0).abs();

    let small = ThetaGrid::new(&GridSpec { n_lambda: 12, n_r_c: 10, ..GridSpec::default() }).unwrap();
    let mut rng = stream_rng(2024, 0);
    let mut min_kl = f64::INFINITY;
    for _ in 0..10_000 {
        let q: Vec<f64> = (0..small.len()).map(|_| rng.gen::<f64>() + 1e-3).collect();
        // posteriors range from diffuse to nearly degenerate, some with empty nodes
        let sharp = rng.gen_range(0.5..8.0);
        let p: Vec<f64> =
            (0..small.len()).map(|_| if rng.gen::<f64>() < 0.2 { 0.0 } else { rng.gen::<f64>().powf(sharp) }).collect();
        let qn = Prior::from_unnormalized(&small, q).unwrap();
        let pn = match Prior::from_unnormalized(&small, p) {
            Ok(p) => p,
            Err(_) => continue,
        };
        min_kl = min_kl.min(info_gain(&small, &pn.density, &qn.density).unwrap());
    }
    let ok = like_err < 1e-8 && prior_err < 1e-8 && post_err < 1e-8 && measure_err < 1e-6 && min_kl >= 0.0;
    verdict(
        ok,
        format!(
            "likelihood {like_err:.1e} over 14400 nodes, prior {prior_err:.1e}, posterior {post_err:.1e}, \
             grid measure {measure_err:.1e}, min KL over 1e4 pairs {min_kl:.2e} bits"
        ),
    )
}

fn sampler() -> Outcome {
    let n = 100_000;
    let bound = 1.63 / (n as f64).sqrt();
    let x: Vec<f64> = (0..1001).map(|i| -1.0 + 2.0 * i as f64 / 1000.0).collect();
    let uniform = LikelihoodTable::from_unnormalized(x, vec![1.0; 1001]).unwrap();
    let d_uniform = ks_statistic(&uniform, sample_positions(&uniform, n, 11));

    let s = maqro_fixed(4, 4);
    let model = build_model(&prepare(&s).unwrap()).unwrap();
    let fringed = model.reference_table().unwrap();
    let d_fringed = ks_statistic(&fringed, sample_positions(&fringed, n, 12));

    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    output::write_positions_csv(&a, &sample_positions(&fringed, n, 99)).unwrap();
    output::write_positions_csv(&b, &sample_positions(&fringed, n, 99)).unwrap();
    let identical = std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();

    verdict(
        d_uniform < bound && d_fringed < bound && identical,
        format!(
            "KS uniform {d_uniform:.2e}, fringed {d_fringed:.2e} (bound {bound:.2e}); same seed byte-identical: {identical}"
        ),
    )
}

fn desk_posterior() -> Outcome {
    let mut s = Scenario::maqro();
    s.grid.n_lambda = 80;
    s.grid.n_r_c = 80;
    let prepared = prepare(&s).unwrap();
    let coarse = build_model(&prepared).unwrap();
    let data = sample_positions(&coarse.reference_table().unwrap(), 10_000, s.run.seed);

    let bound = |scenario: &Scenario| -> Result<(f64, f64), String> {
        let mut p = prepared.clone();
        p.scenario = scenario.clone();
        let model = build_model(&p).map_err(|e| e.to_string())?;
        let prior = build_prior(scenario, &model).map_err(|e| e.to_string())?;
        let post = posterior(&model, &prior, &data).map_err(|e| e.to_string())?;
        let curve = exclusion_line(&model.grid, &post, &model.columns, &model.interferometer.geometry, 0.95)
            .map_err(|e| e.to_string())?;
        let l = lambda_at_rc(&curve, REFERENCE_R_C).map_err(|e| e.to_string())?;
        Ok((curve.mass, l))
    };
    let mut fine = s.clone();
    fine.grid.n_lambda = 160;
    fine.grid.n_r_c = 160;
    match (bound(&s), bound(&fine)) {
        (Ok((m80, l80)), Ok((m160, l160))) => {
            let change = (l160 / l80 - 1.0).abs();
            verdict(
                (m80 - 0.95).abs() <= 0.005 && (m160 - 0.95).abs() <= 0.005 && change < 0.1,
                format!(
                    "mass below line {m80:.4} (80x80), {m160:.4} (160x160); lambda_c at r_c = 1e-7 m \
                     {l80:.3e} -> {l160:.3e} 1/s, change {:.1}%",
                    100.0 * change
                ),
            )
        }
        (a, b) => Outcome::Fail(format!("80x80: {:?}; 160x160: {:?}", a.err(), b.err())),
    }
}

fn saturation() -> Outcome {
    let s = Scenario::maqro();
    let prepared = prepare(&s).unwrap();
    let model = build_model(&prepared).unwrap();
    let prior = build_prior(&s, &model).unwrap();
    let run = |n: usize| expected_information(&model, &prior, n, 50, s.run.seed, InfoMode::Conditioned, None).unwrap();
    let low = run(3_000);
    let high = run(10_000);
    let diff = (high.mean_bits - low.mean_bits).abs();
    let two_delta = 2.0 * (high.delta_bits.powi(2) + low.delta_bits.powi(2)).sqrt();
    verdict(
        diff < 0.1 * high.mean_bits,
        format!(
            "<H>(N=3e3) = {:.3} +- {:.3}, <H>(N=1e4) = {:.3} +- {:.3} bits, M = 50; difference {:.2}% of the N=1e4 value \
             ({:.3} bits, 2 Delta = {:.3})",
            low.mean_bits,
            low.delta_bits,
            high.mean_bits,
            high.delta_bits,
            100.0 * diff / high.mean_bits,
            diff,
            two_delta
        ),
    )
}

fn pressure_trend(extended: bool) -> Outcome {
    if !extended {
        return Outcome::Skipped("long-running; rerun with `-- --extended` or TALBOT_EXTENDED=1".into());
    }
    let mut rows = Vec::new();
    for p in [1e-16, 1e-15, 1e-14, 1e-13] {
        let mut s = Scenario::maqro();
        s.experiment.pressure_hpa = p;
        let prepared = prepare(&s).unwrap();
        let model = build_model(&prepared).unwrap();
        let prior = build_prior(&s, &model).unwrap();
        let r = expected_information(&model, &prior, s.run.n_points, s.run.mc_iters, s.run.seed, InfoMode::Conditioned, None)
            .unwrap();
        rows.push((p, r.mean_bits, r.delta_bits));
    }
    let ok = rows.windows(2).all(|w| w[1].1 <= w[0].1 + 2.0 * (w[0].2.powi(2) + w[1].2.powi(2)).sqrt());
    let detail = rows.iter().map(|(p, h, d)| format!("{p:.0e} hPa: {h:.3} +- {d:.3}")).collect::<Vec<_>>().join(", ");
    verdict(ok, format!("<H> in bits, M = 200, N = 1e4: {detail}"))
}

fn estimator_cross_check() -> Outcome {
    // two hypotheses: flat and fringed arrival densities on [0, 1]
    let cells = 100;
    let x: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    let flat = LikelihoodTable::from_unnormalized(x.clone(), vec![1.0; cells + 1]).unwrap();
    let fringed = LikelihoodTable::from_unnormalized(
        x.clone(),
        x.iter().map(|xi| 1.0 + 0.8 * (6.0 * PI * xi).cos()).collect(),
    )
    .unwrap();
    let grid = ThetaGrid::from_nodes(vec![1.0, 2.0], vec![1.0], vec![1.0, 1.0]).unwrap();
    let prior = Prior::from_unnormalized(&grid, vec![1.0, 1.0]).unwrap();
    let w = [prior.density[0], prior.density[1]];
    let model = TabulatedModel::new(grid.clone(), vec![flat.clone(), fringed.clone()], 0).unwrap();

    // <H> = int p(x) H(x) dx over x in [0, 1]^2 for two data points
    let (gx, gw) = gauss_legendre(8);
    let mut pts = Vec::with_capacity(cells * gx.len());
    for c in 0..cells {
        let (a, b) = (x[c], x[c + 1]);
        for (t, wt) in gx.iter().zip(&gw) {
            let xi = 0.5 * (a + b) + 0.5 * (b - a) * t;
            pts.push((xi, 0.5 * (b - a) * wt, flat.density(xi), fringed.density(xi)));
        }
    }
    let mut direct = 0.0;
    for &(_, w1, f1, g1) in &pts {
        for &(_, w2, f2, g2) in &pts {
            let l0 = f1 * f2;
            let l1 = g1 * g2;
            let evidence = w[0] * l0 + w[1] * l1;
            let post = [w[0] * l0 / evidence, w[1] * l1 / evidence];
            let h: f64 = post
                .iter()
                .zip(&w)
                .filter(|(p, _)| **p > 0.0)
                .map(|(p, q)| p * (p / q).log2())
                .sum();
            direct += w1 * w2 * evidence * h;
        }
    }

    let reps = 50;
    let mut within = 0;
    let mut worst_z = 0.0f64;
    let (mut sum, mut sum_var) = (0.0, 0.0);
    for rep in 0..reps {
        let r = expected_information(&model, &prior, 2, 400, 1000 + rep, InfoMode::PriorPredictive, None).unwrap();
        let z = (r.mean_bits - direct).abs() / r.delta_bits;
        worst_z = worst_z.max(z);
        if z <= 3.0 {
            within += 1;
        }
        sum += r.mean_bits;
        sum_var += r.delta_bits.powi(2);
    }
    let pooled = sum / reps as f64;
    let pooled_delta = sum_var.sqrt() / reps as f64;
    let pooled_z = (pooled - direct).abs() / pooled_delta;
    verdict(
        within == reps && pooled_z <= 3.0,
        format!(
            "direct <H> = {direct:.5} bits (N = 2); {within}/{reps} runs of M = 400 within 3 Delta (worst {worst_z:.2} Delta); \
             pooled {pooled:.5} +- {pooled_delta:.5} ({pooled_z:.2} Delta)"
        ),
    )
}

fn optimizer_sanity() -> Outcome {
    let mut min_objective = f64::INFINITY;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_round_trip = 0.0f64;
    let mut summary = Vec::new();
    for mass in [1e7, 1e8, 1e9] {
        let mut s = Scenario::maqro();
        s.particle.mass_amu = mass;
        let particle = s.particle().unwrap();
        let cfg = s.experiment_config();
        let t_t = geometry_scales(&cfg, &particle).unwrap().talbot_time;
        let problem = DesignProblem::new(&cfg, &particle, s.theta_ref().unwrap()).unwrap();
        let bounds = DesignBounds::around_talbot_time(t_t);
        for i in 0..=30 {
            for j in 0..=30 {
                let c = ControlVector {
                    phi0: bounds.phi0.0 + (bounds.phi0.1 - bounds.phi0.0) * i as f64 / 30.0,
                    t2: bounds.t2.0 + (bounds.t2.1 - bounds.t2.0) * j as f64 / 30.0,
                };
                min_objective = min_objective.min(problem.objective(c).unwrap());
            }
        }
        let out = optimize_controls(&problem, bounds, 41).unwrap();
        worst_excess = worst_excess.max(local_max_excess(&problem, bounds, &out).unwrap());
        let c = problem.config_with(out.controls);
        let g = geometry_scales(&c, &particle).unwrap();
        let (area, energy) = grating_pulse(out.controls.phi0, &c, &particle, &g).unwrap();
        let back = OpticalResponse::new(&c, &particle).unwrap().phase_for_fluence(energy / area).unwrap();
        worst_round_trip = worst_round_trip.max((back / out.controls.phi0 - 1.0).abs());
        summary.push(format!("{mass:.0e} u: phi0 {:.3}, t2 {:.3} t_T", out.controls.phi0, out.controls.t2 / t_t));
    }
    verdict(
        min_objective >= 0.0 && worst_excess <= 0.0 && worst_round_trip < 1e-10,
        format!(
            "min objective {min_objective:.2e}, worst neighbour gain {worst_excess:.2e}, phase round trip {worst_round_trip:.1e}; {}",
            summary.join("; ")
        ),
    )
}

fn main() {
    let extended = std::env::args().any(|a| a == "--extended")
        || std::env::var("TALBOT_EXTENDED").is_ok_and(|v| !v.is_empty() && v != "0");
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "analytic limits", Box::new(analytic_limits)),
        (2, "normalization", Box::new(normalization)),
        (3, "sampler", Box::new(sampler)),
        (4, "desk-scale posterior", Box::new(desk_posterior)),
        (5, "information saturation", Box::new(saturation)),
        (6, "pressure trend", Box::new(move || pressure_trend(extended))),
        (7, "estimator cross-check", Box::new(estimator_cross_check)),
        (8, "optimizer sanity", Box::new(optimizer_sanity)),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skipped(d) => ("SKIPPED", d),
        };
        println!("criterion {id} ({name}): {tag} [{secs:.1} s] {detail}");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
