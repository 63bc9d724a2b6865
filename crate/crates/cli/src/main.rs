use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use talbot_core::cli_io::{self, PriorChoice, Scenario, SweepSpec, SweepVariable, REFERENCE_R_C};
use talbot_core::information::InfoMode;
use talbot_core::{Error, Result};

/// Talbot interferometry with levitated nanospheres: simulation, CSL
/// posteriors, exclusion lines, expected information and control design.
#[derive(Parser)]
#[command(name = "talbot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario TOML file; the MAQRO-like preset when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Data points per run or realisation.
    #[arg(long)]
    n_points: Option<usize>,
    /// Monte-Carlo realisations.
    #[arg(long)]
    mc_iters: Option<usize>,
    /// `mdip` or `experimental:PATH`.
    #[arg(long)]
    prior: Option<PriorChoice>,
    /// Allow the long-running built-in sweeps.
    #[arg(long)]
    extended: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Draw arrival positions at the configured true hypothesis.
    Simulate(Common),
    /// Prior, posterior and exclusion line from simulated data.
    Posterior(Common),
    /// Exclusion-line value of lambda_c at one r_c.
    Exclusion {
        #[command(flatten)]
        common: Common,
        /// Read `exclusion.csv` from this directory instead of running the posterior.
        #[arg(long)]
        from: Option<PathBuf>,
        #[arg(long, default_value_t = REFERENCE_R_C)]
        r_c: f64,
    },
    /// Expected information gain.
    Info {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<InfoMode>,
    },
    /// Expected information over a list of values of one quantity.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// mass, pressure, drift_rate or n_points.
        #[arg(long)]
        variable: Option<SweepVariable>,
        /// Comma-separated values in the units of the scenario keys.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Keep the base controls at every point.
        #[arg(long)]
        no_reoptimize: bool,
    },
    /// Optimise the grating phase and second flight time.
    Design(Common),
}

fn parse_mode(s: &str) -> std::result::Result<InfoMode, String> {
    match s {
        "conditioned" => Ok(InfoMode::Conditioned),
        "prior-predictive" => Ok(InfoMode::PriorPredictive),
        _ => Err(format!("unknown mode `{s}`; use conditioned or prior-predictive")),
    }
}

fn scenario(common: &Common) -> Result<Scenario> {
    let mut s = match &common.config {
        Some(path) => Scenario::load(path)?,
        None => Scenario::maqro(),
    };
    if let Some(seed) = common.seed {
        s.run.seed = seed;
    }
    if let Some(n) = common.n_points {
        s.run.n_points = n;
    }
    if let Some(m) = common.mc_iters {
        s.run.mc_iters = m;
    }
    if let Some(p) = &common.prior {
        s.run.prior = p.clone();
    }
    s.validate()?;
    Ok(s)
}

/// Long-running sweeps run under `--extended` when none is given.
fn extended_sweeps() -> Vec<SweepSpec> {
    vec![
        SweepSpec { variable: SweepVariable::Pressure, values: vec![1e-16, 1e-15, 1e-14, 1e-13], optimize_each: true },
        SweepSpec {
            variable: SweepVariable::Mass,
            values: vec![1e7, 3e7, 1e8, 3e8, 1e9, 3e9, 1e10],
            optimize_each: true,
        },
    ]
}

fn print_sweep(rows: &[cli_io::SweepRow]) {
    for r in rows {
        match (r.h_bits, r.delta_bits) {
            (Some(h), Some(d)) => println!("{} = {:e}: H = {h:.6} +- {d:.6} bits", r.variable, r.value),
            _ => println!("{} = {:e}: failed: {}", r.variable, r.value, r.status),
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let s = scenario(&common)?;
            let x = cli_io::run_simulate(&s, &common.out)?;
            println!("wrote {} positions to {}", x.len(), common.out.join("positions.csv").display());
        }
        Command::Posterior(common) => {
            let s = scenario(&common)?;
            let a = cli_io::run_posterior(&s, &common.out)?;
            println!("controls: phi0 = {:.6} rad, t2 = {:.6} t_T", a.controls.phi0_rad, a.controls.t2_in_talbot_times);
            if let Some(h) = a.information_bits {
                println!("information gain: {h:.6} bits");
            }
            println!("exclusion line: mass below {:.4} at strength {:e}", a.curve.mass, a.curve.strength);
            if let Some(l) = a.lambda_at_reference {
                println!("lambda_c bound at r_c = 1e-7 m: {l:e} 1/s");
            }
            println!("artifacts in {}", common.out.display());
        }
        Command::Exclusion { common, from, r_c } => {
            let dir = match from {
                Some(dir) => dir,
                None => {
                    let s = scenario(&common)?;
                    cli_io::run_posterior(&s, &common.out)?;
                    common.out.clone()
                }
            };
            let l = cli_io::lambda_from_artifacts(&dir, r_c)?;
            println!("lambda_c bound at r_c = {r_c:e} m: {l:e} 1/s");
        }
        Command::Info { common, mode } => {
            let mut s = scenario(&common)?;
            if let Some(m) = mode {
                s.run.mode = m;
            }
            let r = cli_io::run_info(&s, Some(&common.out), None)?;
            println!(
                "<H> = {:.6} +- {:.6} bits (N = {}, M = {}, {})",
                r.mean_bits,
                r.delta_bits,
                r.n_points,
                r.completed,
                r.mode.label()
            );
        }
        Command::Sweep { common, variable, values, no_reoptimize } => {
            let s = scenario(&common)?;
            let sweeps = match (variable, values.is_empty(), &s.sweep) {
                (Some(variable), false, _) => {
                    vec![SweepSpec { variable, values, optimize_each: !no_reoptimize }]
                }
                (Some(_), true, _) | (None, false, _) => {
                    return Err(Error::InvalidConfig("--variable and --values go together".into()));
                }
                (None, true, Some(spec)) => vec![spec.clone()],
                (None, true, None) if common.extended => extended_sweeps(),
                (None, true, None) => {
                    return Err(Error::InvalidConfig(
                        "no sweep given: use --variable/--values, a [sweep] table, or --extended".into(),
                    ))
                }
            };
            let several = sweeps.len() > 1;
            for spec in sweeps {
                let out: PathBuf =
                    if several { common.out.join(spec.variable.label()) } else { common.out.clone() };
                let rows = cli_io::run_info_sweep(&s, &spec, Some(Path::new(&out)))?;
                print_sweep(&rows);
            }
        }
        Command::Design(common) => {
            let s = scenario(&common)?;
            let c = cli_io::run_design(&s, Some(&common.out))?;
            println!("phi0 = {:.10} rad", c.phi0_rad);
            println!("t2 = {:e} s ({:.6} t_T)", c.t2_s, c.t2_in_talbot_times);
            if let (Some(sin), Some(red)) = (c.nu_sin, c.nu_red) {
                println!("nu_sin = {sin:.6}, nu_red = {red:.6}");
            }
            println!("pulse: spot area {:e} m^2, energy {:e} J", c.pulse_spot_area_m2, c.pulse_energy_j);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
