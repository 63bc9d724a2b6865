//! Result files. Densities use 17 significant digits so repeated runs can be
//! compared byte for byte; nothing time-dependent is written.

use crate::bayes::{ExclusionBoundary, ExclusionCurve, ThetaGrid};
use crate::error::{invalid, Error, Result};
use crate::information::InfoResult;
use serde::{Deserialize, Serialize};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

pub const TOOL_NAME: &str = "talbot";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Reference points and curves for plots.
pub const LANDMARKS_JSON: &str = include_str!("../../data/landmarks.json");

/// Attached to every JSON artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    pub fn new(seed: u64, config_hash: impl Into<String>) -> Self {
        Self { tool: TOOL_NAME.into(), version: TOOL_VERSION.into(), seed, config_hash: config_hash.into() }
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Grid density as `log10_rc,log10_lambda,density`, in node order.
pub fn write_density_csv(path: &Path, grid: &ThetaGrid, density: &[f64]) -> Result<()> {
    let mut out = String::with_capacity(64 * density.len() + 32);
    out.push_str("log10_rc,log10_lambda,density\n");
    for (node, d) in density.iter().enumerate() {
        let (lambda, r_c) = grid.theta(node);
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", r_c.log10(), lambda.log10(), d));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Density values read back from [`write_density_csv`] output.
pub fn read_density_csv(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        log10_rc: f64,
        log10_lambda: f64,
        density: f64,
    }
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    reader
        .deserialize::<Row>()
        .map(|r| r.map(|r| (r.log10_rc, r.log10_lambda, r.density)).map_err(csv_error))
        .collect()
}

/// Sidecar for a density file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySummary {
    pub kind: String,
    pub prior: String,
    /// `sum weight * density` over the grid.
    pub normalization: f64,
    pub n_points: usize,
    pub n_lambda: usize,
    pub n_r_c: usize,
    pub lambda_range_per_s: [f64; 2],
    pub r_c_range_m: [f64; 2],
    pub information_bits: Option<f64>,
    pub provenance: Provenance,
}

/// Exclusion line as `r_c_m,lambda_c_per_s`.
pub fn write_exclusion_csv(path: &Path, curve: &ExclusionCurve) -> Result<()> {
    let mut out = String::from("r_c_m,lambda_c_per_s\n");
    for (r, l) in &curve.points {
        out.push_str(&format!("{r:.16e},{l:.16e}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_exclusion_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        r_c_m: f64,
        lambda_c_per_s: f64,
    }
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    reader
        .deserialize::<Row>()
        .map(|r| r.map(|r| (r.r_c_m, r.lambda_c_per_s)).map_err(csv_error))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionSummary {
    pub status: String,
    pub error: Option<String>,
    pub confidence: f64,
    pub strength: Option<f64>,
    pub mass_below: Option<f64>,
    pub lambda_c_at_1e_7_m: Option<f64>,
    pub provenance: Provenance,
}

pub fn write_positions_csv(path: &Path, x: &[f64]) -> Result<()> {
    let mut out = String::with_capacity(26 * x.len() + 8);
    out.push_str("x_m\n");
    for v in x {
        out.push_str(&format!("{v:.16e}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_positions_csv(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x_m"] {
        return Err(invalid(format!("{}: expected the single column `x_m`", path.display())));
    }
    reader
        .records()
        .map(|r| {
            let r = r.map_err(csv_error)?;
            r[0].trim().parse::<f64>().map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
        })
        .collect()
}

pub const INFO_HEADER: &str = "N,M,mode,H_bits,delta_bits,seed";

/// Append `N,M,mode,H_bits,delta_bits,seed`, writing the header to a new file.
pub fn append_info_row(path: &Path, r: &InfoResult) -> Result<()> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut text = String::new();
    if fresh {
        text.push_str(INFO_HEADER);
        text.push('\n');
    }
    text.push_str(&format!(
        "{},{},{},{:.16e},{:.16e},{}\n",
        r.n_points,
        r.completed,
        r.mode.label(),
        r.mean_bits,
        r.delta_bits,
        r.seed
    ));
    file.write_all(text.as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoSummary {
    pub mode: String,
    pub n_points: usize,
    pub iterations: usize,
    pub completed: usize,
    pub partial: bool,
    pub mean_bits: f64,
    pub delta_bits: f64,
    pub prior: String,
    pub provenance: Provenance,
}

/// One point of an information sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub variable: String,
    pub value: f64,
    pub h_bits: Option<f64>,
    pub delta_bits: Option<f64>,
    pub phi0_rad: Option<f64>,
    pub t2_s: Option<f64>,
    /// `ok` or the error that stopped this point.
    pub status: String,
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(["variable", "value", "H_bits", "delta_bits", "phi0_rad", "t2_s", "status"]).map_err(csv_error)?;
    let num = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.variable.clone(),
            format!("{:e}", r.value),
            num(r.h_bits),
            num(r.delta_bits),
            num(r.phi0_rad),
            num(r.t2_s),
            r.status.clone(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Previous-experiment limits with header `r_c_m,lambda_c_max_per_s`.
pub fn read_boundary_csv(path: &Path) -> Result<ExclusionBoundary> {
    #[derive(Deserialize)]
    struct Row {
        r_c_m: f64,
        lambda_c_max_per_s: f64,
    }
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| invalid(format!("cannot read boundary {}: {e}", path.display())))?;
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["r_c_m", "lambda_c_max_per_s"] {
        return Err(invalid(format!("{}: header must be `r_c_m,lambda_c_max_per_s`", path.display())));
    }
    let points = reader
        .deserialize::<Row>()
        .map(|r| {
            r.map(|r| (r.r_c_m, r.lambda_c_max_per_s))
                .map_err(|e| invalid(format!("{}: {e}", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    ExclusionBoundary::new(points)
}
