//! Versioned JSON reports and CSV artifacts.
//!
//! Floats are written in their shortest round-trip decimal form, so a report
//! re-parses to bit-identical values and identical inputs give identical bytes.

use std::path::Path;

use dispctl_core::eigen::{Criterion, GapEntry};
use dispctl_core::scenario::Scenario;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Common envelope: schema version, command, and the exact scenario that ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<B> {
    pub schema: u32,
    pub command: String,
    pub scenario: Scenario,
    #[serde(flatten)]
    pub body: B,
}

impl<B> Report<B> {
    pub fn new(command: &str, scenario: &Scenario, body: B) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            command: command.to_string(),
            scenario: scenario.clone(),
            body,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeBody {
    pub symbol: String,
    pub criterion: Criterion,
    pub n0: usize,
    pub k1_star: usize,
    pub gamma: f64,
    pub profile: Vec<GapEntry>,
    pub clusters: Vec<Vec<i64>>,
    pub representatives: Vec<i64>,
    /// `λₖ` for `k = −N..=N`.
    pub lambdas: Vec<f64>,
    /// Absent when no criterion applies.
    pub controllability_time: Option<f64>,
}

/// How many clusters each moment formula handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SolveCounts {
    pub simple: usize,
    pub pair: usize,
    pub block: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesizeBody {
    /// Control coefficients `hⱼ`, `j = −N..=N`.
    pub h_re: Vec<f64>,
    pub h_im: Vec<f64>,
    pub residual_max: f64,
    pub control_norm: f64,
    pub nu_empirical: f64,
    pub gram_condition: f64,
    pub solves: SolveCounts,
    /// Pair-solved modes whose determinant fell below the resolution floor.
    pub under_resolved_pairs: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateBody {
    /// `‖u(T) − u₁‖_{H^s} / ‖u₁‖_{H^s}`, or the absolute error when `u₁ = 0`.
    pub steering_error: f64,
    pub residual_max: f64,
    pub control_norm: f64,
    pub nu_empirical: f64,
    pub mean_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizeBody {
    /// `gg_star`, `gramian_inverse` or `zero`.
    pub feedback: String,
    /// Least-squares slope of `ln‖u(t) − û(0)‖_{H^s}`; negative when decaying.
    pub fitted_rate: f64,
    pub fit_residual: f64,
    pub delta_sq: f64,
    pub lambda_target: Option<f64>,
    pub gramian_min_eig: Option<f64>,
    pub mean_drift: f64,
}

/// One point of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub dir: String,
    pub exit_code: i32,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepIndex {
    pub schema: u32,
    pub command: String,
    pub param: String,
    pub points: Vec<SweepPoint>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes a CSV with a header row; every row must match the header width.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Config(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format_float(*v))).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Shortest round-trip form, switching to exponent notation for extreme magnitudes.
pub fn format_float(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| "null".to_string())
}

/// Header of the trajectory CSV.
pub fn trajectory_header() -> Vec<String> {
    ["time", "hs_norm", "mean_re", "mean_im"].map(String::from).to_vec()
}
