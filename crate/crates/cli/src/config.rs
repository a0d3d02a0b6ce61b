//! Run configuration shared by command-line flags and JSON config files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use gcs_core::coherent::Definition;
use gcs_core::numeric::linspace;
use gcs_core::{Branch, LayerKind};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Density,
    Current,
    Energy,
    Uncertainty,
    Fidelity,
    Potentials,
    Coefficients,
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaConfig {
    pub r: f64,
    #[serde(default)]
    pub theta: f64,
}

/// Weight function: the constant `"one"` or `{"table": "path"}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FSpec {
    #[default]
    One,
    Table(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { x_min: -16.0, x_max: 12.0, points: 561 }
    }
}

impl GridConfig {
    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_max: f64,
    pub samples: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { t_max: 25.0, samples: 2501 }
    }
}

/// Closed range sampled at `points` equally spaced values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl RangeConfig {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            vec![self.min]
        } else {
            linspace(self.min, self.max, self.points)
        }
    }
}

/// Optional sweeps over `r` and `theta`; an absent axis uses `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub r: Option<RangeConfig>,
    pub theta: Option<RangeConfig>,
}

fn default_one() -> f64 {
    1.0
}

fn default_tol() -> f64 {
    1e-12
}

fn default_check_tol() -> f64 {
    1e-10
}

fn default_threshold() -> f64 {
    gcs_core::dynamics::DEFAULT_THRESHOLD
}

fn default_n_max() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Free text, ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub command: Command,
    #[serde(default = "default_kind")]
    pub kind: LayerKind,
    #[serde(default = "default_one")]
    pub omega: f64,
    #[serde(default = "default_one")]
    pub k: f64,
    #[serde(default)]
    pub branch: Branch,
    #[serde(default)]
    pub alpha: AlphaConfig,
    #[serde(default = "default_definition")]
    pub definition: Definition,
    #[serde(default)]
    pub f_spec: FSpec,
    /// Extremal state for the displaced-state definition (0 or a root of f).
    #[serde(default)]
    pub extremal: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    /// Evolution times at which densities and currents are evaluated.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    /// Tolerance for the self-test suite.
    #[serde(default = "default_check_tol")]
    pub check_tol: f64,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_kind() -> LayerKind {
    LayerKind::Monolayer
}

fn default_definition() -> Definition {
    Definition::BarutGirardello
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            description: None,
            command,
            kind: default_kind(),
            omega: 1.0,
            k: 1.0,
            branch: Branch::Electron,
            alpha: AlphaConfig::default(),
            definition: default_definition(),
            f_spec: FSpec::One,
            extremal: 0,
            tol: default_tol(),
            grid: GridConfig::default(),
            time: TimeConfig::default(),
            scan: ScanConfig::default(),
            times: Vec::new(),
            threshold: default_threshold(),
            n_max: default_n_max(),
            eps1: None,
            eps2: None,
            check_tol: default_check_tol(),
            output: None,
            format: Format::Csv,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |field: &str, msg: String| Err(CliError::Validation(format!("{field}: {msg}")));
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad("omega", format!("must be positive, got {}", self.omega));
        }
        if !self.k.is_finite() {
            return bad("k", "must be finite".into());
        }
        if !(self.alpha.r >= 0.0 && self.alpha.r.is_finite()) {
            return bad("alpha.r", format!("must be non-negative, got {}", self.alpha.r));
        }
        if !self.alpha.theta.is_finite() {
            return bad("alpha.theta", "must be finite".into());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad("tol", format!("must lie in (0, 1), got {}", self.tol));
        }
        if !(self.check_tol > 0.0 && self.check_tol < 1.0) {
            return bad("check_tol", format!("must lie in (0, 1), got {}", self.check_tol));
        }
        let g = &self.grid;
        if g.points < 2 {
            return bad("grid.points", format!("must be at least 2, got {}", g.points));
        }
        if !(g.x_min.is_finite() && g.x_max.is_finite() && g.x_min < g.x_max) {
            return bad("grid", format!("need finite x_min < x_max, got [{}, {}]", g.x_min, g.x_max));
        }
        if !(self.time.t_max > 0.0 && self.time.t_max.is_finite()) {
            return bad("time.t_max", format!("must be positive, got {}", self.time.t_max));
        }
        if self.time.samples < 2 {
            return bad("time.samples", format!("must be at least 2, got {}", self.time.samples));
        }
        for (name, range) in [("scan.r", self.scan.r), ("scan.theta", self.scan.theta)] {
            if let Some(rg) = range {
                if rg.points == 0 || !(rg.min.is_finite() && rg.max.is_finite()) || rg.min > rg.max {
                    return bad(name, "need finite min <= max and points >= 1".into());
                }
                if name == "scan.r" && rg.min < 0.0 {
                    return bad(name, "r must be non-negative".into());
                }
            }
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return bad("times", "must be finite".into());
        }
        if !self.threshold.is_finite() {
            return bad("threshold", "must be finite".into());
        }
        Ok(())
    }

    /// `(r, theta)` pairs, `r` outer.
    pub fn alphas(&self) -> Vec<(f64, f64)> {
        let rs = self.scan.r.map(|s| s.values()).unwrap_or_else(|| vec![self.alpha.r]);
        let ths = self.scan.theta.map(|s| s.values()).unwrap_or_else(|| vec![self.alpha.theta]);
        rs.iter().flat_map(|&r| ths.iter().map(move |&t| (r, t))).collect()
    }

    pub fn is_sweep(&self) -> bool {
        self.scan.r.is_some() || self.scan.theta.is_some() || !self.times.is_empty()
    }

    /// Resolve relative file references against `dir`.
    pub fn resolve_paths(&mut self, inputs: &Path, outputs: &Path) {
        if let FSpec::Table(p) = &mut self.f_spec {
            if p.is_relative() {
                *p = inputs.join(&*p);
            }
        }
        if let Some(o) = &mut self.output {
            if o.is_relative() {
                *o = outputs.join(&*o);
            }
        }
    }
}

/// A config file holds one run or `{"runs": [...]}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct Batch {
    #[serde(default)]
    #[allow(dead_code)]
    description: Option<String>,
    runs: Vec<RunConfig>,
}

pub fn parse_config(text: &str, origin: &str) -> CliResult<Vec<RunConfig>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("{origin}: {e}")))?;
    let runs = if value.get("runs").is_some() {
        let b: Batch = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("{origin}: {e}")))?;
        b.runs
    } else {
        let r: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("{origin}: {e}")))?;
        vec![r]
    };
    if runs.is_empty() {
        return Err(CliError::Validation(format!("{origin}: runs is empty")));
    }
    for (i, r) in runs.iter().enumerate() {
        r.validate().map_err(|e| CliError::Validation(format!("{origin}: run {i}: {e}")))?;
    }
    Ok(runs)
}

pub fn load_config(path: &Path) -> CliResult<Vec<RunConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}
