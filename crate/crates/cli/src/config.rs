//! Flat experiment configuration read from TOML, with per-key overrides.

use std::path::{Path, PathBuf};

use ogl_core::data_io::ScalingMode;
use ogl_core::outer::{AlphaMode, EpsSchedule, OuterConfig, OuterOption, SubproblemSolver};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable naming the directory searched for relative dataset paths.
pub const DATA_DIR_ENV: &str = "OGL_DATA_DIR";

/// Weight scale, as a multiple of `Lambda_min`, used when none is configured.
pub const DEFAULT_LAMBDA_FRACTION: f64 = 0.1;

/// One experiment. `dataset` is a LIBSVM path, `synthetic` (generated from
/// `seed`), or `synthetic:<seed>`. Exactly one of `lambda` and
/// `lambda_fraction` (a multiple of the dataset's `Lambda_min`) must be set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub scaling: ScalingMode,
    pub n_features: Option<usize>,
    pub synthetic_points: usize,
    pub synthetic_features: usize,
    pub synthetic_density: f64,
    pub seed: u64,

    pub ratio: f64,
    pub grpsize: usize,
    pub lambda: Option<f64>,
    pub lambda_fraction: Option<f64>,

    pub option: OuterOption,
    pub solver: SubproblemSolver,
    pub alpha_mode: AlphaMode,
    pub xi: f64,
    pub eta: f64,
    pub zeta: f64,
    pub alpha0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub c_const: f64,
    pub iota: f64,
    pub max_alpha_increases: usize,
    /// `none`, `strategy1` (uses `psi`) or `strategy2` (uses `omega`).
    pub schedule: String,
    pub psi: f64,
    pub omega: f64,

    pub eps_tol: f64,
    pub max_iters: usize,
    pub max_time_s: f64,
    pub inner_max_iters: usize,

    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let o = OuterConfig::default();
        ExperimentConfig {
            dataset: "synthetic".into(),
            scaling: ScalingMode::None,
            n_features: None,
            synthetic_points: 200,
            synthetic_features: 50,
            synthetic_density: 0.3,
            seed: 0,
            ratio: 0.1,
            grpsize: 10,
            lambda: None,
            lambda_fraction: None,
            option: o.option,
            solver: o.solver,
            alpha_mode: o.alpha_mode,
            xi: o.xi,
            eta: o.eta,
            zeta: o.zeta,
            alpha0: o.alpha0,
            gamma1: o.gamma1,
            gamma2: o.gamma2,
            c_const: o.c_const,
            iota: o.iota,
            max_alpha_increases: o.max_alpha_increases,
            schedule: "none".into(),
            psi: 0.5,
            omega: 0.5,
            eps_tol: o.eps_tol,
            max_iters: o.max_iters,
            max_time_s: o.max_time_s,
            inner_max_iters: o.inner.max_iters,
            output_dir: PathBuf::from("ogl-out"),
        }
    }
}

/// Where the weight scale comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaSpec {
    Absolute(f64),
    FractionOfMin(f64),
}

impl ExperimentConfig {
    pub fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn outer(&self) -> Result<OuterConfig> {
        let schedule = match self.schedule.as_str() {
            "none" => EpsSchedule::None,
            "strategy1" => EpsSchedule::Strategy1 { psi: self.psi },
            "strategy2" => EpsSchedule::Strategy2 { omega: self.omega },
            other => return Err(Error::Config(format!("unknown schedule `{other}`"))),
        };
        let mut o = OuterConfig {
            option: self.option,
            xi: self.xi,
            eta: self.eta,
            zeta: self.zeta,
            alpha0: self.alpha0,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            c_const: self.c_const,
            eps_tol: self.eps_tol,
            max_iters: self.max_iters,
            max_time_s: self.max_time_s,
            alpha_mode: self.alpha_mode,
            max_alpha_increases: self.max_alpha_increases,
            schedule,
            iota: self.iota,
            solver: self.solver,
            ..Default::default()
        };
        o.inner.max_iters = self.inner_max_iters;
        o.validate()?;
        Ok(o)
    }

    pub fn lambda_spec(&self) -> Result<LambdaSpec> {
        match (self.lambda, self.lambda_fraction) {
            (Some(l), None) if l > 0.0 && l.is_finite() => Ok(LambdaSpec::Absolute(l)),
            (None, Some(f)) if f > 0.0 && f.is_finite() => Ok(LambdaSpec::FractionOfMin(f)),
            (Some(_), Some(_)) => Err(Error::Config("set only one of `lambda` and `lambda_fraction`".into())),
            (None, None) => Ok(LambdaSpec::FractionOfMin(DEFAULT_LAMBDA_FRACTION)),
            _ => Err(Error::Config("the weight scale must be positive and finite".into())),
        }
    }

    /// Checks every range before anything runs.
    pub fn validate(&self) -> Result<()> {
        self.outer()?;
        self.lambda_spec()?;
        if !(self.ratio >= 0.0 && self.ratio < 1.0) {
            return Err(Error::Config(format!("ratio must lie in [0, 1), got {}", self.ratio)));
        }
        if self.grpsize == 0 {
            return Err(Error::Config("grpsize must be positive".into()));
        }
        if self.inner_max_iters == 0 {
            return Err(Error::Config("inner_max_iters must be positive".into()));
        }
        if self.is_synthetic() {
            if self.synthetic_points == 0 || self.synthetic_features == 0 {
                return Err(Error::Config("synthetic dimensions must be positive".into()));
            }
            if !(self.synthetic_density > 0.0 && self.synthetic_density <= 1.0) {
                return Err(Error::Config(format!(
                    "synthetic_density must lie in (0, 1], got {}",
                    self.synthetic_density
                )));
            }
        }
        Ok(())
    }

    pub fn is_synthetic(&self) -> bool {
        self.dataset == "synthetic" || self.dataset.starts_with("synthetic:")
    }
}

/// Reads a TOML file into a table; a missing path gives an empty table.
pub fn read_table(path: Option<&Path>) -> Result<toml::Table> {
    let Some(path) = path else {
        return Ok(toml::Table::new());
    };
    let text = std::fs::read_to_string(path)?;
    text.parse::<toml::Table>().map_err(|e| Error::ConfigFile {
        path: path.display().to_string(),
        msg: e.message().to_string(),
    })
}

/// Applies a `key=value` override. The value is read as a TOML literal when
/// possible and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    table.insert(key.to_string(), value);
    Ok(())
}

/// Inserts `value` under `key`, replacing any file value.
pub fn set<V: Into<toml::Value>>(table: &mut toml::Table, key: &str, value: Option<V>) {
    if let Some(v) = value {
        table.insert(key.to_string(), v.into());
    }
}
