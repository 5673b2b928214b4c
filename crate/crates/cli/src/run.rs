//! Building a problem from a configuration and running one solve.

use std::path::{Path, PathBuf};

use ogl_core::data_io::{load_dataset, scale_features};
use ogl_core::groups::generate_groups;
use ogl_core::lambda_min::{find_lambda_min, LambdaSearch};
use ogl_core::losses::Dataset;
use ogl_core::metrics::support_of;
use ogl_core::outer::{solve, OuterOption, SolveOutput, SubproblemSolver, TerminalStatus};
use ogl_core::synthetic::logistic_dataset;
use ogl_core::{GroupStructure, LogisticLoss};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, LambdaSpec, DATA_DIR_ENV};
use crate::error::{Error, Result};
use crate::output::{write_csv, write_json};

/// Logistic loss on a dataset with its group structure (weights unset).
#[derive(Clone, Debug)]
pub struct Problem {
    pub label: String,
    pub loss: LogisticLoss,
    pub groups: Vec<Vec<usize>>,
}

impl Problem {
    pub fn n(&self) -> usize {
        self.loss.data().num_features()
    }

    pub fn with_scale(&self, lambda: f64) -> Result<GroupStructure> {
        Ok(GroupStructure::with_scaled_weights(self.n(), self.groups.clone(), lambda)?)
    }
}

fn resolve_path(dataset: &str) -> Result<PathBuf> {
    let direct = PathBuf::from(dataset);
    if direct.exists() {
        return Ok(direct);
    }
    if direct.is_relative() {
        if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
            let joined = Path::new(&dir).join(&direct);
            if joined.exists() {
                return Ok(joined);
            }
        }
    }
    Err(Error::DatasetNotFound(dataset.to_string()))
}

fn dataset_label(path: &Path) -> String {
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = name.strip_suffix(".gz").unwrap_or(&name);
    name.strip_suffix(".libsvm").unwrap_or(name).to_string()
}

/// Loads (or generates) and scales the dataset named in `cfg`.
pub fn load_data(cfg: &ExperimentConfig) -> Result<(String, Dataset)> {
    let (label, data) = if cfg.is_synthetic() {
        let seed = match cfg.dataset.split_once(':') {
            Some((_, s)) => s
                .parse()
                .map_err(|_| Error::Config(format!("bad synthetic seed in `{}`", cfg.dataset)))?,
            None => cfg.seed,
        };
        let data = logistic_dataset(cfg.synthetic_points, cfg.synthetic_features, cfg.synthetic_density, seed)?;
        (format!("synthetic-s{seed}"), data)
    } else {
        let path = resolve_path(&cfg.dataset)?;
        (dataset_label(&path), load_dataset(&path, cfg.n_features)?)
    };
    Ok((label, scale_features(data, cfg.scaling)?))
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    let (label, data) = load_data(cfg)?;
    let n = data.num_features();
    Ok(Problem {
        label,
        groups: generate_groups(n, cfg.ratio, cfg.grpsize)?,
        loss: LogisticLoss::new(data),
    })
}

/// `Lambda_min` of a problem, searched with the experiment's solver settings.
pub fn lambda_min(problem: &Problem, cfg: &ExperimentConfig) -> Result<f64> {
    let res = find_lambda_min(&problem.loss, problem.n(), &problem.groups, &cfg.outer()?, &LambdaSearch::default())?;
    Ok(res.lambda_min)
}

/// Summary of one run, written as `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Identifies the problem instance independently of the solver option.
    pub instance: String,
    pub id: String,
    pub dataset: String,
    pub ratio: f64,
    pub grpsize: usize,
    pub lambda: f64,
    pub lambda_fraction: Option<f64>,
    pub lambda_min: Option<f64>,
    pub option: OuterOption,
    pub solver: SubproblemSolver,
    pub status: TerminalStatus,
    pub message: Option<String>,
    pub iterations: usize,
    pub objective: f64,
    pub zero_groups: usize,
    pub nonzero_groups: usize,
    /// Mean wall time over `repeats` identical solves.
    pub time_s: f64,
    pub repeats: usize,
}

pub fn instance_name(label: &str, ratio: f64, grpsize: usize, lambda: &LambdaSpec) -> String {
    let lam = match lambda {
        LambdaSpec::Absolute(l) => format!("lam{l}"),
        LambdaSpec::FractionOfMin(f) => format!("frac{f}"),
    };
    format!("{label}_r{ratio}_g{grpsize}_{lam}")
}

/// A solved run and where its files went.
pub struct RunOutput {
    pub summary: RunSummary,
    pub solve: SolveOutput,
    pub dir: PathBuf,
}

/// Solves `problem` at scale `lambda` `repeats` times, writing `trace.csv`
/// and `summary.json` under `dir`.
pub fn run_problem(
    problem: &Problem,
    cfg: &ExperimentConfig,
    lambda: f64,
    lambda_min: Option<f64>,
    repeats: usize,
    dir: &Path,
) -> Result<RunOutput> {
    let outer = cfg.outer()?;
    let gs = problem.with_scale(lambda)?;
    let repeats = repeats.max(1);
    let mut total_time = 0.0;
    let mut out = None;
    for _ in 0..repeats {
        let o = solve(&problem.loss, &gs, &outer)?;
        total_time += o.record.time_s;
        out = Some(o);
    }
    let out = out.expect("at least one repeat");
    let spec = cfg.lambda_spec()?;
    let instance = instance_name(&problem.label, cfg.ratio, cfg.grpsize, &spec);
    let nonzero = support_of(&out.x, &gs, 0.0).len();
    let summary = RunSummary {
        id: format!("{instance}_{}", cfg.option),
        instance,
        dataset: problem.label.clone(),
        ratio: cfg.ratio,
        grpsize: cfg.grpsize,
        lambda,
        lambda_fraction: cfg.lambda_fraction,
        lambda_min,
        option: cfg.option,
        solver: cfg.solver,
        status: out.status(),
        message: out.record.message.clone(),
        iterations: out.record.iterations(),
        objective: out.objective,
        zero_groups: gs.num_groups() - nonzero,
        nonzero_groups: nonzero,
        time_s: total_time / repeats as f64,
        repeats,
    };
    write_csv(&dir.join("trace.csv"), &out.record.rows)?;
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(RunOutput {
        summary,
        solve: out,
        dir: dir.to_path_buf(),
    })
}

/// Builds, resolves the weight scale, solves and writes one experiment into
/// `cfg.output_dir`.
pub fn run_single(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let problem = build_problem(cfg)?;
    let (lambda, lmin, frac) = match cfg.lambda_spec()? {
        LambdaSpec::Absolute(l) => (l, None, None),
        LambdaSpec::FractionOfMin(f) => {
            let m = lambda_min(&problem, cfg)?;
            (f * m, Some(m), Some(f))
        }
    };
    let cfg = &ExperimentConfig {
        lambda_fraction: frac,
        ..cfg.clone()
    };
    run_problem(&problem, cfg, lambda, lmin, 1, &cfg.output_dir)
}
