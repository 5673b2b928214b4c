//! Cartesian experiment grids over datasets, group constructions, weight
//! scales and solver options, with a status summary table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ogl_core::outer::{OuterOption, TerminalStatus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::output::{write_atomic, write_csv, write_json};
use crate::run::{build_problem, lambda_min, run_problem, RunSummary};

const STATUSES: [TerminalStatus; 4] = [
    TerminalStatus::Solved,
    TerminalStatus::IterLimit,
    TerminalStatus::TimeLimit,
    TerminalStatus::NumericalDifficulties,
];

/// Grid axes. In a grid file these keys sit next to the flat
/// [`ExperimentConfig`] keys, which form the shared base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridAxes {
    pub datasets: Vec<String>,
    pub ratios: Vec<f64>,
    pub grpsizes: Vec<usize>,
    pub lambda_fractions: Vec<f64>,
    pub options: Vec<OuterOption>,
    /// Solves per instance; reported times are their mean.
    pub repeats: usize,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
}

impl Default for GridAxes {
    fn default() -> Self {
        GridAxes {
            datasets: vec!["synthetic".into()],
            ratios: vec![0.1, 0.2, 0.3],
            grpsizes: vec![10, 20],
            lambda_fractions: vec![0.1, 0.01],
            options: vec![OuterOption::Option1, OuterOption::Option2, OuterOption::Option3],
            repeats: 1,
            threads: 0,
        }
    }
}

const AXIS_KEYS: [&str; 7] = ["datasets", "ratios", "grpsizes", "lambda_fractions", "options", "repeats", "threads"];

#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub axes: GridAxes,
    pub base: ExperimentConfig,
}

impl GridConfig {
    pub fn from_table(mut table: toml::Table) -> Result<Self> {
        let mut axes = toml::Table::new();
        for key in AXIS_KEYS {
            if let Some(v) = table.remove(key) {
                axes.insert(key.to_string(), v);
            }
        }
        let axes: GridAxes = toml::Value::Table(axes)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        // The fraction comes from the axis; a file-level scale would conflict.
        table.remove("lambda");
        table.remove("lambda_fraction");
        let base = ExperimentConfig::from_table(table)?;
        let grid = GridConfig { axes, base };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.axes;
        if a.datasets.is_empty()
            || a.ratios.is_empty()
            || a.grpsizes.is_empty()
            || a.lambda_fractions.is_empty()
            || a.options.is_empty()
        {
            return Err(Error::Config("every grid axis needs at least one value".into()));
        }
        for cfg in self.configs() {
            cfg.validate()?;
        }
        Ok(())
    }

    /// Every experiment of the grid, in a fixed order.
    pub fn configs(&self) -> Vec<ExperimentConfig> {
        let a = &self.axes;
        let mut out = Vec::new();
        for dataset in &a.datasets {
            for &ratio in &a.ratios {
                for &grpsize in &a.grpsizes {
                    for &frac in &a.lambda_fractions {
                        for &option in &a.options {
                            out.push(ExperimentConfig {
                                dataset: dataset.clone(),
                                ratio,
                                grpsize,
                                lambda: None,
                                lambda_fraction: Some(frac),
                                option,
                                ..self.base.clone()
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Counts of terminal statuses per option.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StatusTable {
    pub rows: BTreeMap<String, BTreeMap<String, usize>>,
}

#[derive(Serialize)]
struct StatusRow<'a> {
    option: &'a str,
    solved: usize,
    iter_limit: usize,
    time_limit: usize,
    numerical_difficulties: usize,
    total: usize,
}

impl StatusTable {
    pub fn from_summaries(summaries: &[RunSummary]) -> Self {
        let mut rows: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for s in summaries {
            let row = rows.entry(s.option.to_string()).or_insert_with(|| {
                STATUSES.iter().map(|st| (st.to_string(), 0)).collect()
            });
            *row.entry(s.status.to_string()).or_default() += 1;
        }
        StatusTable { rows }
    }

    pub fn count(&self, option: OuterOption, status: TerminalStatus) -> usize {
        self.rows
            .get(&option.to_string())
            .and_then(|r| r.get(&status.to_string()))
            .copied()
            .unwrap_or(0)
    }

    fn csv_rows(&self) -> Vec<StatusRow<'_>> {
        self.rows
            .iter()
            .map(|(opt, r)| {
                let get = |s: TerminalStatus| r.get(&s.to_string()).copied().unwrap_or(0);
                StatusRow {
                    option: opt,
                    solved: get(TerminalStatus::Solved),
                    iter_limit: get(TerminalStatus::IterLimit),
                    time_limit: get(TerminalStatus::TimeLimit),
                    numerical_difficulties: get(TerminalStatus::NumericalDifficulties),
                    total: r.values().sum(),
                }
            })
            .collect()
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<10} {:>8} {:>10} {:>10} {:>22} {:>7}",
            "option", "solved", "iter_limit", "time_limit", "numerical_difficulties", "total"
        );
        for r in self.csv_rows() {
            let _ = writeln!(
                s,
                "{:<10} {:>8} {:>10} {:>10} {:>22} {:>7}",
                r.option, r.solved, r.iter_limit, r.time_limit, r.numerical_difficulties, r.total
            );
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join("status_table.txt"), self.to_text().as_bytes())?;
        write_csv(&dir.join("status_table.csv"), &self.csv_rows())
    }
}

/// Runs the whole grid under `out_dir`: one subdirectory per run, plus
/// `summaries.json`, `status_table.txt` and `status_table.csv`.
pub fn run_grid(grid: &GridConfig, out_dir: &Path) -> Result<(Vec<RunSummary>, StatusTable)> {
    grid.validate()?;
    let configs = grid.configs();

    // Lambda_min depends only on the dataset and the group construction, so
    // it is computed once per such pair.
    let mut keys: Vec<(String, f64, usize)> = Vec::new();
    for c in &configs {
        let key = (c.dataset.clone(), c.ratio, c.grpsize);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(grid.axes.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let summaries = pool.install(|| -> Result<Vec<RunSummary>> {
        let problems: Vec<_> = keys
            .par_iter()
            .map(|(dataset, ratio, grpsize)| {
                let cfg = ExperimentConfig {
                    dataset: dataset.clone(),
                    ratio: *ratio,
                    grpsize: *grpsize,
                    ..grid.base.clone()
                };
                let problem = build_problem(&cfg)?;
                let lmin = lambda_min(&problem, &cfg)?;
                Ok((problem, lmin))
            })
            .collect::<Result<_>>()?;

        let mut summaries: Vec<RunSummary> = configs
            .par_iter()
            .map(|cfg| {
                let k = keys
                    .iter()
                    .position(|key| key.0 == cfg.dataset && key.1 == cfg.ratio && key.2 == cfg.grpsize)
                    .expect("every config has a problem");
                let (problem, lmin) = &problems[k];
                let frac = cfg.lambda_fraction.expect("grid configs use fractions");
                let name = crate::run::instance_name(
                    &problem.label,
                    cfg.ratio,
                    cfg.grpsize,
                    &crate::config::LambdaSpec::FractionOfMin(frac),
                );
                let dir = out_dir.join(format!("{name}_{}", cfg.option));
                let out = run_problem(problem, cfg, frac * lmin, Some(*lmin), grid.axes.repeats, &dir)?;
                log::info!("{}: {}", out.summary.id, out.summary.status);
                Ok(out.summary)
            })
            .collect::<Result<_>>()?;
        summaries.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(summaries)
    })?;

    let table = StatusTable::from_summaries(&summaries);
    write_json(&out_dir.join("summaries.json"), &summaries)?;
    table.write(out_dir)?;
    Ok((summaries, table))
}
