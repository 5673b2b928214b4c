use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ogl_bench::compare::{compare, load_summaries, pair_up, profile_of, select};
use ogl_bench::config::{apply_override, read_table, set, ExperimentConfig};
use ogl_bench::grid::{run_grid, GridConfig};
use ogl_bench::output::{write_csv, write_json};
use ogl_bench::run::{build_problem, lambda_min, run_single};
use ogl_bench::Result;
use ogl_core::outer::{OuterOption, TerminalStatus};

/// Runs and compares inexact proximal-gradient experiments.
///
/// Relative dataset paths that do not exist are looked up under the
/// directory named by OGL_DATA_DIR.
#[derive(Parser)]
#[command(name = "ogl-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance; exits 0 only if it is solved.
    Solve(ConfigArgs),
    /// Run a grid of instances and write a status table.
    Grid(ConfigArgs),
    /// Compare two sets of runs (sparsity, objective and time profile).
    Compare(PairArgs),
    /// Compute the smallest weight scale with a zero solution.
    LambdaMin(ConfigArgs),
    /// Write the time performance profile of two sets of runs.
    Profile(PairArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML file with flat configuration keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// LIBSVM file, `synthetic` or `synthetic:<seed>`.
    #[arg(long)]
    dataset: Option<String>,
    /// none, maxabs or standardize.
    #[arg(long)]
    scaling: Option<String>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    grpsize: Option<i64>,
    /// Absolute weight scale.
    #[arg(long, conflicts_with = "lambda_fraction")]
    lambda: Option<f64>,
    /// Weight scale as a multiple of the instance's smallest zero-solution scale.
    #[arg(long)]
    lambda_fraction: Option<f64>,
    /// option1, option2 or option3.
    #[arg(long)]
    option: Option<String>,
    /// enhanced or pga.
    #[arg(long)]
    solver: Option<String>,
    /// faithful or practical.
    #[arg(long)]
    alpha_mode: Option<String>,
    /// none, strategy1 or strategy2.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    eps_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<i64>,
    #[arg(long)]
    max_time: Option<f64>,
    /// Seed for synthetic datasets.
    #[arg(long)]
    seed: Option<i64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Any other configuration key, as KEY=VALUE (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn table(&self) -> Result<toml::Table> {
        let mut t = read_table(self.config.as_deref())?;
        if self.lambda.is_some() {
            t.remove("lambda_fraction");
        }
        if self.lambda_fraction.is_some() {
            t.remove("lambda");
        }
        set(&mut t, "dataset", self.dataset.clone());
        set(&mut t, "scaling", self.scaling.clone());
        set(&mut t, "ratio", self.ratio);
        set(&mut t, "grpsize", self.grpsize);
        set(&mut t, "lambda", self.lambda);
        set(&mut t, "lambda_fraction", self.lambda_fraction);
        set(&mut t, "option", self.option.clone());
        set(&mut t, "solver", self.solver.clone());
        set(&mut t, "alpha_mode", self.alpha_mode.clone());
        set(&mut t, "schedule", self.schedule.clone());
        set(&mut t, "eps_tol", self.eps_tol);
        set(&mut t, "max_iters", self.max_iters);
        set(&mut t, "max_time_s", self.max_time);
        set(&mut t, "seed", self.seed);
        set(&mut t, "output_dir", self.output_dir.as_ref().map(|p| p.display().to_string()));
        for o in &self.overrides {
            apply_override(&mut t, o)?;
        }
        Ok(t)
    }

    fn experiment(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_table(self.table()?)
    }
}

#[derive(Args)]
struct PairArgs {
    /// Run records of the first solver (a grid or run directory).
    #[arg(long)]
    left: PathBuf,
    /// Run records of the second solver; defaults to --left.
    #[arg(long)]
    right: Option<PathBuf>,
    #[arg(long)]
    left_option: Option<OuterOption>,
    #[arg(long)]
    right_option: Option<OuterOption>,
    /// Directory for the report files.
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

impl PairArgs {
    fn pairs(&self) -> Result<Vec<(ogl_bench::run::RunSummary, ogl_bench::run::RunSummary)>> {
        let left = select(load_summaries(&self.left)?, self.left_option);
        let right_dir = self.right.as_ref().unwrap_or(&self.left);
        let right = select(load_summaries(right_dir)?, self.right_option);
        Ok(pair_up(&left, &right))
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve(args) => {
            let cfg = args.experiment()?;
            let out = run_single(&cfg)?;
            let s = &out.summary;
            println!(
                "{}: {} after {} iterations, F = {:.6}, {} zero / {} nonzero groups ({:.2}s)",
                s.id, s.status, s.iterations, s.objective, s.zero_groups, s.nonzero_groups, s.time_s
            );
            println!("records written to {}", out.dir.display());
            Ok(if s.status == TerminalStatus::Solved {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Grid(args) => {
            let table = args.table()?;
            let out_dir = table
                .get("output_dir")
                .and_then(|v| v.as_str())
                .map(PathBuf::from)
                .unwrap_or_else(|| ExperimentConfig::default().output_dir);
            let grid = GridConfig::from_table(table)?;
            let (summaries, status) = run_grid(&grid, &out_dir)?;
            print!("{}", status.to_text());
            println!("{} runs written to {}", summaries.len(), out_dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare(args) => {
            let report = compare(&args.pairs()?)?;
            write_json(&args.output_dir.join("comparison.json"), &report)?;
            write_csv(&args.output_dir.join("profile.csv"), &report.profile.bars)?;
            print!("{}", report.to_text());
            Ok(ExitCode::SUCCESS)
        }
        Command::Profile(args) => {
            let profile = profile_of(&args.pairs()?)?;
            write_csv(&args.output_dir.join("profile.csv"), &profile.bars)?;
            for b in &profile.bars {
                println!("{:<40} {:>8.3}{}", b.instance, b.height, if b.failure { " (failure)" } else { "" });
            }
            println!("area: left {:.3}, right {:.3}", profile.area_i, profile.area_j);
            Ok(ExitCode::SUCCESS)
        }
        Command::LambdaMin(args) => {
            let cfg = args.experiment()?;
            let problem = build_problem(&cfg)?;
            let lmin = lambda_min(&problem, &cfg)?;
            let report = serde_json::json!({
                "dataset": problem.label,
                "ratio": cfg.ratio,
                "grpsize": cfg.grpsize,
                "groups": problem.groups.len(),
                "lambda_min": lmin,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
