//! Inexact proximal-gradient outer loop.
//!
//! Each iteration forms the subproblem at `(x_k, alpha_k)`, asks the dual
//! solver for an approximate prox-gradient point `x_hat` with a certified
//! gap, and then either runs an Armijo backtracking search along
//! `s_k = x_hat - x_k` (the two adaptive options) or accepts `x_hat`
//! directly behind a quadratic upper-bound test (the absolute `C/k^3`
//! option).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::groups::{DualVector, GroupStructure};
use crate::linalg::{dist, dot, norm, norm_sq};
use crate::losses::SmoothLoss;
use crate::prox_dual::{
    correction_step, solve_subproblem_enhanced, solve_subproblem_pga, Criterion,
    DualSolverSettings, ProxSubproblem, SubproblemStatus, TerminationRule, GAP_FLOOR,
};

/// Maximum number of Armijo backtracks before giving up.
pub const MAX_BACKTRACKS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OuterOption {
    /// Relative test `gap <= c_k ||x_hat - x_k||^2`.
    Option1,
    /// Relative test `gap <= gamma2 (phi(x_k) - phi_d(y))`.
    Option2,
    /// Absolute test `gap <= C / k^3`.
    Option3,
}

impl std::str::FromStr for OuterOption {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "option1" | "1" => Ok(OuterOption::Option1),
            "option2" | "2" => Ok(OuterOption::Option2),
            "option3" | "3" => Ok(OuterOption::Option3),
            other => Err(Error::InvalidConfig(format!("unknown option '{other}'"))),
        }
    }
}

impl std::fmt::Display for OuterOption {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OuterOption::Option1 => "option1",
            OuterOption::Option2 => "option2",
            OuterOption::Option3 => "option3",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMode {
    /// Keep alpha after an unreduced step, shrink it otherwise.
    Faithful,
    /// Grow alpha by 10% after an unreduced step (a bounded number of times).
    Practical,
}

impl std::str::FromStr for AlphaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "faithful" => Ok(AlphaMode::Faithful),
            "practical" => Ok(AlphaMode::Practical),
            other => Err(Error::InvalidConfig(format!("unknown alpha mode '{other}'"))),
        }
    }
}

/// Optional cap on the subproblem accuracy sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EpsSchedule {
    None,
    /// `eps_k <= min(alpha0 / 2, psi^(2k) theta^(2(k+1)))`, `theta = 1 - alpha0 mu_f`.
    Strategy1 { psi: f64 },
    /// `eps_k <= omega^2 eps_{k-1}`, `eps_0 <= alpha0 / 2`.
    Strategy2 { omega: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubproblemSolver {
    Enhanced,
    Pga,
}

impl std::str::FromStr for SubproblemSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "enhanced" => Ok(SubproblemSolver::Enhanced),
            "pga" => Ok(SubproblemSolver::Pga),
            other => Err(Error::InvalidConfig(format!("unknown subproblem solver '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OuterConfig {
    pub option: OuterOption,
    pub xi: f64,
    pub eta: f64,
    pub zeta: f64,
    pub alpha0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub c_const: f64,
    pub eps_tol: f64,
    pub max_iters: usize,
    pub max_time_s: f64,
    pub alpha_mode: AlphaMode,
    pub max_alpha_increases: usize,
    pub schedule: EpsSchedule,
    pub iota: f64,
    pub solver: SubproblemSolver,
    pub inner: DualSolverSettings,
    /// Keep the zero-group set of every iterate in the run record.
    pub record_supports: bool,
}

impl Default for OuterConfig {
    fn default() -> Self {
        OuterConfig {
            option: OuterOption::Option1,
            xi: 0.5,
            eta: 1e-3,
            zeta: 0.8,
            alpha0: 1.0,
            gamma1: 0.2,
            gamma2: 0.5,
            c_const: 1000.0,
            eps_tol: 1e-5,
            max_iters: 10_000,
            max_time_s: 300.0,
            alpha_mode: AlphaMode::Faithful,
            max_alpha_increases: 50,
            schedule: EpsSchedule::None,
            iota: 1.0,
            solver: SubproblemSolver::Enhanced,
            inner: DualSolverSettings::default(),
            record_supports: false,
        }
    }
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must lie in (0, 1), got {v}")))
    }
}

impl OuterConfig {
    pub fn with_option(option: OuterOption) -> Self {
        OuterConfig {
            option,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        open_unit("xi", self.xi)?;
        open_unit("eta", self.eta)?;
        open_unit("zeta", self.zeta)?;
        open_unit("inner.xi", self.inner.xi)?;
        open_unit("inner.eta", self.inner.eta)?;
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha0 must be positive, got {}", self.alpha0)));
        }
        if !(self.gamma1 > 0.0 && self.gamma1 < 2.0) {
            return Err(Error::InvalidConfig(format!("gamma1 must lie in (0, 2), got {}", self.gamma1)));
        }
        if !(self.gamma2 > 0.0 && self.gamma2 <= 0.5) {
            return Err(Error::InvalidConfig(format!(
                "gamma2 must lie in (0, 1/2], got {}",
                self.gamma2
            )));
        }
        if !(self.c_const > 0.0 && self.c_const.is_finite()) {
            return Err(Error::InvalidConfig(format!("C must be positive, got {}", self.c_const)));
        }
        if !(self.eps_tol > 0.0) {
            return Err(Error::InvalidConfig(format!("eps_tol must be positive, got {}", self.eps_tol)));
        }
        if !(self.max_time_s > 0.0) {
            return Err(Error::InvalidConfig("max_time_s must be positive".into()));
        }
        if !(self.iota > 0.0 && self.iota.is_finite()) {
            return Err(Error::InvalidConfig(format!("iota must be positive, got {}", self.iota)));
        }
        match self.schedule {
            EpsSchedule::None => {}
            EpsSchedule::Strategy1 { psi } => open_unit("psi", psi)?,
            EpsSchedule::Strategy2 { omega } => open_unit("omega", omega)?,
        }
        Ok(())
    }
}

/// Upper endpoint of the admissible `c_k` interval,
/// `(1/4) (sqrt(6 / ((1 + gamma1) alpha)) - sqrt(2 / alpha))^2`.
pub fn choose_ck(alpha: f64, gamma1: f64) -> f64 {
    let d = (6.0 / ((1.0 + gamma1) * alpha)).sqrt() - (2.0 / alpha).sqrt();
    0.25 * d * d
}

/// `-||s||^2 / alpha + sqrt(2 eps / alpha) ||s|| + eps`.
pub fn delta_option1(s: &[f64], eps: f64, alpha: f64) -> f64 {
    let ns = norm(s);
    -ns * ns / alpha + (2.0 * eps / alpha).sqrt() * ns + eps
}

/// `r(x + s) - r(x) + grad^T s`.
pub fn delta_option2(x: &[f64], s: &[f64], grad: &[f64], gs: &GroupStructure) -> Result<f64> {
    check_len(gs.n(), x.len())?;
    check_len(gs.n(), s.len())?;
    check_len(gs.n(), grad.len())?;
    let xs: Vec<f64> = x.iter().zip(s).map(|(a, b)| a + b).collect();
    Ok(gs.penalty(&xs) - gs.penalty(x) + dot(grad, s))
}

/// Result of an Armijo backtracking search.
#[derive(Clone, Debug, PartialEq)]
pub struct LineSearchResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub backtracks: usize,
}

/// Smallest `j >= 0` with `F(x + xi^j s) <= F(x) + eta xi^j delta`.
pub fn line_search(
    loss: &dyn SmoothLoss,
    gs: &GroupStructure,
    x: &[f64],
    s: &[f64],
    f_x: f64,
    delta: f64,
    xi: f64,
    eta: f64,
) -> Result<LineSearchResult> {
    check_len(gs.n(), x.len())?;
    check_len(gs.n(), s.len())?;
    if !(delta < 0.0) {
        return Err(Error::LineSearch(format!(
            "search direction is not a descent direction (delta = {delta})"
        )));
    }
    let mut step = 1.0;
    let mut trial = vec![0.0; x.len()];
    for j in 0..=MAX_BACKTRACKS {
        for ((t, a), b) in trial.iter_mut().zip(x).zip(s) {
            *t = a + step * b;
        }
        let f_trial = loss.value(&trial) + gs.penalty(&trial);
        if f_trial.is_finite() && f_trial <= f_x + eta * step * delta {
            return Ok(LineSearchResult {
                x: trial,
                objective: f_trial,
                backtracks: j,
            });
        }
        step *= xi;
    }
    Err(Error::LineSearch(format!(
        "no sufficient decrease after {MAX_BACKTRACKS} backtracks"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaFlag {
    SameAlpha,
    DecAlpha,
    IncAlpha,
}

/// Tracks the PG parameter across iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaController {
    pub mode: AlphaMode,
    pub zeta: f64,
    pub max_increases: usize,
    pub increases: usize,
}

impl AlphaController {
    pub fn new(mode: AlphaMode, zeta: f64, max_increases: usize) -> Self {
        AlphaController {
            mode,
            zeta,
            max_increases,
            increases: 0,
        }
    }

    /// Next alpha after an Armijo search that needed `j` backtracks.
    pub fn update(&mut self, j: usize, alpha: f64) -> (f64, AlphaFlag) {
        if j > 0 {
            return (self.zeta * alpha, AlphaFlag::DecAlpha);
        }
        match self.mode {
            AlphaMode::Practical if self.increases < self.max_increases => {
                self.increases += 1;
                (1.1 * alpha, AlphaFlag::IncAlpha)
            }
            _ => (alpha, AlphaFlag::SameAlpha),
        }
    }
}

/// One-shot alpha update without increase bookkeeping.
pub fn update_alpha(j: usize, alpha: f64, mode: AlphaMode, zeta: f64) -> f64 {
    AlphaController::new(mode, zeta, usize::MAX).update(j, alpha).0
}

/// `(||x_hat - x_k|| + sqrt(2 alpha max(gap, 0))) / min(1, alpha)`.
pub fn chi_proxy(x_hat: &[f64], x_k: &[f64], alpha: f64, gap: f64) -> f64 {
    (dist(x_hat, x_k) + (2.0 * alpha * gap.max(0.0)).sqrt()) / alpha.min(1.0)
}

/// Required accuracy cap at outer iteration `k`.
///
/// `eps_prev` is the accuracy recorded at iteration `k - 1` (ignored at
/// `k = 0`); `mu_f` is needed only by Strategy 1.
pub fn eps_schedule_next(
    k: usize,
    schedule: &EpsSchedule,
    eps_prev: f64,
    alpha0: f64,
    mu_f: Option<f64>,
) -> Result<f64> {
    match *schedule {
        EpsSchedule::None => Ok(f64::INFINITY),
        EpsSchedule::Strategy1 { psi } => {
            let mu = mu_f.ok_or_else(|| {
                Error::InvalidConfig("strategy1 needs a known strong convexity modulus".into())
            })?;
            let theta = 1.0 - alpha0 * mu;
            if !(theta > 0.0 && theta < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "strategy1 needs theta = 1 - alpha0 mu_f in (0, 1), got {theta}"
                )));
            }
            let kf = k as f64;
            Ok((alpha0 / 2.0).min(psi.powf(2.0 * kf) * theta.powf(2.0 * (kf + 1.0))))
        }
        EpsSchedule::Strategy2 { omega } => {
            if k == 0 {
                Ok(alpha0 / 2.0)
            } else {
                Ok(omega * omega * eps_prev)
            }
        }
    }
}

/// Lower bound on alpha_k guaranteed in faithful mode; `None` for option 3.
pub fn alpha_floor(cfg: &OuterConfig, lipschitz: f64) -> Option<f64> {
    let (zeta, eta, g1) = (cfg.zeta, cfg.eta, cfg.gamma1);
    match cfg.option {
        OuterOption::Option1 => {
            Some(cfg.alpha0.min(3.0 * g1 * zeta * (1.0 - eta) / (lipschitz * (1.0 + g1))))
        }
        OuterOption::Option2 => Some(cfg.alpha0.min(zeta * (1.0 - eta) / lipschitz)),
        OuterOption::Option3 => None,
    }
}

/// Bound on the number of `DecAlpha` iterations, `ceil(log(alpha_min / alpha0) / log zeta)`.
pub fn max_alpha_decreases(alpha_min: f64, alpha0: f64, zeta: f64) -> usize {
    let v = ((alpha_min / alpha0).ln() / zeta.ln()).ceil();
    if v > 0.0 {
        v as usize
    } else {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    Solved,
    IterLimit,
    TimeLimit,
    NumericalDifficulties,
}

impl std::fmt::Display for TerminalStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TerminalStatus::Solved => "solved",
            TerminalStatus::IterLimit => "iter_limit",
            TerminalStatus::TimeLimit => "time_limit",
            TerminalStatus::NumericalDifficulties => "numerical_difficulties",
        })
    }
}

/// Telemetry of one outer iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRow {
    pub k: usize,
    /// `F = f + r` at the iterate this iteration hands on.
    pub objective: f64,
    pub chi_proxy: f64,
    pub eps: f64,
    pub gap: f64,
    /// Zero when the iteration did not compute a step test.
    pub delta: f64,
    pub alpha: f64,
    pub backtracks: usize,
    pub inner_iters: usize,
    pub inner_status: SubproblemStatus,
    pub corrected: bool,
    /// Whether `x_{k+1} != x_k`.
    pub accepted: bool,
    pub nonzero_groups: usize,
    pub flag: Option<AlphaFlag>,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rows: Vec<IterRow>,
    status: Option<TerminalStatus>,
    pub message: Option<String>,
    /// Zero-group sets of `x_0, x_1, ...` when requested.
    #[serde(skip)]
    pub zero_sets: Vec<Vec<usize>>,
    pub initial_objective: f64,
    pub time_s: f64,
}

impl RunRecord {
    pub fn status(&self) -> Option<TerminalStatus> {
        self.status
    }

    /// Sets the terminal status; later calls are ignored.
    pub fn finish(&mut self, status: TerminalStatus, message: Option<String>) {
        if self.status.is_none() {
            self.status = Some(status);
            self.message = message;
        }
    }

    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    pub fn final_objective(&self) -> f64 {
        self.rows
            .last()
            .map(|r| r.objective)
            .unwrap_or(self.initial_objective)
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub x: Vec<f64>,
    pub objective: f64,
    pub record: RunRecord,
    pub alpha: f64,
    pub y: DualVector,
}

impl SolveOutput {
    pub fn status(&self) -> TerminalStatus {
        self.record
            .status()
            .expect("a finished solve always records its status")
    }
}

/// Groups of `x` that are exactly zero.
pub fn zero_groups(gs: &GroupStructure, x: &[f64]) -> Vec<usize> {
    gs.groups()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.iter().all(|&j| x[j] == 0.0))
        .map(|(i, _)| i)
        .collect()
}

/// Runs the outer loop from `x_0 = 0`.
pub fn solve(loss: &dyn SmoothLoss, gs: &GroupStructure, cfg: &OuterConfig) -> Result<SolveOutput> {
    solve_from(loss, gs, cfg, &vec![0.0; gs.n()])
}

pub fn solve_from(
    loss: &dyn SmoothLoss,
    gs: &GroupStructure,
    cfg: &OuterConfig,
    x0: &[f64],
) -> Result<SolveOutput> {
    cfg.validate()?;
    check_len(gs.n(), loss.dim())?;
    check_len(gs.n(), x0.len())?;
    let mu_f = loss.strong_convexity();
    if matches!(cfg.schedule, EpsSchedule::Strategy1 { .. }) {
        eps_schedule_next(0, &cfg.schedule, 0.0, cfg.alpha0, mu_f)?;
    }
    let start = Instant::now();

    let mut x = x0.to_vec();
    let (mut f_x, mut grad) = loss.value_and_gradient(&x);
    let mut big_f = f_x + gs.penalty(&x);
    let mut alpha = cfg.alpha0;
    let mut alpha_ctl = AlphaController::new(cfg.alpha_mode, cfg.zeta, cfg.max_alpha_increases);
    let mut eps_prev = cfg.alpha0 / 2.0;
    let mut sigma = 1.0;
    let mut y_warm = DualVector::zeros(gs);
    let mut x_ref: Option<Vec<f64>> = None;
    let mut consecutive_corrections = 0usize;

    let mut record = RunRecord {
        initial_objective: big_f,
        ..Default::default()
    };
    if cfg.record_supports {
        record.zero_sets.push(zero_groups(gs, &x));
    }
    if !big_f.is_finite() {
        record.finish(
            TerminalStatus::NumericalDifficulties,
            Some("non-finite objective at the starting point".into()),
        );
    }

    let mut k = 0usize;
    while record.status().is_none() {
        if k >= cfg.max_iters {
            record.finish(TerminalStatus::IterLimit, None);
            break;
        }
        if start.elapsed().as_secs_f64() > cfg.max_time_s {
            record.finish(TerminalStatus::TimeLimit, None);
            break;
        }

        let sp = ProxSubproblem::new(gs, &x, &grad, alpha)?;
        let criterion = match cfg.option {
            OuterOption::Option1 => Criterion::Option1 {
                ck: choose_ck(alpha, cfg.gamma1),
            },
            OuterOption::Option2 => Criterion::Option2 { gamma2: cfg.gamma2 },
            OuterOption::Option3 => Criterion::Option3 {
                eps: cfg.c_const / ((k + 1) as f64).powi(3),
            },
        };
        let cap = eps_schedule_next(k, &cfg.schedule, eps_prev, cfg.alpha0, mu_f)?;
        let rule = TerminationRule::new(criterion, eps_prev)
            .with_iota(cfg.iota)
            .with_cap(cap);
        let sub = match cfg.solver {
            SubproblemSolver::Enhanced => {
                solve_subproblem_enhanced(&sp, &rule, &y_warm, &mut sigma, &cfg.inner)
            }
            SubproblemSolver::Pga => solve_subproblem_pga(&sp, &rule, &y_warm, &mut sigma, &cfg.inner),
        };
        let sub = match sub {
            Ok(sub) => sub,
            Err(Error::NonFinite(msg)) => {
                record.finish(TerminalStatus::NumericalDifficulties, Some(msg));
                break;
            }
            Err(e) => return Err(e),
        };

        let mut x_hat = sub.x_hat;
        let mut gap = sub.gap;
        let mut inner_status = sub.status;
        let mut corrected = false;
        let succeeded = inner_status == SubproblemStatus::GapMet;
        if succeeded {
            consecutive_corrections = 0;
            x_ref = Some(x.clone());
        } else {
            consecutive_corrections += 1;
            let reference = x_ref.as_deref().unwrap_or(&x);
            let (xc, used) = correction_step(&x_hat, reference, &sp);
            if used {
                x_hat = xc;
                let phi = sp.phi(&x_hat);
                gap = sp.gap(&x_hat, &sub.y_hat);
                if gap <= GAP_FLOOR * (1.0 + phi.abs()) {
                    gap = 0.0;
                }
                inner_status = SubproblemStatus::Corrected;
                corrected = true;
            }
        }
        y_warm = sub.y_hat;

        let s: Vec<f64> = x_hat.iter().zip(&x).map(|(a, b)| a - b).collect();
        let eps_k = if succeeded {
            let rule_eps = match criterion {
                Criterion::Option1 { ck } => ck * norm_sq(&s),
                Criterion::Option2 { gamma2 } => gamma2 * sp.gap(&x, &y_warm),
                Criterion::Option3 { eps } => eps,
            };
            rule_eps.min(cap)
        } else {
            gap
        };
        let chi = chi_proxy(&x_hat, &x, alpha, gap);

        let mut row = IterRow {
            k,
            objective: big_f,
            chi_proxy: chi,
            eps: eps_k,
            gap,
            delta: 0.0,
            alpha,
            backtracks: 0,
            inner_iters: sub.inner_iters,
            inner_status,
            corrected,
            accepted: false,
            nonzero_groups: 0,
            flag: None,
            elapsed_s: 0.0,
        };

        if chi <= cfg.eps_tol {
            record.finish(TerminalStatus::Solved, None);
        } else if consecutive_corrections >= 2 {
            record.finish(
                TerminalStatus::NumericalDifficulties,
                Some(format!("two consecutive subproblem correction steps at k = {k}")),
            );
        } else {
            match cfg.option {
                OuterOption::Option1 | OuterOption::Option2 => {
                    let delta = if cfg.option == OuterOption::Option1 {
                        delta_option1(&s, eps_k, alpha)
                    } else {
                        delta_option2(&x, &s, &grad, gs)?
                    };
                    row.delta = delta;
                    if !(delta < 0.0) {
                        record.finish(
                            TerminalStatus::NumericalDifficulties,
                            Some(format!("non-negative model decrease {delta:e} at k = {k}")),
                        );
                    } else {
                        match line_search(loss, gs, &x, &s, big_f, delta, cfg.xi, cfg.eta) {
                            Ok(ls) => {
                                let (next_alpha, flag) = alpha_ctl.update(ls.backtracks, alpha);
                                row.backtracks = ls.backtracks;
                                row.flag = Some(flag);
                                row.accepted = true;
                                x = ls.x;
                                alpha = next_alpha;
                            }
                            Err(Error::LineSearch(msg)) => {
                                record.finish(TerminalStatus::NumericalDifficulties, Some(msg));
                            }
                            Err(e) => return Err(e),
                        }
                    }
                }
                OuterOption::Option3 => {
                    let f_hat = loss.value(&x_hat);
                    let bound = f_x + dot(&grad, &s) + norm_sq(&s) / alpha;
                    if f_hat.is_finite() && f_hat <= bound {
                        row.accepted = true;
                        row.flag = Some(AlphaFlag::SameAlpha);
                        x = x_hat;
                    } else {
                        row.flag = Some(AlphaFlag::DecAlpha);
                        alpha *= cfg.zeta;
                    }
                }
            }
            if row.accepted {
                let (fv, gv) = loss.value_and_gradient(&x);
                f_x = fv;
                grad = gv;
                big_f = f_x + gs.penalty(&x);
                if !big_f.is_finite() || !crate::linalg::all_finite(&grad) {
                    record.finish(
                        TerminalStatus::NumericalDifficulties,
                        Some(format!("non-finite objective after iteration {k}")),
                    );
                }
            }
            eps_prev = eps_k;
        }

        row.objective = big_f;
        row.nonzero_groups = gs.num_groups() - zero_groups(gs, &x).len();
        row.elapsed_s = start.elapsed().as_secs_f64();
        if cfg.record_supports {
            record.zero_sets.push(zero_groups(gs, &x));
        }
        log::trace!(
            "k={k} F={:.10e} chi={chi:.3e} alpha={:.3e} inner={}",
            row.objective,
            row.alpha,
            row.inner_iters
        );
        record.rows.push(row);
        k += 1;
    }

    record.time_s = start.elapsed().as_secs_f64();
    Ok(SolveOutput {
        x,
        objective: big_f,
        record,
        alpha,
        y: y_warm,
    })
}

/// Checks the faithful-mode guarantees on a finished run of option 1 or 2:
/// strict decrease of `F` on accepted steps, negative `delta`, the alpha
/// floor, and the bound on the number of alpha decreases. Returns one
/// message per violation.
pub fn check_faithful_invariants(record: &RunRecord, cfg: &OuterConfig, lipschitz: f64) -> Vec<String> {
    let mut out = Vec::new();
    let Some(floor) = alpha_floor(cfg, lipschitz) else {
        return out;
    };
    let mut prev = record.initial_objective;
    let mut decreases = 0usize;
    for row in &record.rows {
        if row.alpha < floor * (1.0 - 1e-12) {
            out.push(format!("k={}: alpha {} below floor {}", row.k, row.alpha, floor));
        }
        if row.accepted {
            if !(row.delta < 0.0) {
                out.push(format!("k={}: delta {} is not negative", row.k, row.delta));
            }
            if !(row.objective < prev) {
                out.push(format!(
                    "k={}: objective {} did not decrease from {}",
                    row.k, row.objective, prev
                ));
            }
            prev = row.objective;
        }
        if row.flag == Some(AlphaFlag::DecAlpha) {
            decreases += 1;
        }
    }
    let bound = max_alpha_decreases(floor, cfg.alpha0, cfg.zeta);
    if decreases > bound {
        out.push(format!("{decreases} alpha decreases exceed the bound {bound}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ck_examples() {
        let c = choose_ck(1.0, 0.2);
        let expect = 0.25 * (5f64.sqrt() - 2f64.sqrt()).powi(2);
        assert!((c - expect).abs() < 1e-15);
        assert!((c - 0.168861).abs() < 1e-6);
        assert!((choose_ck(2.0, 0.2) - c / 2.0).abs() < 1e-15);
        assert!(choose_ck(1.0, 2.0 - 1e-12) < 1e-12);
    }

    #[test]
    fn delta1_examples() {
        let s = [3.0, 4.0];
        assert_eq!(delta_option1(&s, 0.0, 2.0), -12.5);
        assert_eq!(delta_option1(&[0.0, 0.0], 0.3, 1.0), 0.3);
        let ck = choose_ck(0.7, 0.2);
        let d = delta_option1(&s, ck * 25.0, 0.7);
        assert!(d < 0.0);
    }

    #[test]
    fn alpha_updates() {
        assert_eq!(update_alpha(0, 0.5, AlphaMode::Faithful, 0.8), 0.5);
        assert!((update_alpha(2, 0.5, AlphaMode::Faithful, 0.8) - 0.4).abs() < 1e-15);
        assert!((update_alpha(0, 1.0, AlphaMode::Practical, 0.8) - 1.1).abs() < 1e-15);
        let mut ctl = AlphaController::new(AlphaMode::Practical, 0.8, 2);
        let mut a = 1.0;
        for _ in 0..5 {
            a = ctl.update(0, a).0;
        }
        assert!((a - 1.21).abs() < 1e-12);
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi_proxy(&[1.0], &[1.0], 0.3, 0.0), 0.0);
        assert_eq!(chi_proxy(&[3.0, 0.0], &[0.0, 0.0], 1.0, 2.0), 5.0);
        assert_eq!(chi_proxy(&[1.0], &[0.0], 0.5, -1.0), 2.0);
    }

    #[test]
    fn schedules() {
        let s2 = EpsSchedule::Strategy2 { omega: 0.5 };
        assert_eq!(eps_schedule_next(0, &s2, 0.0, 1.0, None).unwrap(), 0.5);
        let mut eps = 0.1;
        let mut caps = vec![eps];
        for k in 1..3 {
            eps = eps_schedule_next(k, &s2, eps, 1.0, None).unwrap();
            caps.push(eps);
        }
        assert!((caps[1] - 0.025).abs() < 1e-15 && (caps[2] - 0.00625).abs() < 1e-15);

        let s1 = EpsSchedule::Strategy1 { psi: 0.5 };
        // theta = 0.9 with alpha0 = 1, mu = 0.1
        let c = eps_schedule_next(0, &s1, 0.0, 1.0, Some(0.1)).unwrap();
        assert!((c - 0.5f64.min(0.81)).abs() < 1e-15);
        let c = eps_schedule_next(0, &s1, 0.0, 2.0, Some(0.05)).unwrap();
        assert!((c - 0.81).abs() < 1e-12);
        assert!(eps_schedule_next(0, &s1, 0.0, 1.0, None).is_err());
        assert!(eps_schedule_next(3, &EpsSchedule::None, 1.0, 1.0, None)
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn config_validation() {
        let mut cfg = OuterConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.gamma2 = 0.7;
        assert!(cfg.validate().is_err());
        let cfg = OuterConfig {
            gamma1: 2.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn decrease_bound() {
        assert_eq!(max_alpha_decreases(1.0, 1.0, 0.8), 0);
        assert_eq!(max_alpha_decreases(0.5, 1.0, 0.8), 4);
    }

    #[test]
    fn status_set_once() {
        let mut r = RunRecord::default();
        r.finish(TerminalStatus::Solved, None);
        r.finish(TerminalStatus::IterLimit, Some("x".into()));
        assert_eq!(r.status(), Some(TerminalStatus::Solved));
        assert!(r.message.is_none());
    }
}
