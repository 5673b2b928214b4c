//! The proximal-gradient subproblem
//!
//! ```text
//! min_x  phi(x) = ||x - u||^2 / (2 alpha) + sum_i lambda_i ||x[g_i]||,   u = x_k - alpha grad f(x_k)
//! ```
//!
//! and its dual
//!
//! ```text
//! max_y  phi_d(y) = -(alpha/2) ||A y||^2 - u^T A y   s.t. ||y[M(i)]|| <= lambda_i.
//! ```
//!
//! [`solve_subproblem_enhanced`] runs projected gradient ascent with a
//! backtracking arc search on the dual. At every dual iterate it predicts the
//! groups that are zero at the primal solution (those whose dual block sits
//! strictly inside its ball by a margin) and zeroes them in the primal
//! candidate `u + alpha A y`, so the returned point has exact zeros. The
//! search stops as soon as the primal-dual gap certifies the accuracy the
//! outer loop asked for.

use crate::error::{check_len, Error, Result};
use crate::groups::{DualVector, GroupStructure};
use crate::linalg::{dist_sq, dot, norm, norm_sq};

/// Gaps below `GAP_FLOOR * (1 + |phi|)` are treated as zero.
pub const GAP_FLOOR: f64 = 1e-14;

/// Relative floor on the zero-group margin. Projection onto a ball leaves
/// the block norm within a few ulps of `lambda_i`, so without this floor a
/// vanishing `eps_prev` lets rounding alone flip active groups to zero.
pub const MARGIN_FLOOR: f64 = 1e-12;

fn predicted_zero(y: &[f64], gs: &GroupStructure, margin: f64) -> Vec<usize> {
    gs.block_norms(y)
        .iter()
        .zip(gs.lambda())
        .enumerate()
        .filter(|(_, (nrm, lam))| **nrm < **lam - margin.max(MARGIN_FLOOR * **lam))
        .map(|(i, _)| i)
        .collect()
}

/// One outer iteration's subproblem, `(u_k, alpha_k)` anchored at `x_k`.
#[derive(Clone, Debug)]
pub struct ProxSubproblem<'a> {
    gs: &'a GroupStructure,
    x_anchor: Vec<f64>,
    u: Vec<f64>,
    alpha: f64,
}

impl<'a> ProxSubproblem<'a> {
    /// Subproblem at `x_k` with gradient `grad = grad f(x_k)`.
    pub fn new(gs: &'a GroupStructure, x_anchor: &[f64], grad: &[f64], alpha: f64) -> Result<Self> {
        check_len(gs.n(), x_anchor.len())?;
        check_len(gs.n(), grad.len())?;
        let u = x_anchor
            .iter()
            .zip(grad)
            .map(|(x, g)| x - alpha * g)
            .collect();
        Self::with_center(gs, u, alpha, x_anchor.to_vec())
    }

    /// Subproblem with an explicit prox center `u`.
    pub fn with_center(
        gs: &'a GroupStructure,
        u: Vec<f64>,
        alpha: f64,
        x_anchor: Vec<f64>,
    ) -> Result<Self> {
        check_len(gs.n(), u.len())?;
        check_len(gs.n(), x_anchor.len())?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "prox parameter must be positive, got {alpha}"
            )));
        }
        if !crate::linalg::all_finite(&u) {
            return Err(Error::NonFinite("prox center".into()));
        }
        Ok(ProxSubproblem {
            gs,
            x_anchor,
            u,
            alpha,
        })
    }

    pub fn groups(&self) -> &GroupStructure {
        self.gs
    }

    pub fn center(&self) -> &[f64] {
        &self.u
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn anchor(&self) -> &[f64] {
        &self.x_anchor
    }

    /// Primal objective `phi(x)`.
    pub fn phi(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.u.len());
        dist_sq(x, &self.u) / (2.0 * self.alpha) + self.gs.penalty(x)
    }

    /// Dual objective `phi_d(y)`; feasibility is not checked.
    pub fn phi_dual(&self, y: &[f64]) -> f64 {
        let z = self.scatter(y);
        -0.5 * self.alpha * norm_sq(&z) - dot(&self.u, &z)
    }

    /// `grad phi_d(y) = -A^T (alpha A y + u)`.
    pub fn phi_dual_gradient(&self, y: &[f64]) -> DualVector {
        let trial = self.trial_primal(y);
        let mut g = DualVector::zeros(self.gs);
        self.gs.apply_a_transpose_into(&trial, &mut g);
        g.iter_mut().for_each(|v| *v = -*v);
        g
    }

    /// Trial primal point `u + alpha A y` from the linking equation.
    pub fn trial_primal(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.scatter(y);
        for (xi, ui) in x.iter_mut().zip(&self.u) {
            *xi = ui + self.alpha * *xi;
        }
        x
    }

    /// Duality gap `phi(x) - phi_d(y)` for a feasible `y`.
    ///
    /// Evaluated as `||x - x_trial||^2 / (2 alpha) + sum_i (lambda_i ||x[g_i]|| + <y_i, x[g_i]>)`
    /// with `x_trial = u + alpha A y`, which is algebraically identical and
    /// free of cancellation; each group term is clamped at zero.
    pub fn gap(&self, x: &[f64], y: &[f64]) -> f64 {
        let trial = self.trial_primal(y);
        self.gap_with_trial(x, y, &trial)
    }

    fn gap_with_trial(&self, x: &[f64], y: &[f64], trial: &[f64]) -> f64 {
        let mut total = dist_sq(x, trial) / (2.0 * self.alpha);
        for (i, g) in self.gs.groups().iter().enumerate() {
            let block = &y[self.gs.block_range(i)];
            let mut nrm = 0.0;
            let mut inner = 0.0;
            for (&j, &yj) in g.iter().zip(block) {
                nrm += x[j] * x[j];
                inner += yj * x[j];
            }
            total += (self.gs.lambda()[i] * nrm.sqrt() + inner).max(0.0);
        }
        total
    }

    fn scatter(&self, y: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.gs.n()];
        self.gs.apply_a_into(y, &mut z);
        z
    }
}

/// Groups predicted to be zero: `||y[M(i)]|| < lambda_i - eps_prev^iota`,
/// with the margin floored at `MARGIN_FLOOR * lambda_i`.
pub fn predict_support_set(y: &[f64], gs: &GroupStructure, eps_prev: f64, iota: f64) -> Vec<usize> {
    predicted_zero(y, gs, eps_prev.powf(iota))
}

/// `u + alpha A y` with every coordinate of every group in `predicted_zero`
/// set to zero.
pub fn projected_primal(y: &[f64], sp: &ProxSubproblem<'_>, predicted_zero: &[usize]) -> Vec<f64> {
    let mut x = sp.trial_primal(y);
    zero_groups(sp.gs, &mut x, predicted_zero.iter().copied());
    x
}

fn zero_groups(gs: &GroupStructure, x: &mut [f64], groups: impl Iterator<Item = usize>) {
    for i in groups {
        for &j in gs.group(i) {
            x[j] = 0.0;
        }
    }
}

/// Accuracy the outer loop requests from the subproblem solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Criterion {
    /// `gap <= c_k ||x_hat - x_k||^2`
    Option1 { ck: f64 },
    /// `gap <= gamma2 (phi(x_k) - phi_d(y))`
    Option2 { gamma2: f64 },
    /// `gap <= eps`
    Option3 { eps: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerminationRule {
    pub criterion: Criterion,
    /// Previous outer accuracy `eps_{k-1}`, used in the zero-group margin.
    pub eps_prev: f64,
    pub iota: f64,
    /// Extra requirement `gap <= eps_cap` imposed by an accuracy schedule.
    pub eps_cap: f64,
}

impl TerminationRule {
    pub fn new(criterion: Criterion, eps_prev: f64) -> Self {
        TerminationRule {
            criterion,
            eps_prev,
            iota: 1.0,
            eps_cap: f64::INFINITY,
        }
    }

    /// Plain absolute gap tolerance.
    pub fn gap(tol: f64) -> Self {
        Self::new(Criterion::Option3 { eps: tol }, 0.0)
    }

    pub fn with_iota(mut self, iota: f64) -> Self {
        self.iota = iota;
        self
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.eps_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.criterion {
            Criterion::Option1 { ck } => ck > 0.0,
            Criterion::Option2 { gamma2 } => gamma2 > 0.0 && gamma2 <= 0.5,
            Criterion::Option3 { eps } => eps > 0.0,
        };
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "invalid termination criterion {:?}",
                self.criterion
            )));
        }
        if !(self.iota > 0.0) || !(self.eps_prev >= 0.0) || !(self.eps_cap >= 0.0) {
            return Err(Error::InvalidConfig(format!("invalid termination rule {self:?}")));
        }
        Ok(())
    }
}

/// Settings of the dual arc search.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DualSolverSettings {
    pub max_iters: usize,
    /// Backtracking factor `xi_2`.
    pub xi: f64,
    /// Sufficient-ascent constant `eta_2`.
    pub eta: f64,
    pub max_backtracks: usize,
    /// Retry a larger step after an unreduced step was accepted, up to the
    /// reciprocal Lipschitz constant of the dual gradient.
    pub allow_growth: bool,
    pub record_trace: bool,
}

impl Default for DualSolverSettings {
    fn default() -> Self {
        DualSolverSettings {
            max_iters: 5000,
            xi: 0.5,
            eta: 1e-3,
            max_backtracks: 100,
            allow_growth: true,
            record_trace: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubproblemStatus {
    GapMet,
    IterLimit,
    Corrected,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct InnerTraceRow {
    pub t: usize,
    pub phi: f64,
    pub phi_dual: f64,
    pub gap: f64,
    pub predicted_zero: usize,
}

#[derive(Clone, Debug)]
pub struct SubproblemResult {
    pub x_hat: Vec<f64>,
    pub y_hat: DualVector,
    /// Final gap `phi(x_hat) - phi_d(y_hat)` (after flooring).
    pub gap: f64,
    pub inner_iters: usize,
    pub status: SubproblemStatus,
    /// Accuracy certified for `x_hat`; equal to the exit gap.
    pub eps_out: f64,
    /// Exit zero-group prediction.
    pub predicted_zero: Vec<usize>,
    pub trace: Vec<InnerTraceRow>,
}

/// Enhanced projected gradient ascent. `sigma` is the arc-search step memory;
/// it is read as the first trial step and updated with the last accepted one.
pub fn solve_subproblem_enhanced(
    sp: &ProxSubproblem<'_>,
    rule: &TerminationRule,
    warm: &[f64],
    sigma: &mut f64,
    settings: &DualSolverSettings,
) -> Result<SubproblemResult> {
    run_dual_ascent(sp, rule, warm, sigma, settings, true)
}

/// Plain projected gradient ascent: identical to the enhanced solver except
/// that no group is ever predicted zero, so `x_hat = u + alpha A y`.
pub fn solve_subproblem_pga(
    sp: &ProxSubproblem<'_>,
    rule: &TerminationRule,
    warm: &[f64],
    sigma: &mut f64,
    settings: &DualSolverSettings,
) -> Result<SubproblemResult> {
    run_dual_ascent(sp, rule, warm, sigma, settings, false)
}

fn run_dual_ascent(
    sp: &ProxSubproblem<'_>,
    rule: &TerminationRule,
    warm: &[f64],
    sigma: &mut f64,
    settings: &DualSolverSettings,
    predict_zeros: bool,
) -> Result<SubproblemResult> {
    let gs = sp.gs;
    check_len(gs.dual_dim(), warm.len())?;
    rule.validate()?;
    if !(*sigma > 0.0 && sigma.is_finite()) {
        *sigma = 1.0;
    }
    let n = gs.n();
    let alpha = sp.alpha;
    let margin = rule.eps_prev.powf(rule.iota);
    // Growth stops at 1 / (alpha ||A||^2), the reciprocal Lipschitz constant
    // of the dual gradient; longer steps only bounce between ball boundaries.
    let sigma_max = 1.0 / (alpha * gs.max_multiplicity() as f64);

    let mut y = gs.project_dual_feasible(warm);
    let mut z = vec![0.0; n];
    gs.apply_a_into(&y, &mut z);
    let mut trial: Vec<f64> = sp.u.iter().zip(&z).map(|(u, z)| u + alpha * z).collect();

    let mut grad = DualVector::zeros(gs);
    let mut y_next = DualVector::zeros(gs);
    let mut z_next = vec![0.0; n];
    let mut trace = Vec::new();
    let mut t = 0usize;

    loop {
        let predicted: Vec<usize> = if predict_zeros {
            predicted_zero(&y, gs, margin)
        } else {
            Vec::new()
        };
        let mut x_hat = trial.clone();
        zero_groups(gs, &mut x_hat, predicted.iter().copied());

        let phi = sp.phi(&x_hat);
        let mut gap = sp.gap_with_trial(&x_hat, &y, &trial);
        if !(phi.is_finite() && gap.is_finite()) {
            return Err(Error::NonFinite(format!(
                "subproblem objective at inner iteration {t} (phi = {phi}, gap = {gap})"
            )));
        }
        if gap <= GAP_FLOOR * (1.0 + phi.abs()) {
            gap = 0.0;
        }
        if settings.record_trace {
            trace.push(InnerTraceRow {
                t,
                phi,
                phi_dual: phi - gap,
                gap,
                predicted_zero: predicted.len(),
            });
        }

        let met = gap <= rule.eps_cap
            && match rule.criterion {
                Criterion::Option1 { ck } => gap <= ck * dist_sq(&x_hat, &sp.x_anchor),
                Criterion::Option2 { gamma2 } => {
                    gap <= gamma2 * sp.gap_with_trial(&sp.x_anchor, &y, &trial)
                }
                Criterion::Option3 { eps } => gap <= eps,
            };
        if met || t >= settings.max_iters {
            return Ok(SubproblemResult {
                x_hat,
                y_hat: y,
                gap,
                inner_iters: t,
                status: if met {
                    SubproblemStatus::GapMet
                } else {
                    SubproblemStatus::IterLimit
                },
                eps_out: gap,
                predicted_zero: predicted,
                trace,
            });
        }

        // Arc search along grad phi_d = -A^T trial.
        gs.apply_a_transpose_into(&trial, &mut grad);
        grad.iter_mut().for_each(|v| *v = -*v);
        let mut j = 0usize;
        let mut step = *sigma;
        let moved = loop {
            for ((yn, yi), gi) in y_next.iter_mut().zip(y.iter()).zip(grad.iter()) {
                *yn = yi + step * gi;
            }
            gs.project_dual_in_place(&mut y_next);
            gs.apply_a_into(&y_next, &mut z_next);
            // phi_d(y+) - phi_d(y) - eta grad^T (y+ - y)
            //   = -(1 - eta) <trial, dz> - (alpha/2) ||dz||^2
            let mut lin = 0.0;
            let mut quad = 0.0;
            for ((zn, zo), tr) in z_next.iter().zip(&z).zip(&trial) {
                let dz = zn - zo;
                lin += tr * dz;
                quad += dz * dz;
            }
            if -(1.0 - settings.eta) * lin >= 0.5 * alpha * quad {
                break quad > 0.0 || y_next.iter().zip(y.iter()).any(|(a, b)| a != b);
            }
            j += 1;
            if j > settings.max_backtracks {
                log::debug!("dual arc search stalled at inner iteration {t}");
                y_next.copy_from_slice(&y);
                z_next.copy_from_slice(&z);
                break false;
            }
            step *= settings.xi;
        };
        if j <= settings.max_backtracks {
            *sigma = step;
            if j == 0 && moved && settings.allow_growth && step < sigma_max {
                *sigma = (step / settings.xi).min(sigma_max);
            }
        }
        std::mem::swap(&mut y, &mut y_next);
        std::mem::swap(&mut z, &mut z_next);
        for ((tr, u), zi) in trial.iter_mut().zip(&sp.u).zip(&z) {
            *tr = u + alpha * zi;
        }
        t += 1;
    }
}

/// Zeroes every group of `x_hat` that is zero in `x_ref`, and keeps the
/// result only if it does not increase `phi`. Returns the chosen point and
/// whether the corrected candidate was taken.
pub fn correction_step(x_hat: &[f64], x_ref: &[f64], sp: &ProxSubproblem<'_>) -> (Vec<f64>, bool) {
    let gs = sp.gs;
    let zero_in_ref = gs
        .groups()
        .iter()
        .enumerate()
        .filter(|(_, g)| g.iter().all(|&j| x_ref[j] == 0.0))
        .map(|(i, _)| i);
    let mut candidate = x_hat.to_vec();
    zero_groups(gs, &mut candidate, zero_in_ref);
    if candidate == x_hat {
        return (candidate, false);
    }
    if sp.phi(&candidate) <= sp.phi(x_hat) {
        (candidate, true)
    } else {
        (x_hat.to_vec(), false)
    }
}

/// Euclidean norm of `x_hat - x_anchor`.
pub fn step_norm(x_hat: &[f64], sp: &ProxSubproblem<'_>) -> f64 {
    dist_sq(x_hat, &sp.x_anchor).sqrt()
}

/// Exact prox for non-overlapping groups (block soft-thresholding). Used by
/// tests and diagnostics; returns `None` when groups overlap.
pub fn block_soft_threshold(sp: &ProxSubproblem<'_>) -> Option<Vec<f64>> {
    let gs = sp.gs;
    if gs.max_multiplicity() > 1 {
        return None;
    }
    let mut x = vec![0.0; gs.n()];
    for (i, g) in gs.groups().iter().enumerate() {
        let block: Vec<f64> = g.iter().map(|&j| sp.u[j]).collect();
        let nrm = norm(&block);
        let thresh = sp.alpha * gs.lambda()[i];
        if nrm > thresh {
            let scale = 1.0 - thresh / nrm;
            for (&j, &v) in g.iter().zip(&block) {
                x[j] = scale * v;
            }
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::generate_groups;

    fn overlap3() -> GroupStructure {
        GroupStructure::new(3, vec![vec![0, 1], vec![1, 2]], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn phi_examples() {
        let gs = overlap3();
        let u = vec![1.0, -2.0, 0.5];
        let sp = ProxSubproblem::with_center(&gs, u.clone(), 0.5, vec![0.0; 3]).unwrap();
        assert!((sp.phi(&[0.0; 3]) - norm_sq(&u) / 1.0).abs() < 1e-15);
        assert_eq!(sp.phi_dual(&[0.0; 4]), 0.0);
        let g = sp.phi_dual_gradient(&[0.0; 4]);
        let expect = gs.apply_a_transpose(&u).unwrap();
        for (a, b) in g.iter().zip(expect.iter()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn dual_maximum_completes_the_square() {
        // A y = -u / alpha is attainable inside the feasible set here.
        let gs = GroupStructure::new(2, vec![vec![0], vec![1]], vec![10.0, 10.0]).unwrap();
        let u = vec![0.3, -0.4];
        let alpha = 2.0;
        let sp = ProxSubproblem::with_center(&gs, u.clone(), alpha, vec![0.0; 2]).unwrap();
        let y: Vec<f64> = u.iter().map(|v| -v / alpha).collect();
        assert!((sp.phi_dual(&y) - norm_sq(&u) / (2.0 * alpha)).abs() < 1e-15);
    }

    #[test]
    fn zero_center_zero_gradient() {
        let gs = overlap3();
        let sp = ProxSubproblem::with_center(&gs, vec![0.0; 3], 1.0, vec![0.0; 3]).unwrap();
        assert_eq!(sp.phi_dual_gradient(&[0.0; 4]).into_vec(), vec![0.0; 4]);
    }

    #[test]
    fn gap_formula_matches_definition() {
        let gs = overlap3();
        let sp = ProxSubproblem::with_center(&gs, vec![0.7, -0.2, 1.1], 0.8, vec![0.0; 3]).unwrap();
        let y = gs.project_dual_feasible(&[0.3, -0.9, 0.4, 0.8]);
        for x in [[0.0, 0.0, 0.0], [0.5, -0.1, 0.9], [1.0, 2.0, -3.0]] {
            let direct = sp.phi(&x) - sp.phi_dual(&y);
            assert!((sp.gap(&x, &y) - direct).abs() < 1e-13, "{x:?}");
        }
    }

    #[test]
    fn support_prediction_examples() {
        let gs = overlap3();
        assert_eq!(predict_support_set(&[0.0; 4], &gs, 0.1, 1.0), vec![0, 1]);
        // block norm exactly lambda - eps: strict inequality keeps it out.
        let y = [0.6, 0.0, 0.0, 0.0];
        assert_eq!(predict_support_set(&y, &gs, 0.4, 1.0), vec![1]);
        assert!(predict_support_set(&[0.0; 4], &gs, 2.0, 1.0).is_empty());
    }

    #[test]
    fn projected_primal_examples() {
        let gs = overlap3();
        let sp = ProxSubproblem::with_center(&gs, vec![1.0, 2.0, 3.0], 0.5, vec![0.0; 3]).unwrap();
        let y = [0.2, -0.2, 0.4, 0.1];
        let trial = sp.trial_primal(&y);
        assert_eq!(projected_primal(&y, &sp, &[]), trial);
        assert_eq!(projected_primal(&y, &sp, &[0, 1]), vec![0.0; 3]);
        let x = projected_primal(&y, &sp, &[0]);
        assert_eq!(x, vec![0.0, 0.0, trial[2]]);
    }

    #[test]
    fn correction_examples() {
        let gs = overlap3();
        let sp = ProxSubproblem::with_center(&gs, vec![1.0, 2.0, 3.0], 1.0, vec![0.0; 3]).unwrap();
        let x_hat = vec![0.5, 1.0, 2.0];
        assert_eq!(correction_step(&x_hat, &x_hat, &sp), (x_hat.clone(), false));
        let (x, used) = correction_step(&x_hat, &[0.0; 3], &sp);
        assert_eq!(used, sp.phi(&[0.0; 3]) <= sp.phi(&x_hat));
        assert_eq!(x, if used { vec![0.0; 3] } else { x_hat.clone() });
    }

    #[test]
    fn enhanced_terminates_immediately_at_optimum() {
        // Single group with u inside the threshold: x* = 0 and y* = -u/alpha.
        let gs = GroupStructure::new(2, vec![vec![0, 1]], vec![1.0]).unwrap();
        let u = vec![0.1, 0.2];
        let sp = ProxSubproblem::with_center(&gs, u.clone(), 1.0, vec![0.0; 2]).unwrap();
        let warm: Vec<f64> = u.iter().map(|v| -v).collect();
        let mut sigma = 1.0;
        let res = solve_subproblem_enhanced(
            &sp,
            &TerminationRule::gap(1e-12),
            &warm,
            &mut sigma,
            &DualSolverSettings::default(),
        )
        .unwrap();
        assert_eq!(res.inner_iters, 0);
        assert_eq!(res.status, SubproblemStatus::GapMet);
        assert_eq!(res.x_hat, vec![0.0, 0.0]);
    }

    #[test]
    fn zero_center_gives_zero() {
        let groups = generate_groups(13, 0.2, 5).unwrap();
        let gs = GroupStructure::with_scaled_weights(13, groups, 0.1).unwrap();
        let sp = ProxSubproblem::with_center(&gs, vec![0.0; 13], 1.0, vec![0.0; 13]).unwrap();
        let mut sigma = 1.0;
        for solver in [solve_subproblem_enhanced, solve_subproblem_pga] {
            let res = solver(
                &sp,
                &TerminationRule::gap(1e-12),
                &vec![0.0; gs.dual_dim()],
                &mut sigma,
                &DualSolverSettings::default(),
            )
            .unwrap();
            assert!(norm(&res.x_hat) < 1e-6);
        }
    }

    #[test]
    fn rule_validation() {
        assert!(TerminationRule::new(Criterion::Option2 { gamma2: 0.7 }, 0.1)
            .validate()
            .is_err());
        assert!(TerminationRule::new(Criterion::Option1 { ck: 0.0 }, 0.1)
            .validate()
            .is_err());
        assert!(TerminationRule::gap(1e-6).with_iota(0.0).validate().is_err());
        assert!(TerminationRule::new(Criterion::Option2 { gamma2: 0.5 }, 0.1)
            .validate()
            .is_ok());
    }
}
