//! Support tracking and solver comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GroupStructure;

/// Objective differences within this are reported as ties.
pub const SAME_OBJECTIVE_TOL: f64 = 1e-6;

/// Indices of groups with `||x[g_i]|| > tol`; `tol = 0` tests exact zeros.
pub fn support_of(x: &[f64], gs: &GroupStructure, tol: f64) -> Vec<usize> {
    gs.group_norms(x)
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > tol)
        .map(|(i, _)| i)
        .collect()
}

/// Supports of a sequence of iterates and the reference support.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SupportProfile {
    pub supports: Vec<Vec<usize>>,
    pub reference: Vec<usize>,
}

impl SupportProfile {
    /// Builds supports from the zero-group sets recorded by the solver.
    pub fn from_zero_sets(zero_sets: &[Vec<usize>], num_groups: usize, reference: Vec<usize>) -> Self {
        let supports = zero_sets
            .iter()
            .map(|z| {
                let mut mask = vec![true; num_groups];
                z.iter().for_each(|&i| mask[i] = false);
                (0..num_groups).filter(|&i| mask[i]).collect()
            })
            .collect();
        SupportProfile { supports, reference }
    }

    pub fn identification_index(&self) -> Option<usize> {
        identification_index(&self.supports, &self.reference)
    }
}

/// Smallest `k` with `supports[j] == reference` for every recorded `j >= k`.
pub fn identification_index(supports: &[Vec<usize>], reference: &[usize]) -> Option<usize> {
    let stable = supports
        .iter()
        .rev()
        .take_while(|s| s.as_slice() == reference)
        .count();
    (stable > 0).then(|| supports.len() - stable)
}

/// One instance's timing for a pair of solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub instance: String,
    pub time_i: f64,
    pub solved_i: bool,
    pub time_j: f64,
    pub solved_j: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileBar {
    pub instance: String,
    /// Positive when solver `i` is faster (or the only one to succeed).
    pub height: f64,
    /// Exactly one of the two solvers failed.
    pub failure: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceProfile {
    pub bars: Vec<ProfileBar>,
    pub area_i: f64,
    pub area_j: f64,
}

/// Bars `-log2(t_i / t_j)`; instances where both fail are dropped, and an
/// instance with one failure gets `1.5 max |log2 ratio|` over the
/// both-solved instances, pointing at the solver that succeeded. When no
/// instance was solved by both, that maximum is taken as 1.
pub fn performance_profile(entries: &[ProfileEntry]) -> Result<PerformanceProfile> {
    let log_ratio = |e: &ProfileEntry| -> Result<f64> {
        if !(e.time_i > 0.0 && e.time_j > 0.0 && e.time_i.is_finite() && e.time_j.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "instance '{}' has non-positive timings",
                e.instance
            )));
        }
        // Difference of logs keeps swapped profiles exact negations.
        Ok(e.time_j.log2() - e.time_i.log2())
    };
    let mut max_abs: Option<f64> = None;
    for e in entries.iter().filter(|e| e.solved_i && e.solved_j) {
        let h = log_ratio(e)?.abs();
        max_abs = Some(max_abs.map_or(h, |m: f64| m.max(h)));
    }
    let fail_height = 1.5 * max_abs.unwrap_or(1.0);

    let mut bars = Vec::new();
    for e in entries {
        let (height, failure) = match (e.solved_i, e.solved_j) {
            (true, true) => (log_ratio(e)?, false),
            (true, false) => (fail_height, true),
            (false, true) => (-fail_height, true),
            (false, false) => continue,
        };
        bars.push(ProfileBar {
            instance: e.instance.clone(),
            height,
            failure,
        });
    }
    // Folding from +0.0 because an empty float sum is -0.0.
    let area_i = bars.iter().filter(|b| b.height > 0.0).fold(0.0, |a, b| a + b.height);
    let area_j = bars.iter().filter(|b| b.height < 0.0).fold(0.0, |a, b| a - b.height);
    Ok(PerformanceProfile {
        bars,
        area_i,
        area_j,
    })
}

/// Final state of one solver on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub objective: f64,
    pub nonzero_groups: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub better: usize,
    pub same: usize,
    pub worse: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub sparsity: Tally,
    pub objective: Tally,
}

/// Counts how often solver `i` is better, equal, or worse than solver `j`.
/// Fewer nonzero groups is sparser; objectives within
/// [`SAME_OBJECTIVE_TOL`] tie.
pub fn compare_outcomes(pairs: &[(Outcome, Outcome)]) -> Comparison {
    let mut c = Comparison::default();
    for (a, b) in pairs {
        let t = match a.nonzero_groups.cmp(&b.nonzero_groups) {
            std::cmp::Ordering::Less => &mut c.sparsity.better,
            std::cmp::Ordering::Equal => &mut c.sparsity.same,
            std::cmp::Ordering::Greater => &mut c.sparsity.worse,
        };
        *t += 1;
        let d = a.objective - b.objective;
        if d < -SAME_OBJECTIVE_TOL {
            c.objective.better += 1;
        } else if d > SAME_OBJECTIVE_TOL {
            c.objective.worse += 1;
        } else {
            c.objective.same += 1;
        }
    }
    c
}
