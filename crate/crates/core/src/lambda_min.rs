//! Search for the smallest weight scale `Lambda` whose solution is zero.
//!
//! Weights are `lambda_i = Lambda * sqrt(|g_i|)`. The search starts from the
//! threshold that would be exact for non-overlapping groups,
//! `max_i ||grad f(0)[g_i]|| / sqrt(|g_i|)`, walks a geometric grid until the
//! zero/nonzero transition is bracketed, and then bisects.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GroupStructure;
use crate::losses::SmoothLoss;
use crate::outer::{solve, OuterConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LambdaSearch {
    pub factor: f64,
    pub max_grid_steps: usize,
    pub bisection_steps: usize,
    /// A solution counts as zero when every group norm is below this.
    pub zero_tol: f64,
    /// Returned when the gradient at zero vanishes.
    pub grid_min: f64,
}

impl Default for LambdaSearch {
    fn default() -> Self {
        LambdaSearch {
            factor: 2.0,
            max_grid_steps: 60,
            bisection_steps: 20,
            zero_tol: 1e-10,
            grid_min: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaMinResult {
    pub lambda_min: f64,
    pub initial_guess: f64,
    /// Largest tested scale with a nonzero solution, if any.
    pub lower: Option<f64>,
    pub solves: usize,
}

/// `max_i ||grad f(0)[g_i]|| / sqrt(|g_i|)`.
pub fn initial_guess(loss: &dyn SmoothLoss, groups: &[Vec<usize>]) -> f64 {
    let g0 = loss.gradient(&vec![0.0; loss.dim()]);
    groups
        .iter()
        .map(|g| {
            let s: f64 = g.iter().map(|&j| g0[j] * g0[j]).sum();
            s.sqrt() / (g.len() as f64).sqrt()
        })
        .fold(0.0, f64::max)
}

pub fn find_lambda_min(
    loss: &dyn SmoothLoss,
    n: usize,
    groups: &[Vec<usize>],
    cfg: &OuterConfig,
    search: &LambdaSearch,
) -> Result<LambdaMinResult> {
    if !(search.factor > 1.0) {
        return Err(Error::InvalidConfig("lambda search factor must exceed 1".into()));
    }
    let guess = initial_guess(loss, groups);
    let mut solves = 0usize;
    if guess == 0.0 {
        return Ok(LambdaMinResult {
            lambda_min: search.grid_min,
            initial_guess: guess,
            lower: None,
            solves,
        });
    }
    let mut is_zero = |scale: f64| -> Result<bool> {
        solves += 1;
        let gs = GroupStructure::with_scaled_weights(n, groups.to_vec(), scale)?;
        let out = solve(loss, &gs, cfg)?;
        Ok(gs.group_norms(&out.x).iter().all(|&v| v < search.zero_tol))
    };

    let (mut lo, mut hi);
    if is_zero(guess)? {
        hi = guess;
        lo = guess / search.factor;
        let mut steps = 0;
        while is_zero(lo)? {
            hi = lo;
            lo /= search.factor;
            steps += 1;
            if steps >= search.max_grid_steps || lo < search.grid_min {
                return Err(Error::SearchExhausted { lo, hi });
            }
        }
    } else {
        lo = guess;
        hi = guess * search.factor;
        let mut steps = 0;
        while !is_zero(hi)? {
            lo = hi;
            hi *= search.factor;
            steps += 1;
            if steps >= search.max_grid_steps {
                return Err(Error::SearchExhausted { lo, hi });
            }
        }
    }
    for _ in 0..search.bisection_steps {
        let mid = 0.5 * (lo + hi);
        if is_zero(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(LambdaMinResult {
        lambda_min: hi,
        initial_guess: guess,
        lower: Some(lo),
        solves,
    })
}
