//! Seeded synthetic problem instances.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::groups::GroupStructure;
use crate::losses::{Dataset, QuadraticLoss, SparseMatrix};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sparse binary classification data. Each feature is present with
/// probability `density`; labels follow a planted linear model whose
/// weights live on a few contiguous blocks, with 5% of labels flipped.
pub fn logistic_dataset(n_points: usize, n_features: usize, density: f64, seed: u64) -> Result<Dataset> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidConfig(format!("density must lie in (0, 1], got {density}")));
    }
    let mut r = rng(seed);
    let mut w = vec![0.0; n_features];
    let block = (n_features / 10).max(1);
    let mut start = 0;
    while start < n_features {
        if r.random::<f64>() < 0.3 {
            for wj in w.iter_mut().skip(start).take(block) {
                *wj = r.sample::<f64, _>(StandardNormal) * 2.0;
            }
        }
        start += block;
    }
    let mut rows = Vec::with_capacity(n_points);
    let mut labels = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let mut row = Vec::new();
        for j in 0..n_features {
            if r.random::<f64>() < density {
                let v: f64 = r.random_range(-1.0..1.0);
                if v != 0.0 {
                    row.push((j, v));
                }
            }
        }
        let score: f64 = row.iter().map(|&(j, v)| w[j] * v).sum();
        let mut label = if score >= 0.0 { 1.0 } else { -1.0 };
        if r.random::<f64>() < 0.05 {
            label = -label;
        }
        rows.push(row);
        labels.push(label);
    }
    // Guarantee both classes appear.
    if labels.iter().all(|&l| l == labels[0]) {
        labels[0] = -labels[0];
    }
    Dataset::new(SparseMatrix::from_rows(n_features, &rows)?, labels)
}

/// Chain of `count` groups of `size` coordinates spread evenly over `0..n`.
pub fn even_chain(n: usize, count: usize, size: usize) -> Result<Vec<Vec<usize>>> {
    if count == 0 || size == 0 || size > n {
        return Err(Error::InvalidGroups(format!(
            "cannot place {count} groups of size {size} in {n} coordinates"
        )));
    }
    let span = n - size;
    Ok((0..count)
        .map(|i| {
            let start = if count == 1 { 0 } else { i * span / (count - 1) };
            (start..start + size).collect()
        })
        .collect())
}

/// Strongly convex quadratic `0.5 x^T Q x - b^T x` with
/// `Q = M^T M / m + mu I` for a Gaussian `m x n` matrix `M`, and `b`
/// Gaussian scaled by `b_scale`.
pub fn random_quadratic(n: usize, mu: f64, b_scale: f64, seed: u64) -> Result<QuadraticLoss> {
    let mut r = rng(seed);
    let m = 2 * n;
    let mm = DMatrix::<f64>::from_fn(m, n, |_, _| r.sample(StandardNormal));
    let q = mm.transpose() * &mm / (m as f64) + DMatrix::<f64>::identity(n, n) * mu;
    let q = (&q + q.transpose()) * 0.5;
    let b = (0..n).map(|_| b_scale * r.sample::<f64, _>(StandardNormal)).collect();
    QuadraticLoss::dense(q, b)
}

/// Instance with n = 200 and 30 overlapping groups of size 10.
pub fn chain_quadratic_instance(lambda_scale: f64, seed: u64) -> Result<(QuadraticLoss, GroupStructure)> {
    let n = 200;
    let groups = even_chain(n, 30, 10)?;
    let loss = random_quadratic(n, 0.1, 1.0, seed)?;
    let gs = GroupStructure::with_scaled_weights(n, groups, lambda_scale)?;
    Ok((loss, gs))
}

/// A quadratic whose minimizer together with `r` is known in closed form.
#[derive(Clone, Debug)]
pub struct PlantedQuadratic {
    pub loss: QuadraticLoss,
    pub gs: GroupStructure,
    pub x_star: Vec<f64>,
    /// Dual certificate with `grad f(x*) + A y* = 0`.
    pub y_star: Vec<f64>,
    /// Groups nonzero at `x*`.
    pub support: Vec<usize>,
    /// `min_i (lambda_i - ||y*_i||)` over the zero groups.
    pub margin: f64,
}

/// Plants a sparse minimizer of `0.5 x^T diag(q) x - b^T x + r(x)`.
///
/// Groups are drawn active with probability `active_prob`; every coordinate
/// covered by an inactive group is zero and the remaining coordinates get
/// values bounded away from zero. Active blocks of the certificate are
/// `lambda_i x*_i / ||x*_i||`; inactive blocks have norm
/// `(1 - margin_frac) lambda_i`. Then `b = Q x* + A y*` makes `x*` optimal,
/// with strict complementarity on every zero group.
pub fn planted_quadratic(
    gs: &GroupStructure,
    q_range: (f64, f64),
    active_prob: f64,
    margin_frac: f64,
    seed: u64,
) -> Result<PlantedQuadratic> {
    let (q_lo, q_hi) = q_range;
    if !(q_lo > 0.0 && q_hi >= q_lo) || !(margin_frac > 0.0 && margin_frac < 1.0) {
        return Err(Error::InvalidConfig("invalid planted quadratic parameters".into()));
    }
    let n = gs.n();
    let mut r = rng(seed);
    for _attempt in 0..1000 {
        let active: Vec<bool> = (0..gs.num_groups())
            .map(|_| r.random::<f64>() < active_prob)
            .collect();
        let mut forced_zero = vec![false; n];
        for (i, g) in gs.groups().iter().enumerate() {
            if !active[i] {
                g.iter().for_each(|&j| forced_zero[j] = true);
            }
        }
        // Every active group needs a free coordinate, and something must be
        // both active and inactive for the test to mean anything.
        let ok = gs
            .groups()
            .iter()
            .enumerate()
            .all(|(i, g)| !active[i] || g.iter().any(|&j| !forced_zero[j]));
        if !ok || active.iter().all(|&a| a) || active.iter().all(|&a| !a) {
            continue;
        }
        let x_star: Vec<f64> = (0..n)
            .map(|j| {
                if forced_zero[j] {
                    0.0
                } else {
                    let mag: f64 = r.random_range(0.5..1.5);
                    if r.random::<bool>() {
                        mag
                    } else {
                        -mag
                    }
                }
            })
            .collect();
        let mut y = vec![0.0; gs.dual_dim()];
        let mut margin = f64::INFINITY;
        for (i, g) in gs.groups().iter().enumerate() {
            let lam = gs.lambda()[i];
            let block = &mut y[gs.block_range(i)];
            if active[i] {
                let nrm: f64 = g.iter().map(|&j| x_star[j] * x_star[j]).sum::<f64>().sqrt();
                for (yb, &j) in block.iter_mut().zip(g) {
                    *yb = lam * x_star[j] / nrm;
                }
            } else {
                let dir: Vec<f64> = g.iter().map(|_| r.sample(StandardNormal)).collect();
                let dn = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
                let target = (1.0 - margin_frac) * lam;
                for (yb, d) in block.iter_mut().zip(&dir) {
                    *yb = target * d / dn;
                }
                margin = margin.min(lam - target);
            }
        }
        let diag: Vec<f64> = (0..n).map(|_| r.random_range(q_lo..=q_hi)).collect();
        let ay = gs.apply_a(&y)?;
        let b: Vec<f64> = (0..n).map(|j| diag[j] * x_star[j] + ay[j]).collect();
        let loss = QuadraticLoss::diagonal(diag, b)?;
        let support = (0..gs.num_groups()).filter(|&i| active[i]).collect();
        return Ok(PlantedQuadratic {
            loss,
            gs: gs.clone(),
            x_star,
            y_star: y,
            support,
            margin,
        });
    }
    Err(Error::InvalidConfig(
        "could not draw a mixed active/inactive group pattern".into(),
    ))
}
