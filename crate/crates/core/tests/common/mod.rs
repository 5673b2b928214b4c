//! Test-side oracles, written independently of the library internals.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ogl_core::groups::generate_groups;
use ogl_core::GroupStructure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Explicit `n x sum|g_i|` scatter matrix: column `offset_i + l` has a one in
/// row `g_i[l]`.
pub fn dense_a(gs: &GroupStructure) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(gs.n(), gs.dual_dim());
    let mut col = 0;
    for g in gs.groups() {
        for &j in g {
            a[(j, col)] = 1.0;
            col += 1;
        }
    }
    a
}

/// Random chain-style structure with overlaps, `n <= max_n`.
pub fn random_overlapping(r: &mut ChaCha8Rng, max_n: usize) -> GroupStructure {
    loop {
        let n = r.random_range(4..=max_n);
        let grpsize = r.random_range(2..=n.min(6));
        let overlap = r.random_range(1..grpsize);
        let ratio = overlap as f64 / grpsize as f64;
        let Ok(groups) = generate_groups(n, ratio, grpsize) else {
            continue;
        };
        let lambda = (0..groups.len()).map(|_| r.random_range(0.05..1.0)).collect();
        return GroupStructure::new(n, groups, lambda).unwrap();
    }
}

/// Random partition of `0..n` into contiguous blocks.
pub fn random_partition(r: &mut ChaCha8Rng, max_n: usize) -> GroupStructure {
    let n = r.random_range(2..=max_n);
    let mut groups = Vec::new();
    let mut start = 0;
    while start < n {
        let len = r.random_range(1..=4).min(n - start);
        groups.push((start..start + len).collect());
        start += len;
    }
    let lambda = (0..groups.len()).map(|_| r.random_range(0.05..1.0)).collect();
    GroupStructure::new(n, groups, lambda).unwrap()
}

pub fn gaussian_vec(r: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| scale * r.sample::<f64, _>(rand_distr::StandardNormal))
        .collect()
}

/// `(1/(2 alpha)) ||x - u||^2 + sum lambda_i ||x_gi||`, evaluated directly.
pub fn phi_naive(gs: &GroupStructure, u: &[f64], alpha: f64, x: &[f64]) -> f64 {
    let quad: f64 = x.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (2.0 * alpha);
    let reg: f64 = gs
        .groups()
        .iter()
        .zip(gs.lambda())
        .map(|(g, l)| l * g.iter().map(|&j| x[j] * x[j]).sum::<f64>().sqrt())
        .sum();
    quad + reg
}

/// `-(alpha/2) ||A y||^2 - u^T A y` through the dense matrix.
pub fn phi_dual_naive(a: &DMatrix<f64>, u: &[f64], alpha: f64, y: &[f64]) -> f64 {
    let ay = a * DVector::from_column_slice(y);
    -0.5 * alpha * ay.norm_squared() - DVector::from_column_slice(u).dot(&ay)
}

fn project_balls(gs: &GroupStructure, y: &mut [f64]) {
    let mut off = 0;
    for (g, &l) in gs.groups().iter().zip(gs.lambda()) {
        let b = &mut y[off..off + g.len()];
        let nrm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm > l {
            b.iter_mut().for_each(|v| *v *= l / nrm);
        }
        off += g.len();
    }
}

pub struct OracleSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub gap: f64,
}

/// Accelerated projected gradient on the dual with adaptive restarts, using
/// the dense `A`. The primal point is `u + alpha A y`; the gap is
/// `phi - phi_d` evaluated directly.
pub fn prox_oracle(gs: &GroupStructure, u: &[f64], alpha: f64, target_gap: f64) -> OracleSolution {
    let a = dense_a(gs);
    let at = a.transpose();
    let uv = DVector::from_column_slice(u);
    let lip = alpha * (&a * &at).symmetric_eigenvalues().max();
    let step = 1.0 / lip;
    let m = gs.dual_dim();
    let mut y = DVector::<f64>::zeros(m);
    let mut w = y.clone();
    let mut t = 1.0f64;
    let mut best = OracleSolution {
        x: u.to_vec(),
        y: vec![0.0; m],
        gap: f64::INFINITY,
    };
    for it in 0..2_000_000 {
        let x_w = &uv + alpha * (&a * &w);
        let grad = -(&at * &x_w);
        let mut y_next = &w + step * grad;
        project_balls(gs, y_next.as_mut_slice());
        // Restart when the momentum direction opposes ascent.
        if (&y_next - &y).dot(&(&y_next - &w)) < 0.0 {
            t = 1.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        w = &y_next + ((t - 1.0) / t_next) * (&y_next - &y);
        y = y_next;
        t = t_next;
        if it % 50 == 0 {
            let x = (&uv + alpha * (&a * &y)).as_slice().to_vec();
            let gap = phi_naive(gs, u, alpha, &x) - phi_dual_naive(&a, u, alpha, y.as_slice());
            if gap < best.gap {
                best = OracleSolution {
                    x,
                    y: y.as_slice().to_vec(),
                    gap,
                };
            }
            if best.gap <= target_gap {
                break;
            }
        }
    }
    best
}

/// `(1 - alpha lambda / ||u_g||)_+ u_g` on each block of a partition.
pub fn soft_threshold_oracle(gs: &GroupStructure, u: &[f64], alpha: f64) -> Vec<f64> {
    let mut x = vec![0.0; u.len()];
    for (g, &l) in gs.groups().iter().zip(gs.lambda()) {
        let nrm = g.iter().map(|&j| u[j] * u[j]).sum::<f64>().sqrt();
        let scale = (1.0 - alpha * l / nrm).max(0.0);
        for &j in g {
            x[j] = scale * u[j];
        }
    }
    x
}

/// Central differences of `f` at `x` with step `h`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|j| {
            let orig = xp[j];
            xp[j] = orig + h;
            let fp = f(&xp);
            xp[j] = orig - h;
            let fm = f(&xp);
            xp[j] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Largest relative coordinate error, relative to the gradient scale.
pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-8);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max)
}
