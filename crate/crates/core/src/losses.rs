//! Smooth loss models `f`: binary logistic loss over a sparse dataset and a
//! strongly convex quadratic used for tests with known solutions.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Number of power iterations used for the spectral norm estimate.
pub const POWER_ITERATIONS: usize = 20;

/// Row-major sparse matrix. Column indices are zero-based and strictly
/// increasing within a row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if indptr.len() != nrows + 1 || indptr[0] != 0 {
            return Err(Error::InvalidDataset("malformed row pointer".into()));
        }
        if indices.len() != values.len() || *indptr.last().unwrap() != indices.len() {
            return Err(Error::InvalidDataset("row pointer does not match entries".into()));
        }
        for r in 0..nrows {
            let (lo, hi) = (indptr[r], indptr[r + 1]);
            if lo > hi {
                return Err(Error::InvalidDataset(format!("row {r} has negative length")));
            }
            let cols = &indices[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidDataset(format!(
                    "row {r} column indices are not strictly increasing"
                )));
            }
            if cols.last().is_some_and(|&c| c >= ncols) {
                return Err(Error::InvalidDataset(format!("row {r} has a column >= {ncols}")));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("non-finite entry {v}")));
        }
        Ok(SparseMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    /// Builds from rows of `(column, value)` pairs; zero values are dropped.
    pub fn from_rows(ncols: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            for &(c, v) in row {
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self::new(rows.len(), ncols, indptr, indices, values)
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let rows: Vec<Vec<(usize, f64)>> = (0..a.nrows())
            .map(|i| (0..a.ncols()).map(|j| (j, a[(i, j)])).collect())
            .collect();
        Self::from_rows(a.ncols(), &rows).expect("dense matrix is well formed")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[range.clone()], &self.values[range])
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[usize], &[f64])> + '_ {
        (0..self.nrows).map(move |r| self.row(r))
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let (cols, vals) = self.row(r);
        cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
    }

    /// `D x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows).map(|r| self.row_dot(r, x)).collect()
    }

    /// `D^T z`
    pub fn mul_transpose_vec(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (r, &zr) in z.iter().enumerate() {
            if zr == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[c] += zr * v;
            }
        }
        out
    }

    /// Estimate of `||D||_2^2` by power iteration on `D^T D` from a fixed
    /// pseudo-random start. Never exceeds the true value (up to rounding).
    pub fn spectral_norm_sq_estimate(&self, iterations: usize) -> f64 {
        if self.nnz() == 0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut v: Vec<f64> = (0..self.ncols).map(|_| rng.random_range(0.5..1.5)).collect();
        let mut estimate = 0.0;
        for _ in 0..iterations.max(1) {
            let nv = norm(&v);
            if nv == 0.0 {
                break;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            let dv = self.mul_vec(&v);
            estimate = dot(&dv, &dv);
            v = self.mul_transpose_vec(&dv);
        }
        estimate
    }
}

/// Labelled data points: one feature row per point, labels in `{-1, +1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: SparseMatrix,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(features: SparseMatrix, labels: Vec<f64>) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::InvalidDataset("dataset has no rows".into()));
        }
        if features.ncols() == 0 {
            return Err(Error::InvalidDataset("dataset has no features".into()));
        }
        if labels.len() != features.nrows() {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {} rows",
                labels.len(),
                features.nrows()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l != 1.0 && l != -1.0) {
            return Err(Error::InvalidDataset(format!("label {l} is not +1 or -1")));
        }
        Ok(Dataset { features, labels })
    }

    pub fn features(&self) -> &SparseMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn num_points(&self) -> usize {
        self.labels.len()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub(crate) fn into_parts(self) -> (SparseMatrix, Vec<f64>) {
        (self.features, self.labels)
    }
}

/// A continuously differentiable `f` with Lipschitz gradient.
pub trait SmoothLoss: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.value(x), self.gradient(x))
    }

    /// Estimate of the gradient's Lipschitz constant.
    fn lipschitz_estimate(&self) -> f64;

    /// Strong convexity modulus, when known.
    fn strong_convexity(&self) -> Option<f64> {
        None
    }
}

/// `f(x) = (1/N) sum_i log(1 + exp(-y_i d_i^T x))`.
#[derive(Clone, Debug)]
pub struct LogisticLoss {
    data: Dataset,
    lipschitz: f64,
}

impl LogisticLoss {
    pub fn new(data: Dataset) -> Self {
        let lipschitz = logistic_lipschitz(&data);
        LogisticLoss { data, lipschitz }
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    fn margins(&self, x: &[f64]) -> Vec<f64> {
        let d = &self.data.features;
        (0..d.nrows())
            .map(|r| self.data.labels[r] * d.row_dot(r, x))
            .collect()
    }
}

/// `log(1 + exp(-t))` without overflow.
#[inline]
pub fn log1p_exp_neg(t: f64) -> f64 {
    (-t.abs()).exp().ln_1p() + (-t).max(0.0)
}

/// `1 / (1 + exp(t))`, i.e. the sigmoid evaluated at `-t`.
#[inline]
pub fn sigmoid_neg(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

impl SmoothLoss for LogisticLoss {
    fn dim(&self) -> usize {
        self.data.num_features()
    }

    fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let n = self.data.num_points() as f64;
        self.margins(x).into_iter().map(log1p_exp_neg).sum::<f64>() / n
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        debug_assert_eq!(x.len(), self.dim());
        let n = self.data.num_points() as f64;
        let margins = self.margins(x);
        let value = margins.iter().map(|&t| log1p_exp_neg(t)).sum::<f64>() / n;
        let weights: Vec<f64> = margins
            .iter()
            .zip(&self.data.labels)
            .map(|(&t, &y)| -y * sigmoid_neg(t) / n)
            .collect();
        (value, self.data.features.mul_transpose_vec(&weights))
    }

    fn lipschitz_estimate(&self) -> f64 {
        self.lipschitz
    }
}

/// `||D||^2 / (4N)` with `||D||` estimated by power iteration.
pub fn logistic_lipschitz(data: &Dataset) -> f64 {
    data.features.spectral_norm_sq_estimate(POWER_ITERATIONS) / (4.0 * data.num_points() as f64)
}

/// Symmetric positive definite Hessian of a quadratic model.
#[derive(Clone, Debug)]
pub enum QuadMatrix {
    Diagonal(Vec<f64>),
    Dense(DMatrix<f64>),
}

/// `f(x) = 0.5 x^T Q x - b^T x` with `Q` symmetric positive definite.
#[derive(Clone, Debug)]
pub struct QuadraticLoss {
    q: QuadMatrix,
    b: Vec<f64>,
    mu: f64,
    lipschitz: f64,
}

impl QuadraticLoss {
    pub fn diagonal(diag: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if diag.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len(),
                got: b.len(),
            });
        }
        if diag.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidConfig("diagonal must be strictly positive".into()));
        }
        let mu = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let lipschitz = diag.iter().cloned().fold(0.0, f64::max);
        Ok(QuadraticLoss {
            q: QuadMatrix::Diagonal(diag),
            b,
            mu,
            lipschitz,
        })
    }

    pub fn dense(q: DMatrix<f64>, b: Vec<f64>) -> Result<Self> {
        if !q.is_square() || q.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: q.nrows(),
                got: b.len(),
            });
        }
        if (&q - q.transpose()).amax() > 1e-12 * q.amax().max(1.0) {
            return Err(Error::InvalidConfig("quadratic matrix is not symmetric".into()));
        }
        let eig = SymmetricEigen::new(q.clone()).eigenvalues;
        let mu = eig.min();
        let lipschitz = eig.max();
        if !(mu > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "quadratic matrix is not positive definite (smallest eigenvalue {mu})"
            )));
        }
        Ok(QuadraticLoss {
            q: QuadMatrix::Dense(q),
            b,
            mu,
            lipschitz,
        })
    }

    pub fn matrix(&self) -> &QuadMatrix {
        &self.q
    }

    pub fn linear_term(&self) -> &[f64] {
        &self.b
    }

    pub fn hess_vec(&self, x: &[f64]) -> Vec<f64> {
        match &self.q {
            QuadMatrix::Diagonal(d) => d.iter().zip(x).map(|(a, b)| a * b).collect(),
            QuadMatrix::Dense(q) => (0..q.nrows())
                .map(|i| q.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
                .collect(),
        }
    }
}

impl SmoothLoss for QuadraticLoss {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.hess_vec(x)) - dot(&self.b, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.hess_vec(x);
        g.iter_mut().zip(&self.b).for_each(|(gi, bi)| *gi -= bi);
        g
    }

    fn lipschitz_estimate(&self) -> f64 {
        self.lipschitz
    }

    fn strong_convexity(&self) -> Option<f64> {
        Some(self.mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        let d = SparseMatrix::from_rows(
            3,
            &[
                vec![(0, 1.0), (2, -0.5)],
                vec![(1, 2.0)],
                vec![(0, -1.0), (1, 0.5), (2, 1.0)],
            ],
        )
        .unwrap();
        Dataset::new(d, vec![1.0, -1.0, 1.0]).unwrap()
    }

    #[test]
    fn value_at_zero_is_log_two() {
        let f = LogisticLoss::new(tiny());
        assert!((f.value(&[0.0; 3]) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn gradient_at_zero() {
        let data = tiny();
        let f = LogisticLoss::new(data.clone());
        let g = f.gradient(&[0.0; 3]);
        let mut expect = vec![0.0; 3];
        for (r, &y) in data.labels().iter().enumerate() {
            let (cols, vals) = data.features().row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                expect[c] -= y * v / (2.0 * 3.0);
            }
        }
        for (a, b) in g.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn separable_limit() {
        let d = SparseMatrix::from_rows(2, &[vec![(0, 1.0)]]).unwrap();
        let f = LogisticLoss::new(Dataset::new(d, vec![1.0]).unwrap());
        let t = 3.0;
        assert!((f.value(&[t, 0.0]) - (1.0 + (-t).exp()).ln()).abs() < 1e-15);
        assert!(f.value(&[800.0, 0.0]) < 1e-300);
        assert!(f.gradient(&[800.0, 0.0])[0].abs() < 1e-300);
        assert!(f.value(&[-800.0, 0.0]).is_finite());
    }

    #[test]
    fn lipschitz_rank_one_and_identity() {
        let d = SparseMatrix::from_rows(2, &[vec![(0, 1.0), (1, -1.0)]]).unwrap();
        let f = LogisticLoss::new(Dataset::new(d, vec![1.0]).unwrap());
        assert!((f.lipschitz_estimate() - 2.0 / 4.0).abs() < 1e-12);

        let n = 5;
        let rows: Vec<Vec<(usize, f64)>> = (0..n).map(|i| vec![(i, 1.0)]).collect();
        let d = SparseMatrix::from_rows(n, &rows).unwrap();
        let f = LogisticLoss::new(Dataset::new(d, vec![1.0; n]).unwrap());
        assert!((f.lipschitz_estimate() - 1.0 / (4.0 * n as f64)).abs() < 1e-12);
    }

    #[test]
    fn quadratic_constants() {
        let n = 6;
        let diag: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let q = QuadraticLoss::diagonal(diag, vec![0.0; n]).unwrap();
        assert_eq!(q.strong_convexity(), Some(1.0));
        assert_eq!(q.lipschitz_estimate(), n as f64);
        assert_eq!(q.gradient(&[0.0; 6]), vec![0.0; 6]);
    }

    #[test]
    fn dense_quadratic_rejects_indefinite() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(QuadraticLoss::dense(q, vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn dataset_validation() {
        let d = SparseMatrix::from_rows(2, &[vec![(0, 1.0)]]).unwrap();
        assert!(Dataset::new(d.clone(), vec![0.0]).is_err());
        assert!(Dataset::new(d, vec![1.0, 1.0]).is_err());
        let empty = SparseMatrix::from_rows(2, &[]).unwrap();
        assert!(Dataset::new(empty, vec![]).is_err());
        assert!(SparseMatrix::from_rows(2, &[vec![(1, 1.0), (0, 1.0)]]).is_err());
        assert!(SparseMatrix::from_rows(2, &[vec![(2, 1.0)]]).is_err());
        assert!(SparseMatrix::from_rows(2, &[vec![(0, f64::NAN)]]).is_err());
    }
}
