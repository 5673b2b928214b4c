//! Overlapping group structure and the linear maps of the dual subproblem.
//!
//! Coordinates and group indices are zero-based. The dual vector stacks one
//! block per group, in group order, so block `i` occupies
//! `offsets[i]..offsets[i + 1]`. The scatter operator `A` adds block `i` into
//! the coordinates of group `i`; its adjoint gathers those coordinates back.
//! `A` is never materialized.

use std::ops::{Deref, DerefMut, Range};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::norm;

/// Immutable description of the groups `g_i` and their weights `lambda_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GroupStructureDoc", into = "GroupStructureDoc")]
pub struct GroupStructure {
    n: usize,
    groups: Vec<Vec<usize>>,
    lambda: Vec<f64>,
    offsets: Vec<usize>,
    max_multiplicity: usize,
}

/// On-disk form: `{"n": .., "groups": [[..], ..], "lambda": [..]}`.
#[derive(Serialize, Deserialize)]
struct GroupStructureDoc {
    n: usize,
    groups: Vec<Vec<usize>>,
    lambda: Vec<f64>,
}

impl TryFrom<GroupStructureDoc> for GroupStructure {
    type Error = Error;

    fn try_from(doc: GroupStructureDoc) -> Result<Self> {
        GroupStructure::new(doc.n, doc.groups, doc.lambda)
    }
}

impl From<GroupStructure> for GroupStructureDoc {
    fn from(gs: GroupStructure) -> Self {
        GroupStructureDoc {
            n: gs.n,
            groups: gs.groups,
            lambda: gs.lambda,
        }
    }
}

impl GroupStructure {
    /// Validates and builds a structure. Every group must be nonempty, sorted,
    /// duplicate-free and inside `0..n`; the union of groups must be `0..n`;
    /// every weight must be strictly positive and finite.
    pub fn new(n: usize, groups: Vec<Vec<usize>>, lambda: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroups("dimension must be positive".into()));
        }
        if groups.is_empty() {
            return Err(Error::InvalidGroups("no groups given".into()));
        }
        if groups.len() != lambda.len() {
            return Err(Error::InvalidGroups(format!(
                "{} groups but {} weights",
                groups.len(),
                lambda.len()
            )));
        }
        let mut count = vec![0usize; n];
        for (i, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::InvalidGroups(format!("group {i} is empty")));
            }
            if g.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGroups(format!(
                    "group {i} is not strictly increasing"
                )));
            }
            if let Some(&j) = g.iter().find(|&&j| j >= n) {
                return Err(Error::InvalidGroups(format!(
                    "group {i} has index {j} outside 0..{n}"
                )));
            }
            for &j in g {
                count[j] += 1;
            }
        }
        if let Some(j) = count.iter().position(|&c| c == 0) {
            return Err(Error::InvalidGroups(format!(
                "coordinate {j} is not covered by any group"
            )));
        }
        if let Some(i) = lambda.iter().position(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidGroups(format!(
                "weight {i} = {} is not strictly positive",
                lambda[i]
            )));
        }
        let mut offsets = Vec::with_capacity(groups.len() + 1);
        offsets.push(0);
        for g in &groups {
            offsets.push(offsets.last().unwrap() + g.len());
        }
        let max_multiplicity = count.into_iter().max().unwrap_or(0);
        Ok(GroupStructure {
            n,
            groups,
            lambda,
            offsets,
            max_multiplicity,
        })
    }

    /// Builds a structure with weights `lambda_i = scale * sqrt(|g_i|)`.
    pub fn with_scaled_weights(n: usize, groups: Vec<Vec<usize>>, scale: f64) -> Result<Self> {
        let lambda = sqrt_size_weights(&groups, scale)?;
        Self::new(n, groups, lambda)
    }

    /// Same groups, weights reset to `scale * sqrt(|g_i|)`.
    pub fn set_weights(&self, scale: f64) -> Result<Self> {
        let lambda = sqrt_size_weights(&self.groups, scale)?;
        Ok(GroupStructure {
            lambda,
            ..self.clone()
        })
    }

    /// Same groups, explicit weights.
    pub fn with_lambda(&self, lambda: Vec<f64>) -> Result<Self> {
        Self::new(self.n, self.groups.clone(), lambda)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &[usize] {
        &self.groups[i]
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Length of the stacked dual vector, `sum_i |g_i|`.
    pub fn dual_dim(&self) -> usize {
        self.offsets[self.groups.len()]
    }

    /// Index range of dual block `i` (the mapping `M(i)`).
    pub fn block_range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Largest number of groups sharing one coordinate. `A A^T` is diagonal
    /// with these counts, so this is also `||A||^2`.
    pub fn max_multiplicity(&self) -> usize {
        self.max_multiplicity
    }

    /// `||x[g_i]||` for each group.
    pub fn group_norms(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        self.groups
            .iter()
            .map(|g| g.iter().map(|&j| x[j] * x[j]).sum::<f64>().sqrt())
            .collect()
    }

    /// `||y[M(i)]||` for each dual block.
    pub fn block_norms(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.dual_dim());
        (0..self.groups.len())
            .map(|i| norm(&y[self.block_range(i)]))
            .collect()
    }

    /// `r(x) = sum_i lambda_i ||x[g_i]||`.
    pub fn regularizer_value(&self, x: &[f64]) -> Result<f64> {
        check_len(self.n, x.len())?;
        Ok(self.penalty(x))
    }

    pub(crate) fn penalty(&self, x: &[f64]) -> f64 {
        self.group_norms(x)
            .iter()
            .zip(&self.lambda)
            .map(|(nrm, l)| l * nrm)
            .sum()
    }

    /// `A y`: scatter-add every block into its group's coordinates.
    pub fn apply_a(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dual_dim(), y.len())?;
        let mut out = vec![0.0; self.n];
        self.apply_a_into(y, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_a_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.dual_dim());
        debug_assert_eq!(out.len(), self.n);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, g) in self.groups.iter().enumerate() {
            let block = &y[self.block_range(i)];
            for (&j, &v) in g.iter().zip(block) {
                out[j] += v;
            }
        }
    }

    /// `A^T v`: gather each group's coordinates into its block.
    pub fn apply_a_transpose(&self, v: &[f64]) -> Result<DualVector> {
        check_len(self.n, v.len())?;
        let mut out = DualVector::zeros(self);
        self.apply_a_transpose_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_a_transpose_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n);
        debug_assert_eq!(out.len(), self.dual_dim());
        for (i, g) in self.groups.iter().enumerate() {
            let block = &mut out[self.offsets[i]..self.offsets[i + 1]];
            for (b, &j) in block.iter_mut().zip(g) {
                *b = v[j];
            }
        }
    }

    /// Blockwise projection onto `{y : ||y[M(i)]|| <= lambda_i for all i}`.
    pub fn project_dual_feasible(&self, y: &[f64]) -> DualVector {
        let mut out = DualVector::from_vec(y.to_vec());
        self.project_dual_in_place(&mut out);
        out
    }

    pub fn project_dual_in_place(&self, y: &mut [f64]) {
        debug_assert_eq!(y.len(), self.dual_dim());
        for (i, &lam) in self.lambda.iter().enumerate() {
            let block = &mut y[self.offsets[i]..self.offsets[i + 1]];
            let nrm = norm(block);
            if nrm > lam {
                let scale = lam / nrm;
                block.iter_mut().for_each(|v| *v *= scale);
            }
        }
    }

    /// True when every block norm is at most `lambda_i * (1 + rel_tol)`.
    pub fn is_dual_feasible(&self, y: &[f64], rel_tol: f64) -> bool {
        y.len() == self.dual_dim()
            && self
                .block_norms(y)
                .iter()
                .zip(&self.lambda)
                .all(|(nrm, lam)| *nrm <= lam * (1.0 + rel_tol))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn sqrt_size_weights(groups: &[Vec<usize>], scale: f64) -> Result<Vec<f64>> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "weight scale must be positive, got {scale}"
        )));
    }
    Ok(groups
        .iter()
        .map(|g| scale * (g.len() as f64).sqrt())
        .collect())
}

/// Chain of groups of `grpsize` consecutive coordinates where neighbours
/// share `round(ratio * grpsize)` coordinates.
///
/// The final group is truncated at `n`. When `grpsize >= n` the result is the
/// single group `0..n`.
pub fn generate_groups(n: usize, ratio: f64, grpsize: usize) -> Result<Vec<Vec<usize>>> {
    if n == 0 || grpsize == 0 {
        return Err(Error::InvalidConfig(
            "dimension and group size must be positive".into(),
        ));
    }
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::InvalidConfig(format!(
            "overlap ratio must lie in [0, 1), got {ratio}"
        )));
    }
    let overlap = (ratio * grpsize as f64).round() as usize;
    if overlap >= grpsize {
        return Err(Error::InvalidConfig(format!(
            "overlap {overlap} (= round({ratio} * {grpsize})) must be smaller than the group size"
        )));
    }
    if grpsize >= n {
        return Ok(vec![(0..n).collect()]);
    }
    let stride = grpsize - overlap;
    let mut groups = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + grpsize).min(n);
        groups.push((start..end).collect::<Vec<_>>());
        if end == n {
            break;
        }
        start += stride;
    }
    Ok(groups)
}

/// Stacked dual vector with one block per group.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DualVector(Vec<f64>);

impl DualVector {
    pub fn zeros(gs: &GroupStructure) -> Self {
        DualVector(vec![0.0; gs.dual_dim()])
    }

    pub fn from_vec(v: Vec<f64>) -> Self {
        DualVector(v)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn block<'a>(&'a self, gs: &GroupStructure, i: usize) -> &'a [f64] {
        &self.0[gs.block_range(i)]
    }
}

impl Deref for DualVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DualVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}
