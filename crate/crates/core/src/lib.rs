//! Inexact proximal-gradient solver for problems of the form `f(x) + r(x)`,
//! where `r` is the overlapping group-l1 norm `sum_i lambda_i * ||x[g_i]||`.
//!
//! The outer loop ([`outer`]) computes inexact proximal-gradient updates whose
//! accuracy is certified by a primal-dual gap. Subproblems are solved in the
//! dual ([`prox_dual`]) by a projected gradient-ascent method that predicts
//! zero groups from the dual iterate and returns exactly sparse primal points.

pub mod data_io;
pub mod error;
pub mod groups;
pub mod lambda_min;
pub mod linalg;
pub mod losses;
pub mod metrics;
pub mod outer;
pub mod prox_dual;
pub mod synthetic;

pub use error::{Error, Result};
pub use groups::{DualVector, GroupStructure};
pub use losses::{Dataset, LogisticLoss, QuadraticLoss, SmoothLoss, SparseMatrix};
pub use outer::{solve, OuterConfig, RunRecord, SolveOutput, TerminalStatus};
pub use prox_dual::{ProxSubproblem, SubproblemResult, TerminationRule};
