//! Experiment runner for the overlapping group-l1 proximal-gradient solver:
//! single solves, experiment grids with status tables, Table-style
//! comparisons and performance profiles.

pub mod compare;
pub mod config;
pub mod error;
pub mod grid;
pub mod output;
pub mod run;

pub use error::{Error, Result};
