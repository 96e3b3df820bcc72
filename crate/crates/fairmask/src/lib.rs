//! fairmask: debias tabular datasets with a (non-)binary protected attribute.
//!
//! The core idea is a combinatorial subset-selection problem: a binary mask
//! over a sample pool selects the rows that form the output dataset, and a
//! black-box discrimination measure scores each candidate. Solvers (a random
//! heuristic and a genetic algorithm) minimize that score. The pool can be
//! the original data (removal), synthetic data only (privacy), the union of
//! both (merging), or synthetic additions on top of the fixed original data.
//!
//! Modules:
//! - [`dataset`]: CSV ingestion, one-hot encoding, views, CSV export
//! - [`measures`]: statistical-parity disparity measures over a view
//! - [`objective`]: sample pools, masks, and the fitness function
//! - [`heuristics`]: original baseline, random search, genetic algorithm
//! - [`synth`]: Gaussian-copula synthetic data generation
//! - [`harness`]: repeated-trial experiment runner and brute-force oracle
//! - [`cli`]: the `fairmask` command-line entry points
//!
//! See the crate examples for runnable walkthroughs of each capability.

pub mod cli;
pub mod dataset;
pub mod harness;
pub mod heuristics;
pub mod measures;
pub mod objective;
pub mod synth;

pub use dataset::{ColumnRoles, DatasetView, EncodedDataset, GroupStats};
pub use heuristics::{SolverConfig, SolverKind, SolverReport};
pub use measures::MeasureKind;
pub use objective::{Mask, ObjectiveSpec, PoolMode};
