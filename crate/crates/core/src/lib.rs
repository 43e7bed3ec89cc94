//! Multiobjective fractal decomposition optimizer.
//!
//! Each multiobjective problem is split into `n` weighted Tchebycheff
//! subproblems. Every subproblem is minimized by a deterministic hypersphere
//! decomposition search and contributes one point to the Pareto archive.
//! Subproblems are independent, so a coordinator spreads them over local
//! threads and remote workers.

pub mod benchmarks;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod pareto;
pub mod runner;
pub mod scalarization;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
