//! Relaxed minimization, minimizing sequences for `F`, and the gap report.

mod gap;
mod solver;

use thiserror::Error;

pub use gap::{epsilon_schedule, gap_report, minimizing_sequence, write_gap_csv, GapReport, GapStep, SequenceStep};
pub use solver::{minimize_relaxed, RelaxedSolution, SolverOptions, StepRule};

use crate::construct::ConstructError;
use crate::mesh::{EnergyError, MeshError};

#[derive(Debug, Error)]
pub enum RelaxError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error("invalid solver input: {0}")]
    Invalid(String),
    #[error("solver stopped at F** = {value} after {iterations} iterations; lower bound {bound}")]
    NotConverged { value: f64, bound: f64, iterations: usize, solution: Box<RelaxedSolution> },
    #[error("step {n}: F(v) = {f_v} is below min F** = {min}")]
    Sandwich { n: usize, f_v: f64, min: f64 },
    #[error("step {n}: sup |∇v| = {sup} exceeds K = {k}")]
    GradientBound { n: usize, sup: f64, k: f64 },
}
