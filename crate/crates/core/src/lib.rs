//! Stress analysis of an infinite plate with holes reinforced by bonded patches.
//!
//! The elastic fields are written as layer potentials over the hole and patch
//! boundaries. The unknown densities are truncated Fourier series found by
//! collocation; see [`solve`] for the end-to-end path.

pub mod assembly;
pub mod basis;
pub mod cli;
pub mod field;
pub mod geometry;
pub mod kernels;
pub mod layers;
pub mod linsolve;
pub mod model;
pub mod presets;
pub mod verify;

use thiserror::Error;

pub use field::{DensitySet, Region, Solution};
pub use model::{validate, ProblemSpec, ValidatedProblem};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Assembly(#[from] assembly::AssemblyError),
    #[error(transparent)]
    Solve(#[from] linsolve::SolveError),
    #[error(transparent)]
    Field(#[from] field::FieldError),
}

/// Assembles and solves at truncation `degree`; `nodes = None` picks the
/// default quadrature size.
pub fn solve(problem: &ValidatedProblem, degree: usize, nodes: Option<usize>) -> Result<(Solution, linsolve::SolveReport), Error> {
    let system = assembly::assemble(problem, degree, nodes)?;
    let (x, report) = linsolve::solve_dense(&system)?;
    let densities = linsolve::to_densities(problem, &system, &x);
    let solution = Solution::new(problem.clone(), densities, Some(system.nodes))?;
    Ok((solution, report))
}
