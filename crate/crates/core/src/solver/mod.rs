//! Nonlinear Dirichlet solvers for the divergence-form equation on radial
//! domains (exact first-integral reduction) and truncated Poincaré disks
//! (damped-Newton finite differences in geodesic polar coordinates), plus
//! the removability probe and the discrete comparison check.

mod band;
mod disk;
mod probe;
mod radial;

pub use disk::{solve_disk, DiskGrid, DiskSolution, RGrading, ThetaGrading};
pub use probe::{removability_probe, ProbeData, ProbeEntry, ProbeGridParams, ProbeReport};
pub use radial::{solve_radial_bvp, RadialGrading, RadialGrid};

use crate::fields::FieldError;
use crate::geometry::Point;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("linear system ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("comparison precondition violated: v < u on the boundary (node {index}: u = {u}, v = {v})")]
    BoundaryOrderViolated { index: usize, u: f64, v: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Discrete solution with convergence diagnostics.
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub values: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Accepted line-search step factors, one per Newton step.
    pub damping_history: Vec<f64>,
}

/// Discrete comparison report: `v ≥ u − allowance` at interior nodes.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// Minimum of `v − u` over boundary nodes (precondition margin).
    pub boundary_min_margin: f64,
    /// Interior nodes with `v < u − allowance`.
    pub interior_violations: usize,
    /// Minimum of `v − u` over interior nodes.
    pub worst_interior_margin: f64,
    pub allowance: f64,
}

impl ComparisonReport {
    pub fn pass(&self) -> bool {
        self.interior_violations == 0
    }
}

/// Checks the discrete comparison principle between a disk solution `u`
/// and a reference function `v` (a composed field or another solution
/// sampled at grid points). Requires `v ≥ u` on the boundary ring; then
/// counts interior nodes with `v < u − allowance` (the `C·h²` allowance
/// is the caller's, typically from a refinement study).
pub fn comparison_check(
    u: &DiskSolution,
    v: &dyn Fn(&Point) -> Result<f64, FieldError>,
    allowance: f64,
) -> Result<ComparisonReport, SolverError> {
    let grid = &u.grid;
    let mut boundary_min = f64::INFINITY;
    for j in 0..grid.ntheta {
        let p = grid.point(grid.nr, j);
        let vv = v(&p)?;
        let m = vv - u.value(grid.nr, j);
        if m < boundary_min {
            boundary_min = m;
        }
    }
    if boundary_min < -1e-12 {
        let (index, _) = (0..grid.ntheta)
            .map(|j| (j, v(&grid.point(grid.nr, j)).unwrap_or(f64::NAN) - u.value(grid.nr, j)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        return Err(SolverError::BoundaryOrderViolated {
            index,
            u: u.value(grid.nr, index),
            v: v(&grid.point(grid.nr, index))?,
        });
    }
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    for i in 0..grid.nr {
        let jmax = if i == 0 { 1 } else { grid.ntheta };
        for j in 0..jmax {
            let p = grid.point(i, j);
            let m = v(&p)? - u.value(i, j);
            if m < worst {
                worst = m;
            }
            if m < -allowance {
                violations += 1;
            }
        }
    }
    Ok(ComparisonReport {
        boundary_min_margin: boundary_min,
        interior_violations: violations,
        worst_interior_margin: worst,
        allowance,
    })
}
