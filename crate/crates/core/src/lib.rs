//! Numerical laboratory for quasi-linear elliptic operators
//! `Q(u) = div( A(|∇u|)/|∇u| · ∇u )` on hyperbolic space.
//!
//! The crate is organized around five pieces of machinery:
//!
//! - [`operators`]: the operator family (the flux-magnitude function `A`
//!   with its structural constants), numerical inversion of `A`, and the
//!   classification of operators into removable-type vs singular-type by
//!   a divergence test on the improper integral
//!   `∫_0^{K0} A⁻¹(t)/√(K0−t) dt`, `K0 = sup A`.
//! - [`geometry`]: exact constant-curvature hyperbolic geometry in the
//!   Poincaré ball model of `H^n(−c)`: distances, geodesics, Busemann
//!   functions of horospheres, and Möbius isometries fixing an ideal point.
//! - [`profiles`]: the three explicit 1-D barrier profiles (half-space,
//!   annulus, horospherical) built by adaptive quadrature of improper
//!   integrals of `A⁻¹`, with certified truncation of the improper limits.
//! - [`fields`]: composition of a 1-D profile with a geometric distance
//!   field, plus finite-difference evaluation of the divergence-form
//!   residual in the conformal ball metric.
//! - [`solver`]: a radial two-point solver built on the conserved flux
//!   `A(u′)·sinh^{n−1}(√c·r)`, a damped-Newton solver for asymptotic
//!   Dirichlet data on truncated disks, and the removability probe that
//!   exhibits the removable vs non-removable dichotomy at finite radius.
//!
//! Everything is deterministic: quadrature, grids and quasi-random sample
//! sets are seeded and reproducible run to run.

pub mod fields;
pub mod geometry;
pub mod operators;
pub mod profiles;
pub mod quad;
pub mod sampling;
pub mod solver;
pub mod stencil;

pub use fields::{DistanceKind, FieldError, ResidualReport, ScalarField};
pub use geometry::{
    Geodesic, GeomError, Horosphere, IdealPoint, Isometry, LaplacianMode, Model, Point,
};
pub use operators::{
    ClassificationResult, OperatorClass, OperatorError, OperatorKind, OperatorSpec,
    ValidationReport,
};
pub use profiles::{AnnulusBarrierSpec, Direction, EndpointBehavior, Profile, ProfileError};
pub use quad::{QuadError, QuadOutcome, SingularEnd};
pub use solver::{
    comparison_check, removability_probe, solve_disk, solve_radial_bvp, ComparisonReport,
    DiskGrid, DiskSolution, ProbeData, ProbeGridParams, ProbeReport, RadialGrid, SolverError,
    SolverResult,
};

/// Default tolerance for profile and classification quadratures.
pub const QUAD_TOL_DEFAULT: f64 = 1e-10;
/// Default nonlinear-solver residual tolerance.
pub const SOLVER_TOL_DEFAULT: f64 = 1e-8;
/// Default node count for barrier profiles.
pub const PROFILE_NODES_DEFAULT: usize = 257;
/// Gradient threshold below which the degenerate-gradient rule applies.
pub const EPS_GRAD: f64 = 1e-8;
