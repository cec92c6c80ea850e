//! Removability probe: a truncation-radius sweep that plays asymptotic
//! Dirichlet data with an isolated feature at one ideal point against the
//! solver, and watches the solution on a fixed compact annulus.
//!
//! For each `R` in the sequence the boundary data is either a plateau on
//! the shrinking arc `|θ − θ(p1)| ≤ w(R) = e^{−R}` (zero elsewhere) — a
//! plateau of constant hyperbolic arc length escaping to `p1`, the finite
//! surrogate for data vanishing on the ideal boundary except at `p1` — or
//! the trace of a composed field (used to track an exact singular
//! solution). The reported quantity is the sup of the solution over the
//! annulus: stabilizing sups are the removable-type signature, sups
//! pinned to an unbounded profile's values the singular-type one.

use super::disk::{solve_disk, DiskGrid, RGrading, ThetaGrading};
use super::SolverError;
use crate::fields::ScalarField;
use crate::geometry::{IdealPoint, Model};
use crate::operators::OperatorSpec;

/// Boundary data source for the probe.
pub enum ProbeData<'a> {
    /// `plateau` on the arc within angular half-width `w(R) = e^{−R}` of
    /// the singular direction, zero elsewhere (`2·w·sinh R → 1`: the arc
    /// keeps unit hyperbolic length while receding to the ideal point).
    Plateau(f64),
    /// Trace of a composed field on the truncation circle.
    Trace(&'a ScalarField),
}

#[derive(Debug, Clone)]
pub struct ProbeGridParams {
    /// Radial cells per unit hyperbolic radius.
    pub nr_per_unit: f64,
    pub ntheta: usize,
    /// Möbius angular clustering scale toward the singular direction at
    /// the reference radius 4; rescaled by `e^{4−R}` per truncation radius
    /// to track the boundary feature width (0 = uniform).
    pub theta_eps_at_4: f64,
    /// Radial boundary-clustering strength (0 = uniform).
    pub r_cluster: f64,
    pub tol: f64,
    /// The fixed compact annulus `[r_a, r_b]` the sups are read on.
    pub annulus: (f64, f64),
}

impl Default for ProbeGridParams {
    fn default() -> Self {
        ProbeGridParams {
            nr_per_unit: 16.0,
            ntheta: 128,
            theta_eps_at_4: 0.06,
            r_cluster: 3.0,
            tol: 1e-8,
            annulus: (1.0, 2.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProbeEntry {
    pub r_trunc: f64,
    pub spike_half_width: f64,
    pub sup_annulus: f64,
    /// For trace data: the field's own max over the same annulus nodes
    /// (the like-for-like tracking reference).
    pub trace_annulus_max: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub residual_norm: f64,
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub entries: Vec<ProbeEntry>,
}

impl ProbeReport {
    /// Successive |sup_{k+1} − sup_k| differences.
    pub fn increments(&self) -> Vec<f64> {
        self.entries
            .windows(2)
            .map(|w| (w[1].sup_annulus - w[0].sup_annulus).abs())
            .collect()
    }
}

/// Runs the truncation sweep. Entries are ordered by `R`; non-converged
/// solves are kept and flagged rather than failing the sweep.
pub fn removability_probe(
    spec: &OperatorSpec,
    p1: &IdealPoint,
    data: ProbeData<'_>,
    r_sequence: &[f64],
    params: &ProbeGridParams,
) -> Result<ProbeReport, SolverError> {
    if r_sequence.is_empty() || r_sequence.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolverError::InvalidParams("R sequence must be increasing".into()));
    }
    let model = Model::new(2, 1.0);
    let theta0 = p1.dir()[1].atan2(p1.dir()[0]);
    let mut entries = Vec::with_capacity(r_sequence.len());
    for &r_trunc in r_sequence {
        if !(r_trunc > params.annulus.1) {
            return Err(SolverError::InvalidParams(format!(
                "truncation radius {r_trunc} must exceed the annulus outer radius"
            )));
        }
        let nr = ((params.nr_per_unit * r_trunc).ceil() as usize).max(8);
        let mut grid = DiskGrid::new(model, r_trunc, nr, params.ntheta)?.with_puncture(p1.clone());
        if params.theta_eps_at_4 > 0.0 {
            // cluster on the boundary feature; both the spike arc and a
            // horospherical trace narrow like e^{−R}
            let eps = match &data {
                ProbeData::Plateau(_) => (4.0 * (-r_trunc).exp()).clamp(1e-3, 1.0),
                ProbeData::Trace(_) => {
                    (params.theta_eps_at_4 * (4.0 - r_trunc).exp()).clamp(1e-4, 1.0)
                }
            };
            grid = grid.with_theta_grading(ThetaGrading::Mobius { theta0, eps });
        }
        if params.r_cluster > 0.0 {
            grid = grid.with_r_grading(RGrading::ClusterBoundary { strength: params.r_cluster });
        }
        let w = (-r_trunc).exp();
        let sol = match &data {
            ProbeData::Plateau(plateau) => {
                let p = *plateau;
                let bdata = move |t: f64| {
                    let mut dt = (t - theta0).rem_euclid(std::f64::consts::TAU);
                    if dt > std::f64::consts::PI {
                        dt -= std::f64::consts::TAU;
                    }
                    if dt.abs() <= w {
                        p
                    } else {
                        0.0
                    }
                };
                solve_disk(spec, &grid, &bdata, params.tol)?
            }
            ProbeData::Trace(field) => {
                let rho = (model.sqrt_c() * r_trunc / 2.0).tanh();
                let f = *field;
                let model_c = model;
                let bdata = move |t: f64| {
                    let pt = crate::geometry::Point::new(
                        vec![rho * t.cos(), rho * t.sin()],
                        model_c,
                    )
                    .expect("trace point inside ball");
                    f.eval(&pt).expect("field trace defined on the truncation circle")
                };
                solve_disk(spec, &grid, &bdata, params.tol)?
            }
        };
        let trace_annulus_max = match &data {
            ProbeData::Trace(field) => {
                let rs = grid.r_nodes();
                let mut m = f64::NEG_INFINITY;
                for i in 1..grid.nr {
                    if rs[i] < params.annulus.0 || rs[i] > params.annulus.1 {
                        continue;
                    }
                    for j in 0..grid.ntheta {
                        m = m.max(field.eval(&grid.point(i, j))?);
                    }
                }
                Some(m)
            }
            ProbeData::Plateau(_) => None,
        };
        entries.push(ProbeEntry {
            r_trunc,
            spike_half_width: w,
            sup_annulus: sol.sup_on_annulus(params.annulus.0, params.annulus.1),
            trace_annulus_max,
            converged: sol.converged,
            iterations: sol.iterations,
            residual_norm: sol.residual_norm,
        });
    }
    Ok(ProbeReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_plateau_gives_identically_zero_solutions() {
        let spec = OperatorSpec::minimal_graph();
        let p1 = IdealPoint::from_angle(0.0, 2);
        let params = ProbeGridParams {
            nr_per_unit: 6.0,
            ntheta: 32,
            theta_eps_at_4: 0.5,
            r_cluster: 1.0,
            tol: 1e-10,
            annulus: (0.5, 1.5),
        };
        let report =
            removability_probe(&spec, &p1, ProbeData::Plateau(0.0), &[2.0, 3.0], &params).unwrap();
        for e in &report.entries {
            assert!(e.converged);
            assert!(e.sup_annulus.abs() < 1e-12, "sup {}", e.sup_annulus);
        }
    }

    #[test]
    fn rejects_non_increasing_r_sequence() {
        let spec = OperatorSpec::minimal_graph();
        let p1 = IdealPoint::from_angle(0.0, 2);
        let params = ProbeGridParams::default();
        assert!(matches!(
            removability_probe(&spec, &p1, ProbeData::Plateau(1.0), &[3.0, 3.0], &params),
            Err(SolverError::InvalidParams(_))
        ));
    }
}
