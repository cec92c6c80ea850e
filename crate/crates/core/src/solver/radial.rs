//! Radial two-point boundary value solver for
//! `A′(u′)u″ + A(u′)·(n−1)√c·coth(√c·r) = 0` on `[r0, r1]`.
//!
//! The equation has the exact first integral
//! `A(u′)·sinh^{n−1}(√c·r) = const`, so the solve reduces to a scalar
//! root-find on the flux constant: `Φ(k) = ∫ A⁻¹(k/J(r)) dr` must match
//! the boundary increment. Solutions are reproduced to quadrature
//! accuracy, which is what makes this path usable as an oracle for the
//! 2-D solver.

use super::{SolverError, SolverResult};
use crate::operators::OperatorSpec;
use crate::quad::{self, SingularEnd};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialGrading {
    Uniform,
    /// Geometric clustering toward `r0`.
    LogTowardLo,
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub r0: f64,
    pub r1: f64,
    pub n: usize,
    pub grading: RadialGrading,
}

impl RadialGrid {
    pub fn uniform(r0: f64, r1: f64, n: usize) -> Result<Self, SolverError> {
        if !(r0 >= 0.0 && r1 > r0) {
            return Err(SolverError::InvalidParams(format!("bad radial interval [{r0}, {r1}]")));
        }
        if n < 16 {
            return Err(SolverError::InvalidParams(format!("need at least 16 nodes, got {n}")));
        }
        Ok(RadialGrid { r0, r1, n, grading: RadialGrading::Uniform })
    }

    pub fn nodes(&self) -> Vec<f64> {
        let m = (self.n - 1) as f64;
        match self.grading {
            RadialGrading::Uniform => (0..self.n)
                .map(|i| self.r0 + (self.r1 - self.r0) * i as f64 / m)
                .collect(),
            RadialGrading::LogTowardLo => {
                // cluster geometrically toward r0 with a fixed 1e-3 scale
                let s = 1e-3f64;
                (0..self.n)
                    .map(|i| {
                        let t = i as f64 / m;
                        let w = (s.ln() * (1.0 - t)).exp();
                        self.r0 + (self.r1 - self.r0) * (w - s) / (1.0 - s)
                    })
                    .collect()
            }
        }
    }
}

fn metric_area(sc: f64, nm1: f64, r: f64) -> f64 {
    (sc * r).sinh().powf(nm1)
}

/// Dirichlet solve on the radial grid. Equal boundary values return the
/// constant solution immediately (constants solve the equation).
pub fn solve_radial_bvp(
    spec: &OperatorSpec,
    n: usize,
    c: f64,
    grid: &RadialGrid,
    u_lo: f64,
    u_hi: f64,
    tol: f64,
) -> Result<SolverResult, SolverError> {
    if n < 2 {
        return Err(SolverError::InvalidParams("dimension must be at least 2".into()));
    }
    if !(c > 0.0) {
        return Err(SolverError::InvalidParams("curvature must be positive".into()));
    }
    if !u_lo.is_finite() || !u_hi.is_finite() {
        return Err(SolverError::InvalidParams("boundary values must be finite".into()));
    }
    if grid.r0 <= 0.0 {
        return Err(SolverError::InvalidParams(
            "radial solve needs r0 > 0 (the flux J(r0) must be positive)".into(),
        ));
    }
    let nodes = grid.nodes();
    let delta_u = u_hi - u_lo;
    if delta_u == 0.0 {
        return Ok(SolverResult {
            values: vec![u_lo; nodes.len()],
            residual_norm: 0.0,
            iterations: 0,
            converged: true,
            damping_history: Vec::new(),
        });
    }

    let sc = c.sqrt();
    let nm1 = (n - 1) as f64;
    let sign = delta_u.signum();
    let target = delta_u.abs();
    let j_lo = metric_area(sc, nm1, grid.r0);
    let itol = (tol * 1e-4).max(4.0 * f64::EPSILON);
    let qtol = (tol * 1e-2).max(1e-14);

    // Φ(k) = ∫ A⁻¹(k / J(r)) dr; the integrand is singular at r0 when the
    // flux approaches a finite sup A there
    let phi = |k: f64| -> Result<f64, SolverError> {
        if k == 0.0 {
            return Ok(0.0);
        }
        let warm = std::cell::Cell::new(0.0f64);
        let f = |r: f64| -> f64 {
            let arg = (k / metric_area(sc, nm1, r)).min(spec.invert_cap());
            let g = warm.get();
            let s = spec
                .invert_a_from(arg, itol, (g > 0.0).then_some(g))
                .unwrap_or(f64::NAN);
            if s.is_finite() {
                warm.set(s);
            }
            s
        };
        let near_cap = spec.k0().is_finite() && k / j_lo > 0.9 * spec.k0();
        let v = if near_cap {
            quad::integrate_singular(&f, grid.r0, grid.r1, SingularEnd::Lower, qtol)
                .map_err(|e| SolverError::NoConvergence(format!("flux quadrature: {e}")))?
                .0
        } else {
            quad::adaptive(&f, grid.r0, grid.r1, qtol).0
        };
        if !v.is_finite() {
            return Err(SolverError::NoConvergence("flux quadrature returned NaN".into()));
        }
        Ok(v)
    };

    // bracket the flux constant
    let k_cap = if spec.k0().is_finite() { spec.invert_cap() * j_lo } else { f64::INFINITY };
    let mut klo = 0.0f64;
    let mut khi = (spec.a(target / (grid.r1 - grid.r0)) * j_lo).max(1e-300);
    let mut iterations = 0usize;
    loop {
        khi = khi.min(k_cap);
        let v = phi(khi)?;
        iterations += 1;
        if v >= target {
            break;
        }
        if khi >= k_cap {
            return Err(SolverError::NoConvergence(format!(
                "boundary increment {target:.6} exceeds the reachable sup {v:.6} \
                 (bounded-flux operator on this annulus)"
            )));
        }
        klo = khi;
        khi *= 4.0;
        if iterations > 300 {
            return Err(SolverError::NoConvergence("flux bracketing stalled".into()));
        }
    }

    // safeguarded Newton on Φ(k) = target; dΦ/dk by quadrature
    let dphi = |k: f64| -> Result<f64, SolverError> {
        let warm = std::cell::Cell::new(0.0f64);
        let f = |r: f64| -> f64 {
            let j = metric_area(sc, nm1, r);
            let arg = (k / j).min(spec.invert_cap());
            let g = warm.get();
            let s = spec
                .invert_a_from(arg, itol, (g > 0.0).then_some(g))
                .unwrap_or(f64::NAN);
            if s.is_finite() {
                warm.set(s);
            }
            1.0 / (spec.a_prime(s) * j)
        };
        let near_cap = spec.k0().is_finite() && k / j_lo > 0.9 * spec.k0();
        let v = if near_cap {
            quad::integrate_singular(&f, grid.r0, grid.r1, SingularEnd::Lower, qtol)
                .map_err(|e| SolverError::NoConvergence(format!("flux quadrature: {e}")))?
                .0
        } else {
            quad::adaptive(&f, grid.r0, grid.r1, qtol).0
        };
        Ok(v)
    };
    let mut k = 0.5 * (klo + khi);
    let mut damping_history = Vec::new();
    let mut residual = f64::INFINITY;
    for _ in 0..100 {
        let v = phi(k)?;
        iterations += 1;
        residual = (v - target).abs();
        if residual <= tol {
            break;
        }
        if v > target {
            khi = k;
        } else {
            klo = k;
        }
        let d = dphi(k)?;
        let newton = if d > 0.0 && d.is_finite() { k - (v - target) / d } else { f64::NAN };
        let (next, step) = if newton.is_finite() && newton > klo && newton < khi {
            (newton, 1.0)
        } else {
            (0.5 * (klo + khi), 0.5)
        };
        damping_history.push(step);
        k = next;
        if (khi - klo) <= f64::EPSILON * khi {
            residual = (phi(k)? - target).abs();
            break;
        }
    }
    let converged = residual <= tol;
    if !converged && residual > 1e3 * tol {
        return Err(SolverError::NoConvergence(format!(
            "flux root-find residual {residual:.3e} after iteration cap"
        )));
    }

    // fill node values by cumulative quadrature of the recovered flux
    let warm = std::cell::Cell::new(0.0f64);
    let f = |r: f64| -> f64 {
        let arg = (k / metric_area(sc, nm1, r)).min(spec.invert_cap());
        let g = warm.get();
        let s = spec
            .invert_a_from(arg, itol, (g > 0.0).then_some(g))
            .unwrap_or(f64::NAN);
        if s.is_finite() {
            warm.set(s);
        }
        s
    };
    let mut values = vec![0.0; nodes.len()];
    values[0] = u_lo;
    for i in 1..nodes.len() {
        let (a, b) = (nodes[i - 1], nodes[i]);
        let seg_tol = (qtol * (b - a) / (grid.r1 - grid.r0)).max(1e-16);
        let near_cap = spec.k0().is_finite() && k / metric_area(sc, nm1, a) > 0.9 * spec.k0();
        let v = if near_cap && i == 1 {
            quad::integrate_singular(&f, a, b, SingularEnd::Lower, seg_tol)
                .map_err(|e| SolverError::NoConvergence(format!("fill quadrature: {e}")))?
                .0
        } else {
            quad::adaptive(&f, a, b, seg_tol).0
        };
        values[i] = values[i - 1] + sign * v;
    }
    Ok(SolverResult { values, residual_norm: residual, iterations, converged, damping_history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::OperatorSpec;

    #[test]
    fn equal_boundary_data_is_constant_in_zero_iterations() {
        let p2 = OperatorSpec::p_laplacian(2.0).unwrap();
        let grid = RadialGrid::uniform(1.0, 3.0, 33).unwrap();
        let sol = solve_radial_bvp(&p2, 2, 1.0, &grid, 3.0, 3.0, 1e-10).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.iterations, 0);
        assert!(sol.values.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn p2_solution_matches_closed_form_radial_harmonic() {
        // u(r) = sinh(1)·(ln tanh(r/2) − ln tanh(1/2)) solves the n = 2
        // equation with flux constant sinh(1)
        let p2 = OperatorSpec::p_laplacian(2.0).unwrap();
        let closed = |r: f64| 1.0f64.sinh() * ((r / 2.0).tanh().ln() - 0.5f64.tanh().ln());
        let grid = RadialGrid::uniform(1.0, 3.0, 512).unwrap();
        let sol = solve_radial_bvp(&p2, 2, 1.0, &grid, 0.0, closed(3.0), 1e-10).unwrap();
        assert!(sol.converged);
        let nodes = grid.nodes();
        let mut worst = 0.0f64;
        for (v, r) in sol.values.iter().zip(&nodes) {
            worst = worst.max((v - closed(*r)).abs());
        }
        assert!(worst < 1e-6, "sup error {worst}");
        // monotone in r
        assert!(sol.values.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn minimal_graph_matches_independent_first_integral_quadrature() {
        // oracle: Simpson integration of the analytic inverse
        // A⁻¹(t) = t/√(1−t²) at a known flux constant
        let mg = OperatorSpec::minimal_graph();
        let kbar = (1.0 / 2.0f64.sqrt()) * 1.0f64.sinh(); // u′(1) = 1
        let inv = |t: f64| t / (1.0 - t * t).sqrt();
        let integrand = |r: f64| inv(kbar / r.sinh());
        let simpson = |a: f64, b: f64, m: usize| -> f64 {
            let h = (b - a) / m as f64;
            let mut acc = integrand(a) + integrand(b);
            for i in 1..m {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * integrand(a + i as f64 * h);
            }
            acc * h / 3.0
        };
        let u_hi = simpson(1.0, 3.0, 4096);
        let grid = RadialGrid::uniform(1.0, 3.0, 512).unwrap();
        let sol = solve_radial_bvp(&mg, 2, 1.0, &grid, 0.0, u_hi, 1e-10).unwrap();
        assert!(sol.converged);
        let nodes = grid.nodes();
        let mut worst = 0.0f64;
        for (v, r) in sol.values.iter().zip(&nodes) {
            let oracle = simpson(1.0, *r, 2048.max((512.0 * (r - 1.0)) as usize / 2 * 2 + 2));
            worst = worst.max((v - oracle).abs());
        }
        assert!(worst < 1e-5, "sup error {worst}");
    }

    #[test]
    fn infeasible_minimal_graph_data_is_reported() {
        // the bounded flux caps the reachable boundary increment
        let mg = OperatorSpec::minimal_graph();
        let grid = RadialGrid::uniform(1.0, 2.0, 64).unwrap();
        let res = solve_radial_bvp(&mg, 2, 1.0, &grid, 0.0, 1e3, 1e-8);
        assert!(matches!(res, Err(SolverError::NoConvergence(_))));
    }

    #[test]
    fn decreasing_data_mirrors_increasing_solution() {
        let p3 = OperatorSpec::p_laplacian(3.0).unwrap();
        let grid = RadialGrid::uniform(0.5, 2.5, 65).unwrap();
        let up = solve_radial_bvp(&p3, 3, 1.0, &grid, 0.0, 1.0, 1e-9).unwrap();
        let down = solve_radial_bvp(&p3, 3, 1.0, &grid, 1.0, 0.0, 1e-9).unwrap();
        for (u, d) in up.values.iter().zip(&down.values) {
            assert!((u + d - 1.0).abs() < 1e-8, "u {u}, d {d}");
        }
    }
}
