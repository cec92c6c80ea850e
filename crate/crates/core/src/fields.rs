//! Composition of 1-D profiles with geometric distance fields, and
//! finite-difference evaluation of the divergence-form residual
//! `Q(u) = λ^{−n} Σ_i ∂_i( λ^{n−2} · A(|∇u|_g)/|∇u|_g · ∂_i u )` in the
//! conformal ball metric (`λ = 2/(√c(1−|x|²))`, `|∇u|_g = λ^{−1}|Du|`).
//!
//! The residual stencil is the standard second-order conservative one:
//! fluxes at half-steps `x ± (h/2)e_i`, gradients at half-steps from
//! first differences in the flux direction and averaged central
//! differences transversally.

use crate::geometry::{
    busemann, dist_to_geodesic, hyp_distance, Geodesic, GeomError, Horosphere, Model, Point,
};
use crate::operators::OperatorSpec;
use crate::profiles::{Profile, ProfileError};
use crate::EPS_GRAD;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("evaluation point outside the field domain: {0}")]
    DomainExceeded(String),
    #[error("stencil of radius 2h leaves the field domain at {0:?}")]
    StencilOutOfDomain(Vec<f64>),
    #[error("gradient magnitude {0:.3e} below {eps:.0e} and A(s)/s has no finite limit at 0", eps = EPS_GRAD)]
    DegenerateGradient(f64),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("profile error: {0}")]
    Profile(String),
}

impl From<ProfileError> for FieldError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::DomainExceeded(d, lo, hi) => {
                FieldError::DomainExceeded(format!("profile argument {d} outside [{lo}, {hi}]"))
            }
            other => FieldError::Profile(other.to_string()),
        }
    }
}

/// The distance field a profile is composed with.
#[derive(Debug, Clone)]
pub enum DistanceKind {
    ToGeodesic(Geodesic),
    ToPoint(Point),
    Horospherical(Horosphere),
}

/// `u(x) = profile(distance(x))`.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub profile: Profile,
    pub distance: DistanceKind,
    pub model: Model,
}

impl ScalarField {
    pub fn new(profile: Profile, distance: DistanceKind, model: Model) -> Self {
        ScalarField { profile, distance, model }
    }

    pub fn distance_at(&self, x: &Point) -> Result<f64, FieldError> {
        let d = match &self.distance {
            DistanceKind::ToGeodesic(g) => dist_to_geodesic(x, g)?,
            DistanceKind::ToPoint(p) => hyp_distance(x, p)?,
            DistanceKind::Horospherical(h) => busemann(x, h)?,
        };
        Ok(d)
    }

    pub fn eval(&self, x: &Point) -> Result<f64, FieldError> {
        let d = self.distance_at(x)?;
        Ok(self.profile.eval(d)?)
    }
}

/// Second-order conservative FD evaluation of
/// `λ^{−n} Σ_i ∂_i(λ^{n−2} ψ(|∇u|_g) ∂_i u)` at `x`. `psi` receives the
/// metric gradient magnitude; a zero Euclidean gradient short-circuits to
/// zero flux (the `A(0) = 0` convention).
pub fn conformal_div_fd(
    u: &dyn Fn(&[f64]) -> Result<f64, FieldError>,
    psi: &dyn Fn(f64) -> Result<f64, FieldError>,
    model: Model,
    x: &[f64],
    h: f64,
) -> Result<f64, FieldError> {
    let n = model.dim;
    debug_assert_eq!(x.len(), n);
    let mut cache: HashMap<Vec<i8>, f64> = HashMap::new();
    let mut eval_at = |offsets: Vec<i8>| -> Result<f64, FieldError> {
        if let Some(v) = cache.get(&offsets) {
            return Ok(*v);
        }
        let coords: Vec<f64> =
            x.iter().zip(&offsets).map(|(c, o)| c + h * *o as f64).collect();
        if crate::geometry::norm_sq(&coords) >= 1.0 {
            return Err(FieldError::StencilOutOfDomain(coords));
        }
        let v = u(&coords).map_err(|e| match e {
            FieldError::DomainExceeded(_) => FieldError::StencilOutOfDomain(coords.clone()),
            other => other,
        })?;
        cache.insert(offsets, v);
        Ok(v)
    };

    let unit = |i: usize, s: i8| -> Vec<i8> {
        let mut o = vec![0i8; n];
        o[i] = s;
        o
    };
    let mut divergence = 0.0;
    for i in 0..n {
        let mut flux = [0.0f64; 2];
        for (side, sgn) in [(0usize, 1.0f64), (1usize, -1.0f64)] {
            // half-point y = x + sgn*(h/2) e_i
            let base = if sgn > 0.0 { vec![0i8; n] } else { unit(i, -1) };
            let tip = if sgn > 0.0 { unit(i, 1) } else { vec![0i8; n] };
            let u_base = eval_at(base.clone())?;
            let u_tip = eval_at(tip.clone())?;
            let du_i = (u_tip - u_base) / h;
            let mut grad = vec![0.0; n];
            grad[i] = du_i;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let mut cd = 0.0;
                for anchor in [&base, &tip] {
                    let mut plus = anchor.clone();
                    plus[j] += 1;
                    let mut minus = anchor.clone();
                    minus[j] -= 1;
                    cd += (eval_at(plus)? - eval_at(minus)?) / (2.0 * h);
                }
                grad[j] = cd / 2.0;
            }
            let mut y = x.to_vec();
            y[i] += sgn * h / 2.0;
            let lam = model.conformal_factor(&y);
            let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            flux[side] = if grad_norm == 0.0 {
                0.0
            } else {
                let s = grad_norm / lam;
                lam.powi(n as i32 - 2) * psi(s)? * grad[i]
            };
        }
        divergence += (flux[0] - flux[1]) / h;
    }
    let lam_x = model.conformal_factor(x);
    Ok(divergence / lam_x.powi(n as i32))
}

/// ψ from an operator spec with the degenerate-gradient rule: below
/// `EPS_GRAD` the ratio `A(s)/s` is replaced by its limit at zero when
/// that limit is finite, and is an error otherwise.
fn psi_of(spec: &OperatorSpec) -> impl Fn(f64) -> Result<f64, FieldError> + '_ {
    move |s: f64| {
        if s < EPS_GRAD {
            match spec.psi_zero_limit() {
                Some(l) => Ok(l),
                None => Err(FieldError::DegenerateGradient(s)),
            }
        } else {
            Ok(spec.a(s) / s)
        }
    }
}

/// FD residual of `Q(u)` for a composed field at one point.
pub fn divergence_residual(
    field: &ScalarField,
    spec: &OperatorSpec,
    x: &Point,
    h: f64,
) -> Result<f64, FieldError> {
    let model = field.model;
    let u = |coords: &[f64]| -> Result<f64, FieldError> {
        field.eval(&Point::new(coords.to_vec(), model).map_err(FieldError::Geometry)?)
    };
    let psi = psi_of(spec);
    conformal_div_fd(&u, &psi, model, x.coords(), h)
}

/// FD Laplace–Beltrami operator (`ψ ≡ 1`) of an arbitrary scalar function
/// in the conformal ball metric.
pub fn laplace_beltrami_fd(
    u: &dyn Fn(&[f64]) -> Result<f64, FieldError>,
    model: Model,
    x: &[f64],
    h: f64,
) -> Result<f64, FieldError> {
    conformal_div_fd(u, &|_s| Ok(1.0), model, x, h)
}

/// Metric gradient norm `|∇u|_g = λ^{−1}|Du|` by central differences.
pub fn gradient_norm_fd(
    u: &dyn Fn(&[f64]) -> Result<f64, FieldError>,
    model: Model,
    x: &[f64],
    h: f64,
) -> Result<f64, FieldError> {
    let n = model.dim;
    let mut g2 = 0.0;
    for i in 0..n {
        let mut plus = x.to_vec();
        plus[i] += h;
        let mut minus = x.to_vec();
        minus[i] -= h;
        let d = (u(&plus)? - u(&minus)?) / (2.0 * h);
        g2 += d * d;
    }
    Ok(g2.sqrt() / model.conformal_factor(x))
}

/// Sign check of the supersolution property `Q(u) ≤ 0` on a sample set.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub points: Vec<Vec<f64>>,
    /// Residuals at the finest refinement level.
    pub residuals: Vec<f64>,
    /// Finest stencil spacing.
    pub h: f64,
    pub max_abs: f64,
    /// Count of `residual > tol + allowance` over all three levels.
    pub sign_violations: usize,
    /// Fitted coefficient of the `C·h²` discretization allowance.
    pub c_estimate: f64,
    pub tol: f64,
}

/// Evaluates `Q(u)` at `samples` on three refinement levels `h, h/2, h/4`,
/// estimates the discretization constant `C` from the coarsest pair, and
/// counts sign violations `residual > tol + 1.5·C·h_level²` per level.
pub fn supersolution_check(
    field: &ScalarField,
    spec: &OperatorSpec,
    samples: &[Point],
    h: f64,
    tol: f64,
) -> Result<ResidualReport, FieldError> {
    let levels = [h, h / 2.0, h / 4.0];
    let mut residuals: Vec<Vec<f64>> = Vec::with_capacity(3);
    for &hl in &levels {
        let r: Result<Vec<f64>, FieldError> = samples
            .iter()
            .map(|p| divergence_residual(field, spec, p, hl))
            .collect();
        residuals.push(r?);
    }
    let c_estimate = residuals[0]
        .iter()
        .zip(&residuals[1])
        .map(|(r1, r2)| (r1 - r2).abs())
        .fold(0.0f64, f64::max)
        / (0.75 * h * h);
    let mut violations = 0usize;
    for (lvl, r) in residuals.iter().enumerate() {
        let allowance = tol + 1.5 * c_estimate * levels[lvl] * levels[lvl];
        violations += r.iter().filter(|&&v| v > allowance).count();
    }
    let finest = residuals.pop().unwrap();
    let max_abs = finest.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ResidualReport {
        points: samples.iter().map(|p| p.coords().to_vec()).collect(),
        residuals: finest,
        h: levels[2],
        max_abs,
        sign_violations: violations,
        c_estimate,
        tol,
    })
}

/// Table of `(Euclidean distance to the ideal boundary, field value)`
/// along an approach sequence tending to `ideal_target`; the caller
/// judges the limit behavior from the tail slope.
pub fn boundary_trace(
    field: &ScalarField,
    ideal_target: &crate::geometry::IdealPoint,
    approach: &[Point],
) -> Result<Vec<(f64, f64)>, FieldError> {
    if let Some(last) = approach.last() {
        let n = crate::geometry::norm_sq(last.coords()).sqrt();
        debug_assert!(
            n == 0.0
                || crate::geometry::dot(last.coords(), ideal_target.dir()) / n > 0.0
                || approach.len() < 2,
            "approach tail should head toward the declared ideal target"
        );
    }
    approach
        .iter()
        .map(|p| {
            let gap = 1.0 - crate::geometry::norm_sq(p.coords()).sqrt();
            Ok((gap, field.eval(p)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mobius_fix_ideal, IdealPoint};
    use crate::profiles::{scherk_profile, singular_profile, EndpointBehavior};
    use crate::sampling::sample_ball;

    const QT: f64 = 1e-10;

    fn m2() -> Model {
        Model::new(2, 1.0)
    }

    fn horosphere_field(p: f64, nodes: usize) -> ScalarField {
        let spec = OperatorSpec::p_laplacian(p).unwrap();
        let g0 = singular_profile(&spec, 2, (-12.0, 4.0), QT, nodes).unwrap();
        let h = Horosphere::new(IdealPoint::from_angle(0.0, 2), Point::origin(m2()));
        ScalarField::new(g0, DistanceKind::Horospherical(h), m2())
    }

    fn scherk_field_2d(delta: f64) -> ScalarField {
        let mg = OperatorSpec::minimal_graph();
        let g = scherk_profile(&mg, delta, 1.0, 2, QT, 1025).unwrap();
        let gamma = Geodesic::new(
            IdealPoint::from_angle(0.0, 2),
            IdealPoint::from_angle(std::f64::consts::PI, 2),
        )
        .unwrap();
        ScalarField::new(g, DistanceKind::ToGeodesic(gamma), m2())
    }

    fn constant_profile(v: f64) -> Profile {
        let grid: Vec<f64> = (0..8).map(|i| i as f64).collect();
        Profile::from_nodes(
            grid,
            vec![v; 8],
            vec![0.0; 8],
            (0.0, 7.0),
            EndpointBehavior::FiniteLimit(v),
            EndpointBehavior::FiniteLimit(v),
            QT,
        )
        .unwrap()
    }

    #[test]
    fn constant_profile_gives_constant_field_and_zero_residual() {
        let field = ScalarField::new(
            constant_profile(2.5),
            DistanceKind::ToPoint(Point::origin(m2())),
            m2(),
        );
        let x = Point::new(vec![0.2, 0.3], m2()).unwrap();
        assert_eq!(field.eval(&x).unwrap(), 2.5);
        let spec = OperatorSpec::minimal_graph();
        let r = divergence_residual(&field, &spec, &x, 0.01).unwrap();
        assert_eq!(r, 0.0, "exactly zero flux for a constant field");
        // also exact for operators whose ψ has no finite limit at 0
        let p15 = OperatorSpec::p_laplacian(1.5).unwrap();
        assert_eq!(divergence_residual(&field, &p15, &x, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn horospherical_field_hits_profile_values() {
        let field = horosphere_field(2.0, 2049);
        // on the horosphere through the origin the signed distance is 0
        let x = Point::origin(m2());
        assert!((field.eval(&x).unwrap() - 1.0).abs() < 1e-9, "g0(0) = 1");
    }

    #[test]
    fn scherk_field_value_at_unit_distance() {
        let field = scherk_field_2d(0.0);
        let y = (0.5f64).tanh();
        let x = Point::new(vec![0.0, y], m2()).unwrap();
        let v = field.eval(&x).unwrap();
        assert!((v - 0.7719368).abs() < 1e-6, "v = {v}");
    }

    #[test]
    fn exact_solution_residual_converges_at_second_order() {
        let field = horosphere_field(2.0, 4097);
        let pts = [
            Point::new(vec![0.15, 0.05], m2()).unwrap(),
            Point::new(vec![-0.2, 0.25], m2()).unwrap(),
            Point::new(vec![0.05, -0.35], m2()).unwrap(),
        ];
        let spec = OperatorSpec::p_laplacian(2.0).unwrap();
        let mut worst_order = f64::INFINITY;
        for p in &pts {
            let r1 = divergence_residual(&field, &spec, p, 1e-2).unwrap().abs();
            let r2 = divergence_residual(&field, &spec, p, 5e-3).unwrap().abs();
            if r2 > 1e-12 {
                worst_order = worst_order.min((r1 / r2).log2());
            }
        }
        assert!(worst_order >= 1.9, "observed order {worst_order}");
    }

    #[test]
    fn scherk_supersolution_has_no_sign_violations() {
        let field = scherk_field_2d(0.0);
        let gamma = match &field.distance {
            DistanceKind::ToGeodesic(g) => g.clone(),
            _ => unreachable!(),
        };
        let samples = sample_ball(m2(), 60, 0.8, 11, &|p| {
            let d = dist_to_geodesic(p, &gamma).unwrap();
            (0.3..2.5).contains(&d)
        });
        assert_eq!(samples.len(), 60);
        let spec = OperatorSpec::minimal_graph();
        let report = supersolution_check(&field, &spec, &samples, 0.02, 1e-6).unwrap();
        assert_eq!(report.sign_violations, 0, "max residual {}", report.max_abs);
    }

    #[test]
    fn negated_strict_supersolution_violates() {
        // in H^3 the half-space profile composed with distance to a
        // geodesic line is a strict supersolution (the line's distance
        // Laplacian exceeds the hypersurface coefficient the profile was
        // built for), so its negation must show positive residuals
        let m3 = Model::new(3, 1.0);
        let mg = OperatorSpec::minimal_graph();
        let g = scherk_profile(&mg, 0.0, 1.0, 3, QT, 1025).unwrap();
        let neg = {
            let grid = g.grid().to_vec();
            let values: Vec<f64> = g.values().iter().map(|v| -v).collect();
            let derivs: Vec<f64> = g.derivs().iter().map(|v| -v).collect();
            let hi = *g.values().last().unwrap();
            Profile::from_nodes(
                grid,
                values,
                derivs,
                (0.0, f64::INFINITY),
                EndpointBehavior::BlowUp,
                EndpointBehavior::FiniteLimit(-hi),
                QT,
            )
            .unwrap()
        };
        let gamma = Geodesic::new(
            IdealPoint::new(vec![1.0, 0.0, 0.0]).unwrap(),
            IdealPoint::new(vec![-1.0, 0.0, 0.0]).unwrap(),
        )
        .unwrap();
        let field = ScalarField::new(neg, DistanceKind::ToGeodesic(gamma.clone()), m3);
        let samples = sample_ball(m3, 40, 0.7, 3, &|p| {
            let d = dist_to_geodesic(p, &gamma).unwrap();
            (0.5..2.0).contains(&d)
        });
        let report = supersolution_check(&field, &mg, &samples, 0.02, 1e-6).unwrap();
        assert!(report.sign_violations > 0, "negated field must violate Q ≤ 0");
    }

    #[test]
    fn horospherical_equivariance_under_axis_translation() {
        let field = horosphere_field(2.0, 2049);
        let xi = IdealPoint::from_angle(0.0, 2);
        let t = mobius_fix_ideal(&xi, 0.6, m2());
        for coords in [[0.1, 0.2], [-0.3, 0.1], [0.0, -0.4]] {
            let x = Point::new(coords.to_vec(), m2()).unwrap();
            let lhs = field.eval(&t.apply(&x)).unwrap();
            let d = field.distance_at(&x).unwrap();
            let rhs = field.profile.eval(d + 0.6).unwrap();
            assert!((lhs - rhs).abs() < 1e-8, "lhs {lhs} rhs {rhs}");
        }
    }

    #[test]
    fn boundary_trace_limits() {
        let field = horosphere_field(2.0, 2049);
        // radial approach to an ideal point away from the singular one:
        // values decay to zero
        let away: Vec<Point> = (1..10)
            .map(|k| {
                let r = 1.0 - 0.5f64.powi(k);
                Point::new(vec![-r * 0.6, r * 0.8], m2()).unwrap()
            })
            .collect();
        let away_target = IdealPoint::new(vec![-0.6, 0.8]).unwrap();
        let trace = boundary_trace(&field, &away_target, &away).unwrap();
        for w in trace.windows(2) {
            assert!(w[1].1 < w[0].1, "values must decrease toward the far boundary");
        }
        assert!(trace.last().unwrap().1 < 1e-2);

        // approach along the axis toward the singular point: values grow
        let toward: Vec<Point> = (1..8)
            .map(|k| {
                let s = 0.5 * k as f64;
                Point::new(vec![(s / 2.0).tanh(), 0.0], m2()).unwrap()
            })
            .collect();
        let trace = boundary_trace(&field, &IdealPoint::from_angle(0.0, 2), &toward).unwrap();
        for w in trace.windows(2) {
            assert!(w[1].1 > w[0].1, "values must grow toward the singular point");
        }
        assert!(trace.last().unwrap().1 > 10.0);

        // half-space field: values settle at the plateau δ (the approach is
        // only O(1 − |x|), so the assertion is on the trend plus a coarse gap)
        let delta = 0.3;
        let sfield = scherk_field_2d(delta);
        let inner: Vec<Point> = (1..18)
            .map(|k| {
                let r = 1.0 - 0.5f64.powi(k);
                Point::new(vec![0.0, r], m2()).unwrap()
            })
            .collect();
        let trace =
            boundary_trace(&sfield, &IdealPoint::from_angle(std::f64::consts::FRAC_PI_2, 2), &inner)
                .unwrap();
        for w in trace.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12, "values must decrease toward δ");
        }
        let last = trace.last().unwrap().1;
        assert!(last >= delta && (last - delta).abs() < 1e-4, "plateau value {last}");
    }

    #[test]
    fn stencil_domain_violation_is_reported() {
        let field = scherk_field_2d(0.0);
        let spec = OperatorSpec::minimal_graph();
        // point almost on the geodesic: the stencil crosses the blow-up end
        let x = Point::new(vec![0.3, 1e-7], m2()).unwrap();
        let res = divergence_residual(&field, &spec, &x, 1e-2);
        assert!(matches!(res, Err(FieldError::StencilOutOfDomain(_))));
    }

    #[test]
    fn degenerate_gradient_without_finite_psi_limit_errors() {
        // a nearly flat (but strictly increasing) profile puts the probe in
        // 0 < |∇u| < EPS_GRAD, where A(s)/s has no finite limit for p < 2
        let grid: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let values: Vec<f64> = (0..8).map(|i| 1.0 + i as f64 * 1e-12).collect();
        let derivs = vec![1e-12; 8];
        let flat = Profile::from_nodes(
            grid,
            values,
            derivs,
            (0.0, 7.0),
            EndpointBehavior::FiniteLimit(1.0),
            EndpointBehavior::FiniteLimit(1.0 + 7e-12),
            QT,
        )
        .unwrap();
        let field = ScalarField::new(flat, DistanceKind::ToPoint(Point::origin(m2())), m2());
        let p15 = OperatorSpec::p_laplacian(1.5).unwrap();
        let x = Point::new(vec![0.3, 0.2], m2()).unwrap();
        assert!(matches!(
            divergence_residual(&field, &p15, &x, 0.01),
            Err(FieldError::DegenerateGradient(_))
        ));
        // operators with a finite limit sail through
        let mg = OperatorSpec::minimal_graph();
        let r = divergence_residual(&field, &mg, &x, 0.01).unwrap();
        assert!(r.abs() < 1e-6);
    }

    #[test]
    fn busemann_gradient_has_unit_norm() {
        let h = Horosphere::new(IdealPoint::from_angle(0.3, 2), Point::origin(m2()));
        let u = |coords: &[f64]| -> Result<f64, FieldError> {
            Ok(busemann(&Point::new(coords.to_vec(), m2()).unwrap(), &h)?)
        };
        for coords in [[0.2, 0.1], [-0.4, 0.3], [0.0, 0.0]] {
            let g = gradient_norm_fd(&u, m2(), &coords, 1e-5).unwrap();
            assert!((g - 1.0).abs() < 1e-8, "|∇d| = {g}");
        }
    }
}
