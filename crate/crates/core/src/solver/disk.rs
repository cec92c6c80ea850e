//! Damped-Newton finite-difference solver for
//! `div( A(|∇u|)/|∇u| ∇u ) = 0` on a truncated disk in `H²(−c)`,
//! discretized in geodesic polar coordinates `(r, θ)` with the metric
//! `dr² + S(r)²dθ²`, `S(r) = sinh(√c·r)/√c`:
//!
//! `Q(u) = (1/S)·∂_r(S·ψ·u_r) + (1/S²)·∂_θ(ψ·u_θ)`, `ψ = A(s)/s`
//!
//! evaluated at the regularized gradient `s_ε = √(u_r² + (u_θ/S)² + ε²)`.
//! Fluxes live at half-points (conservative second-order stencil on the
//! smoothly graded tensor grid), the polar center is a single unknown
//! closed by the flux balance over its half-cell, and Dirichlet data sits
//! on the truncation circle.
//!
//! The Newton system is banded (bandwidth `ntheta + 1`) and solved
//! directly; steps are Armijo-damped, with a frozen-coefficient Picard
//! step as the fallback when a Newton step cannot reduce the residual.

use super::band::BandMatrix;
use super::{SolverError, SolverResult};
use crate::geometry::{IdealPoint, Model, Point};
use crate::operators::OperatorSpec;

/// Radial node placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RGrading {
    Uniform,
    /// `r(η) = R·(1 − sinh(σ(1−η))/sinh σ)`: spacing shrinks by roughly
    /// `σ/sinh σ` toward the truncation circle.
    ClusterBoundary { strength: f64 },
    /// Spacing `∝ e^{−rate·(R−r)}`: equidistributes features that grow
    /// exponentially toward the truncation circle (horospherical fields
    /// grow like `e^{rate·r}` along their axis).
    ExponentialBoundary { rate: f64 },
}

/// Angular node placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaGrading {
    Uniform,
    /// `θ(t) = θ0 + t − κ·sin t`, `t ∈ [−π, π)`: spacing shrinks by
    /// `1 − κ` at the direction `θ0` (which is always a grid node).
    ClusterAt { theta0: f64, strength: f64 },
    /// Conformal map `θ = θ0 + 2·atan(ε·tan(t/2))`: spacing `ε` at `θ0`,
    /// `1/ε` opposite; equidistributes Lorentzian peaks of width `~ε`.
    Mobius { theta0: f64, eps: f64 },
}

/// Tensor grid on the truncated disk (geodesic polar coordinates).
#[derive(Debug, Clone)]
pub struct DiskGrid {
    pub model: Model,
    /// Hyperbolic truncation radius.
    pub r_trunc: f64,
    /// Radial cells: nodes `i = 0..=nr` with `r_0 = 0`, `r_nr = r_trunc`.
    pub nr: usize,
    /// Angular nodes (even count), periodic.
    pub ntheta: usize,
    /// Marks the singular direction an experiment focuses on.
    pub puncture: Option<IdealPoint>,
    pub r_grading: RGrading,
    pub theta_grading: ThetaGrading,
}

impl DiskGrid {
    pub fn new(model: Model, r_trunc: f64, nr: usize, ntheta: usize) -> Result<Self, SolverError> {
        if model.dim != 2 {
            return Err(SolverError::InvalidParams("disk solver works in dimension 2".into()));
        }
        if !(r_trunc > 0.0) || !r_trunc.is_finite() {
            return Err(SolverError::InvalidParams(
                "truncation radius must be finite and positive".into(),
            ));
        }
        if nr < 4 || ntheta < 8 || ntheta % 2 != 0 {
            return Err(SolverError::InvalidParams(format!(
                "grid too small or odd ntheta: nr = {nr}, ntheta = {ntheta}"
            )));
        }
        Ok(DiskGrid {
            model,
            r_trunc,
            nr,
            ntheta,
            puncture: None,
            r_grading: RGrading::Uniform,
            theta_grading: ThetaGrading::Uniform,
        })
    }

    pub fn with_r_grading(mut self, g: RGrading) -> Self {
        self.r_grading = g;
        self
    }

    pub fn with_theta_grading(mut self, g: ThetaGrading) -> Self {
        self.theta_grading = g;
        self
    }

    pub fn with_puncture(mut self, p: IdealPoint) -> Self {
        self.puncture = Some(p);
        self
    }

    pub fn r_nodes(&self) -> Vec<f64> {
        let m = self.nr as f64;
        (0..=self.nr)
            .map(|i| {
                let eta = i as f64 / m;
                match self.r_grading {
                    RGrading::Uniform => self.r_trunc * eta,
                    RGrading::ClusterBoundary { strength } => {
                        self.r_trunc * (1.0 - (strength * (1.0 - eta)).sinh() / strength.sinh())
                    }
                    RGrading::ExponentialBoundary { rate } => {
                        -(1.0 - eta * (1.0 - (-rate * self.r_trunc).exp())).ln() / rate
                    }
                }
            })
            .collect()
    }

    pub fn theta_nodes(&self) -> Vec<f64> {
        let m = self.ntheta as f64;
        (0..self.ntheta)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / m - std::f64::consts::PI;
                match self.theta_grading {
                    ThetaGrading::Uniform => t + std::f64::consts::PI,
                    ThetaGrading::ClusterAt { theta0, strength } => theta0 + t - strength * t.sin(),
                    ThetaGrading::Mobius { theta0, eps } => {
                        // branch-safe: t = ±π maps to ±π exactly
                        if t.abs() >= std::f64::consts::PI {
                            theta0 + t
                        } else {
                            theta0 + 2.0 * (eps * (t / 2.0).tan()).atan()
                        }
                    }
                }
            })
            .collect()
    }

    /// Ball-model point of the grid node `(i, j)`; `i = nr` is the
    /// truncation circle.
    pub fn point(&self, i: usize, j: usize) -> Point {
        let r = self.r_nodes()[i];
        let th = self.theta_nodes()[j];
        let rho = (self.model.sqrt_c() * r / 2.0).tanh();
        Point::new(vec![rho * th.cos(), rho * th.sin()], self.model)
            .expect("grid point inside ball")
    }
}

/// Solution on a disk grid.
#[derive(Debug, Clone)]
pub struct DiskSolution {
    pub grid: DiskGrid,
    pub center: f64,
    /// Interior rings `i = 1..nr`, row-major over `j`.
    pub interior: Vec<f64>,
    pub boundary: Vec<f64>,
    /// Sup of |Q(u)| over interior nodes, relative to `1 + max|data|`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub damping_history: Vec<f64>,
    /// Gradient regularization actually used.
    pub epsilon: f64,
}

impl DiskSolution {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        if i == 0 {
            self.center
        } else if i == self.grid.nr {
            self.boundary[j]
        } else {
            self.interior[(i - 1) * self.grid.ntheta + j]
        }
    }

    /// Max interior value over nodes with hyperbolic radius in `[r_a, r_b]`.
    pub fn sup_on_annulus(&self, r_a: f64, r_b: f64) -> f64 {
        let rs = self.grid.r_nodes();
        let mut m = f64::NEG_INFINITY;
        for i in 1..self.grid.nr {
            if rs[i] < r_a || rs[i] > r_b {
                continue;
            }
            for j in 0..self.grid.ntheta {
                m = m.max(self.value(i, j));
            }
        }
        if r_a <= 0.0 && 0.0 <= r_b {
            m = m.max(self.center);
        }
        m
    }

    pub fn interior_min_max(&self) -> (f64, f64) {
        let mut lo = self.center;
        let mut hi = self.center;
        for &v in &self.interior {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    pub fn as_result(&self) -> SolverResult {
        let mut values = Vec::with_capacity(1 + self.interior.len() + self.boundary.len());
        values.push(self.center);
        values.extend_from_slice(&self.interior);
        values.extend_from_slice(&self.boundary);
        SolverResult {
            values,
            residual_norm: self.residual_norm,
            iterations: self.iterations,
            converged: self.converged,
            damping_history: self.damping_history.clone(),
        }
    }
}

/// Coefficient handling inside the assembly.
enum PsiMode {
    /// ψ and its derivative from the live iterate (true Newton).
    Nonlinear,
    /// ψ ≡ 1 (Laplace–Beltrami initializer).
    One,
    /// ψ from a frozen state, zero derivative (Picard).
    Frozen(Vec<f64>),
}

struct Workspace<'a> {
    spec: &'a OperatorSpec,
    grid: &'a DiskGrid,
    r: Vec<f64>,
    s_node: Vec<f64>,
    s_half: Vec<f64>,
    /// δθ_j = θ_{j+1} − θ_j (wrapped)
    dtheta: Vec<f64>,
    /// zigzag permutation of the angular index: circle-neighbors stay
    /// within distance 2 in column space, so the periodic seam never
    /// widens the matrix band
    zig: Vec<usize>,
    eps2: f64,
    mode: PsiMode,
}

fn zigzag(nt: usize) -> Vec<usize> {
    let mut zig = vec![0usize; nt];
    for k in 1..=nt / 2 {
        zig[k] = 2 * k - 1;
    }
    for k in 1..nt - nt / 2 {
        zig[nt - k] = 2 * k;
    }
    zig
}

impl<'a> Workspace<'a> {
    fn new(spec: &'a OperatorSpec, grid: &'a DiskGrid, eps: f64) -> Self {
        let r = grid.r_nodes();
        let theta = grid.theta_nodes();
        let sc = grid.model.sqrt_c();
        let s_of = |rr: f64| (sc * rr).sinh() / sc;
        let s_node: Vec<f64> = r.iter().map(|&rr| s_of(rr)).collect();
        let s_half: Vec<f64> = (0..grid.nr).map(|i| s_of(0.5 * (r[i] + r[i + 1]))).collect();
        let nt = grid.ntheta;
        let dtheta: Vec<f64> = (0..nt)
            .map(|j| {
                let a = theta[j];
                let b =
                    if j + 1 < nt { theta[j + 1] } else { theta[0] + std::f64::consts::TAU };
                b - a
            })
            .collect();
        let zig = zigzag(nt);
        Workspace {
            spec,
            grid,
            r,
            s_node,
            s_half,
            dtheta,
            zig,
            eps2: eps * eps,
            mode: PsiMode::Nonlinear,
        }
    }

    #[inline]
    fn nt(&self) -> usize {
        self.grid.ntheta
    }

    #[inline]
    fn col(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= 1 && i < self.grid.nr);
        1 + (i - 1) * self.nt() + self.zig[j]
    }

    #[inline]
    fn jp(&self, j: usize) -> usize {
        (j + 1) % self.nt()
    }

    #[inline]
    fn jm(&self, j: usize) -> usize {
        (j + self.nt() - 1) % self.nt()
    }

    #[inline]
    fn wtheta(&self, j: usize) -> f64 {
        self.dtheta[j] + self.dtheta[self.jm(j)]
    }

    /// (ψ, dψ/ds, s) at squared gradient `s2` taken from the coefficient
    /// state.
    fn psi_at(&self, s2: f64) -> (f64, f64, f64) {
        let s = s2.sqrt();
        match &self.mode {
            PsiMode::One => (1.0, 0.0, s),
            PsiMode::Frozen(_) => {
                let a = self.spec.a(s);
                (a / s, 0.0, s)
            }
            PsiMode::Nonlinear => {
                let a = self.spec.a(s);
                let ap = self.spec.a_prime(s);
                ((a / s), (ap * s - a) / (s * s), s)
            }
        }
    }

    fn coef_state<'b>(&'b self, u: &'b [f64]) -> &'b [f64] {
        match &self.mode {
            PsiMode::Frozen(w) => w,
            _ => u,
        }
    }

    #[inline]
    fn value(&self, u: &[f64], bd: &[f64], i: usize, j: usize) -> f64 {
        if i == 0 {
            u[0]
        } else if i == self.grid.nr {
            bd[j]
        } else {
            u[self.col(i, j)]
        }
    }

    /// centered angular derivative at (i, j); identically zero at the center
    fn cd(&self, u: &[f64], bd: &[f64], i: usize, j: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            (self.value(u, bd, i, self.jp(j)) - self.value(u, bd, i, self.jm(j))) / self.wtheta(j)
        }
    }

    /// centered radial derivative at (i, j), `1 ≤ i ≤ nr−1`
    fn rd(&self, u: &[f64], bd: &[f64], i: usize, j: usize) -> f64 {
        (self.value(u, bd, i + 1, j) - self.value(u, bd, i - 1, j))
            / (self.r[i + 1] - self.r[i - 1])
    }

    /// Radial flux `S·ψ·u_r` at the half-point between rings `i` and
    /// `i+1`; Jacobian contributions (column, ∂flux) go to `sink`.
    fn radial_flux(
        &self,
        u: &[f64],
        bd: &[f64],
        i: usize,
        j: usize,
        sink: &mut Option<&mut Vec<(usize, f64)>>,
    ) -> f64 {
        let nr = self.grid.nr;
        let dr = self.r[i + 1] - self.r[i];
        let sh = self.s_half[i];
        let g = (self.value(u, bd, i + 1, j) - self.value(u, bd, i, j)) / dr;
        let w = self.coef_state(u);
        let gc = (self.value(w, bd, i + 1, j) - self.value(w, bd, i, j)) / dr;
        let vc = 0.5 * (self.cd(w, bd, i, j) + self.cd(w, bd, i + 1, j)) / sh;
        let (psi, dpsi, s) = self.psi_at(gc * gc + vc * vc + self.eps2);
        let flux = sh * psi * g;
        if let Some(sink) = sink {
            // live-state angular average, for the ψ′ chain terms
            let v = 0.5 * (self.cd(u, bd, i, j) + self.cd(u, bd, i + 1, j)) / sh;
            let mut push = |iw: usize, jw: usize, dg: f64, dv: f64| {
                let d = sh * (dpsi * (g * dg + v * dv) / s * g + psi * dg);
                if iw == 0 {
                    sink.push((0, d));
                } else if iw < nr {
                    sink.push((self.col(iw, jw), d));
                }
            };
            push(i, j, -1.0 / dr, 0.0);
            push(i + 1, j, 1.0 / dr, 0.0);
            if dpsi != 0.0 {
                let wth = self.wtheta(j);
                if i >= 1 {
                    push(i, self.jp(j), 0.0, 0.5 / (wth * sh));
                    push(i, self.jm(j), 0.0, -0.5 / (wth * sh));
                }
                if i + 1 < nr {
                    push(i + 1, self.jp(j), 0.0, 0.5 / (wth * sh));
                    push(i + 1, self.jm(j), 0.0, -0.5 / (wth * sh));
                }
            }
        }
        flux
    }

    /// Angular flux `ψ·u_θ` at the half-point between `(i,j)` and
    /// `(i,j+1)`, `1 ≤ i ≤ nr−1`.
    fn theta_flux(
        &self,
        u: &[f64],
        bd: &[f64],
        i: usize,
        j: usize,
        sink: &mut Option<&mut Vec<(usize, f64)>>,
    ) -> f64 {
        let nr = self.grid.nr;
        let jp = self.jp(j);
        let dth = self.dtheta[j];
        let si = self.s_node[i];
        let q = (self.value(u, bd, i, jp) - self.value(u, bd, i, j)) / dth;
        let w = self.coef_state(u);
        let qc = (self.value(w, bd, i, jp) - self.value(w, bd, i, j)) / dth;
        let rc = 0.5 * (self.rd(w, bd, i, j) + self.rd(w, bd, i, jp));
        let (psi, dpsi, s) = self.psi_at(rc * rc + (qc / si) * (qc / si) + self.eps2);
        let flux = psi * q;
        if let Some(sink) = sink {
            let rbar = 0.5 * (self.rd(u, bd, i, j) + self.rd(u, bd, i, jp));
            let vth = q / si;
            let mut push = |iw: usize, jw: usize, dq: f64, drbar: f64| {
                let ds = (rbar * drbar + vth * dq / si) / s;
                let d = dpsi * ds * q + psi * dq;
                if iw == 0 {
                    sink.push((0, d));
                } else if iw < nr {
                    sink.push((self.col(iw, jw), d));
                }
            };
            push(i, j, -1.0 / dth, 0.0);
            push(i, jp, 1.0 / dth, 0.0);
            if dpsi != 0.0 {
                let wr = self.r[i + 1] - self.r[i - 1];
                push(i + 1, j, 0.0, 0.5 / wr);
                push(i - 1, j, 0.0, -0.5 / wr);
                push(i + 1, jp, 0.0, 0.5 / wr);
                push(i - 1, jp, 0.0, -0.5 / wr);
            }
        }
        flux
    }

    /// Discrete `Q(u)` at every unknown; assembles the Jacobian when given.
    fn residual(&self, u: &[f64], bd: &[f64], mut jac: Option<&mut BandMatrix>) -> Vec<f64> {
        let nr = self.grid.nr;
        let nt = self.nt();
        let n_unknowns = 1 + (nr - 1) * nt;
        let mut res = vec![0.0; n_unknowns];
        let mut sink_buf: Vec<(usize, f64)> = Vec::with_capacity(16);

        // center: flux balance over the half-cell of radius r_half
        let sc = self.grid.model.sqrt_c();
        let r_half = 0.5 * (self.r[0] + self.r[1]);
        let area_c =
            std::f64::consts::TAU * ((sc * r_half).cosh() - 1.0) / self.grid.model.curvature;
        {
            let mut acc = 0.0;
            for j in 0..nt {
                sink_buf.clear();
                let mut sink = jac.is_some().then_some(&mut sink_buf);
                let flux = self.radial_flux(u, bd, 0, j, &mut sink);
                let w = 0.5 * self.wtheta(j);
                acc += flux * w;
                if let Some(m) = jac.as_deref_mut() {
                    for &(colk, d) in sink_buf.iter() {
                        m.add(0, colk, d * w / area_c);
                    }
                }
            }
            res[0] = acc / area_c;
        }

        for i in 1..nr {
            let si = self.s_node[i];
            let drc = 0.5 * (self.r[i + 1] - self.r[i - 1]);
            for j in 0..nt {
                let row = self.col(i, j);
                let wth = 0.5 * self.wtheta(j);
                let cr = 1.0 / (si * drc);
                let ct = 1.0 / (si * si * wth);
                let mut acc = 0.0;

                for (sign, coef, which, jj) in [
                    (1.0, cr, 0, j),
                    (-1.0, cr, 1, j),
                    (1.0, ct, 2, j),
                    (-1.0, ct, 2, self.jm(j)),
                ] {
                    sink_buf.clear();
                    let mut sink = jac.is_some().then_some(&mut sink_buf);
                    let flux = match which {
                        0 => self.radial_flux(u, bd, i, jj, &mut sink),
                        1 => self.radial_flux(u, bd, i - 1, jj, &mut sink),
                        _ => self.theta_flux(u, bd, i, jj, &mut sink),
                    };
                    acc += sign * coef * flux;
                    if let Some(m) = jac.as_deref_mut() {
                        for &(colk, d) in sink_buf.iter() {
                            m.add(row, colk, sign * coef * d);
                        }
                    }
                }
                res[row] = acc;
            }
        }
        res
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Dirichlet solve on the truncated disk. `boundary` is evaluated at the
/// grid's angular nodes. A non-converged (but finite and improving) run
/// returns the best iterate with `converged = false`; hard failures of the
/// linear algebra return `IllConditioned`.
pub fn solve_disk(
    spec: &OperatorSpec,
    grid: &DiskGrid,
    boundary: &dyn Fn(f64) -> f64,
    tol: f64,
) -> Result<DiskSolution, SolverError> {
    let nt = grid.ntheta;
    let nr = grid.nr;
    let bd: Vec<f64> = grid.theta_nodes().iter().map(|&t| boundary(t)).collect();
    if bd.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::InvalidParams("boundary data must be finite".into()));
    }
    let bd_max = bd.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let bd_min = bd.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let scale = 1.0 + bd_max.abs().max(bd_min.abs());
    let eps = 1e-6 * (1.0 + (bd_max - bd_min) / grid.r_trunc);

    let n_unknowns = 1 + (nr - 1) * nt;
    let bandwidth = nt + 2;
    let mut u = vec![0.5 * (bd_max + bd_min); n_unknowns];
    let mut ws = Workspace::new(spec, grid, eps);

    // initial iterate: one Laplace–Beltrami solve (ψ ≡ 1)
    ws.mode = PsiMode::One;
    {
        let mut jac = BandMatrix::new(n_unknowns, bandwidth, bandwidth);
        let res = ws.residual(&u, &bd, Some(&mut jac));
        let lu = jac
            .factor()
            .map_err(|e| SolverError::IllConditioned(format!("harmonic initializer: {e}")))?;
        let mut delta: Vec<f64> = res.iter().map(|v| -v).collect();
        lu.solve(&mut delta);
        for (uv, d) in u.iter_mut().zip(&delta) {
            *uv += d;
        }
    }
    ws.mode = PsiMode::Nonlinear;

    let mut damping_history: Vec<f64> = Vec::new();
    let mut iterations = 0usize;
    let mut res = ws.residual(&u, &bd, None);
    let mut rnorm = inf_norm(&res) / scale;
    if !rnorm.is_finite() {
        return Err(SolverError::NoConvergence("initial residual not finite".into()));
    }
    let max_iter = 60usize;
    while rnorm > tol && iterations < max_iter {
        iterations += 1;

        // Newton direction
        let mut jac = BandMatrix::new(n_unknowns, bandwidth, bandwidth);
        let _ = ws.residual(&u, &bd, Some(&mut jac));
        let newton_dir = jac.factor().ok().map(|lu| {
            let mut d: Vec<f64> = res.iter().map(|v| -v).collect();
            lu.solve(&mut d);
            d
        });

        let mut accepted = false;
        if let Some(dir) = newton_dir {
            // Armijo backtracking with factor 1/2 down to 2^-20
            let mut alpha = 1.0f64;
            while alpha >= 0.5f64.powi(20) {
                let trial: Vec<f64> = u.iter().zip(&dir).map(|(uv, d)| uv + alpha * d).collect();
                let tres = ws.residual(&trial, &bd, None);
                let tnorm = inf_norm(&tres) / scale;
                if tnorm.is_finite() && tnorm <= (1.0 - 1e-4 * alpha) * rnorm {
                    u = trial;
                    res = tres;
                    rnorm = tnorm;
                    damping_history.push(alpha);
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
        }

        if !accepted {
            // Picard fallback: one frozen-coefficient linear solve
            ws.mode = PsiMode::Frozen(u.clone());
            let mut jac = BandMatrix::new(n_unknowns, bandwidth, bandwidth);
            let fres = ws.residual(&u, &bd, Some(&mut jac));
            let picard = jac.factor().ok().map(|lu| {
                let mut d: Vec<f64> = fres.iter().map(|v| -v).collect();
                lu.solve(&mut d);
                d
            });
            ws.mode = PsiMode::Nonlinear;
            let Some(dir) = picard else {
                return Err(SolverError::IllConditioned(
                    "both Newton and Picard systems failed to factor".into(),
                ));
            };
            let mut alpha = 1.0f64;
            while alpha >= 0.5f64.powi(20) {
                let trial: Vec<f64> = u.iter().zip(&dir).map(|(uv, d)| uv + alpha * d).collect();
                let tres = ws.residual(&trial, &bd, None);
                let tnorm = inf_norm(&tres) / scale;
                if tnorm.is_finite() && tnorm < rnorm {
                    u = trial;
                    res = tres;
                    rnorm = tnorm;
                    damping_history.push(alpha);
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
    }

    // u is stored in zigzag column order; emit natural (i, j) order
    let zig = zigzag(nt);
    let mut interior = vec![0.0; (nr - 1) * nt];
    for i in 1..nr {
        for j in 0..nt {
            interior[(i - 1) * nt + j] = u[1 + (i - 1) * nt + zig[j]];
        }
    }
    Ok(DiskSolution {
        grid: grid.clone(),
        center: u[0],
        interior,
        boundary: bd,
        residual_norm: rnorm,
        iterations,
        converged: rnorm <= tol,
        damping_history,
        epsilon: eps,
    })
}
