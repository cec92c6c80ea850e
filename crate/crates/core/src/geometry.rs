//! Constant-curvature hyperbolic geometry in the Poincaré ball model.
//!
//! The space `H^n(−c)` is the unit ball `{|x| < 1}` with conformal metric
//! `λ(x)|dx|`, `λ(x) = 2/(√c·(1−|x|²))`. All Möbius self-maps of the ball
//! are isometries for every curvature, so isometries are represented
//! curvature-free as `x ↦ a ⊕ (R·x)` with `R` orthogonal and `⊕` the
//! Möbius (gyro) addition; only lengths carry the `1/√c` scale.
//!
//! Distances, distance to a geodesic, Busemann functions of horospheres,
//! and hyperbolic translations fixing an ideal point are all exact closed
//! forms here; nothing in this module iterates.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("dimension/model mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point must lie strictly inside the unit ball (|x| = {0})")]
    OutsideBall(f64),
    #[error("ideal point must lie on the unit sphere (| |ξ|−1 | = {0:.2e} > 1e-9)")]
    NotIdeal(f64),
    #[error("geodesic endpoints must be distinct")]
    DegenerateGeodesic,
    #[error("radius must be positive in sphere mode (got {0})")]
    NonpositiveRadius(f64),
}

/// Model parameters of `H^n(−c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub dim: usize,
    /// Curvature magnitude `c > 0`; the space has sectional curvature `−c`.
    pub curvature: f64,
}

impl Model {
    pub fn new(dim: usize, curvature: f64) -> Self {
        assert!(dim >= 2, "hyperbolic model needs dimension >= 2");
        assert!(curvature > 0.0, "curvature magnitude must be positive");
        Model { dim, curvature }
    }

    pub fn sqrt_c(&self) -> f64 {
        self.curvature.sqrt()
    }

    /// Conformal factor `λ(x) = 2/(√c (1−|x|²))`.
    pub fn conformal_factor(&self, coords: &[f64]) -> f64 {
        2.0 / (self.sqrt_c() * (1.0 - norm_sq(coords)))
    }
}

/// Interior point of the ball model.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
    model: Model,
}

impl Point {
    pub fn new(coords: Vec<f64>, model: Model) -> Result<Self, GeomError> {
        if coords.len() != model.dim {
            return Err(GeomError::DimensionMismatch(format!(
                "coords have length {}, model dimension is {}",
                coords.len(),
                model.dim
            )));
        }
        let n = norm_sq(&coords).sqrt();
        if !(n < 1.0) {
            return Err(GeomError::OutsideBall(n));
        }
        Ok(Point { coords, model })
    }

    pub fn origin(model: Model) -> Self {
        Point { coords: vec![0.0; model.dim], model }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn model(&self) -> Model {
        self.model
    }
}

/// Point of the sphere at infinity, stored normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealPoint {
    dir: Vec<f64>,
}

impl IdealPoint {
    /// Accepts vectors within 1e-9 of unit length and renormalizes.
    pub fn new(dir: Vec<f64>) -> Result<Self, GeomError> {
        let n = norm_sq(&dir).sqrt();
        if (n - 1.0).abs() > 1e-9 {
            return Err(GeomError::NotIdeal((n - 1.0).abs()));
        }
        let dir = dir.iter().map(|x| x / n).collect();
        Ok(IdealPoint { dir })
    }

    pub fn dir(&self) -> &[f64] {
        &self.dir
    }

    /// Ideal point at polar angle θ in the plane of the first two axes.
    pub fn from_angle(theta: f64, dim: usize) -> Self {
        let mut dir = vec![0.0; dim];
        dir[0] = theta.cos();
        dir[1] = theta.sin();
        IdealPoint { dir }
    }
}

/// Complete geodesic given by its two ideal endpoints.
#[derive(Debug, Clone)]
pub struct Geodesic {
    a: IdealPoint,
    b: IdealPoint,
}

impl Geodesic {
    pub fn new(a: IdealPoint, b: IdealPoint) -> Result<Self, GeomError> {
        if dist_euclid(a.dir(), b.dir()) < 1e-9 {
            return Err(GeomError::DegenerateGeodesic);
        }
        Ok(Geodesic { a, b })
    }

    pub fn endpoints(&self) -> (&IdealPoint, &IdealPoint) {
        (&self.a, &self.b)
    }
}

/// Horosphere with ideal point `ideal`, normalized to pass through
/// `through` (the Busemann level of `through` is zero).
#[derive(Debug, Clone)]
pub struct Horosphere {
    pub ideal: IdealPoint,
    pub through: Point,
}

impl Horosphere {
    pub fn new(ideal: IdealPoint, through: Point) -> Self {
        Horosphere { ideal, through }
    }
}

/// Ball-model isometry in the canonical form `x ↦ trans ⊕ (rot · x)`.
#[derive(Clone)]
pub struct Isometry {
    rot: Mat,
    trans: Vec<f64>,
}

impl fmt::Debug for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Isometry(trans = {:?}, rot = {}x{})", self.trans, self.rot.n, self.rot.n)
    }
}

/// Small dense square matrix (row major), enough for the ball dimensions
/// this crate works in.
#[derive(Clone)]
pub(crate) struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Mat { n, data }
    }

    pub fn from_columns(cols: Vec<Vec<f64>>) -> Self {
        let n = cols.len();
        let mut data = vec![0.0; n * n];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
        Mat { n, data }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += self.data[i * self.n + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += aik * other.data[k * n + j];
                }
            }
        }
        Mat { n, data }
    }

    pub fn transpose(&self) -> Mat {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Mat { n, data }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

fn dist_euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Möbius (gyro) addition `a ⊕ x` on the unit ball. Also valid for `x` on
/// the boundary sphere (ideal points map to ideal points).
pub fn mobius_add(a: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = dot(a, x);
    let na2 = norm_sq(a);
    let nx2 = norm_sq(x);
    let denom = 1.0 + 2.0 * ax + na2 * nx2;
    let ca = (1.0 + 2.0 * ax + nx2) / denom;
    let cx = (1.0 - na2) / denom;
    a.iter().zip(x).map(|(ai, xi)| ca * ai + cx * xi).collect()
}

fn neg(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| -x).collect()
}

impl Isometry {
    pub fn identity(dim: usize) -> Self {
        Isometry { rot: Mat::identity(dim), trans: vec![0.0; dim] }
    }

    /// Pure gyro-translation `x ↦ a ⊕ x`.
    pub fn translation(a: Vec<f64>) -> Result<Self, GeomError> {
        let n = norm_sq(&a).sqrt();
        if !(n < 1.0) {
            return Err(GeomError::OutsideBall(n));
        }
        let dim = a.len();
        Ok(Isometry { rot: Mat::identity(dim), trans: a })
    }

    /// Pure rotation about the origin; `cols` are the images of the basis
    /// vectors and must be orthonormal.
    pub fn rotation(cols: Vec<Vec<f64>>) -> Self {
        Isometry { trans: vec![0.0; cols.len()], rot: Mat::from_columns(cols) }
    }

    pub fn dim(&self) -> usize {
        self.trans.len()
    }

    pub fn apply(&self, x: &Point) -> Point {
        let rx = self.rot.apply(x.coords());
        let coords = mobius_add(&self.trans, &rx);
        Point { coords, model: x.model() }
    }

    /// Boundary action on ideal points.
    pub fn apply_boundary(&self, xi: &IdealPoint) -> IdealPoint {
        let rx = self.rot.apply(xi.dir());
        let mut out = mobius_add(&self.trans, &rx);
        let n = norm_sq(&out).sqrt();
        for v in &mut out {
            *v /= n;
        }
        IdealPoint { dir: out }
    }

    /// Composition `self ∘ other` in canonical form, using the gyration
    /// identity `a ⊕ (b ⊕ x) = (a ⊕ b) ⊕ gyr[a,b]x`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let u = self.rot.apply(&other.trans);
        let trans = mobius_add(&self.trans, &u);
        let gyr = gyration_matrix(&self.trans, &u);
        let rot = gyr.mul(&self.rot).mul(&other.rot);
        Isometry { rot, trans }
    }

    /// Group inverse: `(a ⊕ Rx)⁻¹ = (−Rᵀa) ⊕ Rᵀx`.
    pub fn inverse(&self) -> Isometry {
        let rt = self.rot.transpose();
        let trans = neg(&rt.apply(&self.trans));
        Isometry { rot: rt, trans }
    }
}

/// The orthogonal gyration `gyr[a,b]`, extracted column by column from
/// `gyr[a,b]x = ⊖(a⊕b) ⊕ (a ⊕ (b ⊕ x))` applied to scaled basis vectors
/// (the identity is exact for any interior x and gyration is linear).
fn gyration_matrix(a: &[f64], b: &[f64]) -> Mat {
    let n = a.len();
    let ab = mobius_add(a, b);
    let minus_ab = neg(&ab);
    let t = 0.25;
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = t;
        let img = mobius_add(&minus_ab, &mobius_add(a, &mobius_add(b, &e)));
        cols.push(img.iter().map(|v| v / t).collect());
    }
    Mat::from_columns(cols)
}

fn check_same_model(x: &Point, y: &Point) -> Result<(), GeomError> {
    if x.model() != y.model() {
        return Err(GeomError::DimensionMismatch(format!(
            "{:?} vs {:?}",
            x.model(),
            y.model()
        )));
    }
    Ok(())
}

/// Hyperbolic distance,
/// `(1/√c)·arcosh(1 + 2|x−y|²/((1−|x|²)(1−|y|²)))`.
pub fn hyp_distance(x: &Point, y: &Point) -> Result<f64, GeomError> {
    check_same_model(x, y)?;
    let dx = dist_euclid(x.coords(), y.coords());
    let arg = 1.0 + 2.0 * dx * dx / ((1.0 - norm_sq(x.coords())) * (1.0 - norm_sq(y.coords())));
    Ok(arg.max(1.0).acosh() / x.model().sqrt_c())
}

/// Distance from `x` to the complete geodesic `γ`, in closed form after a
/// Möbius translation carrying `x` to the origin: if the translated ideal
/// endpoints subtend angle θ at the origin, the distance is
/// `(2/√c)·artanh(tan(π/4 − θ/4))`.
pub fn dist_to_geodesic(x: &Point, gamma: &Geodesic) -> Result<f64, GeomError> {
    let a = neg(x.coords());
    let u = mobius_add(&a, gamma.a.dir());
    let v = mobius_add(&a, gamma.b.dir());
    let cos_theta = (dot(&u, &v) / (norm_sq(&u).sqrt() * norm_sq(&v).sqrt())).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();
    let e = (std::f64::consts::FRAC_PI_4 - 0.25 * theta).tan();
    Ok(2.0 * e.clamp(0.0, 1.0 - 1e-16).atanh() / x.model().sqrt_c())
}

/// Signed horospherical distance (Busemann function) of `x` with respect
/// to the horosphere `h`: positive inside the horoball, negative outside,
/// zero on the horosphere itself.
pub fn busemann(x: &Point, h: &Horosphere) -> Result<f64, GeomError> {
    check_same_model(x, &h.through)?;
    let level = |p: &Point| -> f64 {
        let d2 = p
            .coords()
            .iter()
            .zip(h.ideal.dir())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        ((1.0 - norm_sq(p.coords())) / d2).ln()
    };
    Ok((level(x) - level(&h.through)) / x.model().sqrt_c())
}

/// Hyperbolic translation of signed length `translation` along the
/// geodesic through the ball origin with ideal endpoint `ξ`; fixes `ξ`
/// (and the antipodal ideal point). The one-parameter group law
/// `T(s1)∘T(s2) = T(s1+s2)` holds exactly.
pub fn mobius_fix_ideal(xi: &IdealPoint, translation: f64, model: Model) -> Isometry {
    let t = (model.sqrt_c() * translation / 2.0).tanh();
    let a: Vec<f64> = xi.dir().iter().map(|v| t * v).collect();
    Isometry { rot: Mat::identity(model.dim), trans: a }
}

/// Image of a point under an isometry.
pub fn apply_isometry(iso: &Isometry, x: &Point) -> Point {
    iso.apply(x)
}

/// Reference Laplacian coefficients of distance functions in `H^n(−c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianMode {
    /// `Δ dist(·, point) = (n−1)·√c·coth(√c·r)`.
    Sphere,
    /// Laplacian of the signed horospherical distance (positive inside
    /// the horoball): `Δd = −(n−1)·√c`.
    Horosphere,
}

pub fn laplacian_distance(r: f64, c: f64, n: usize, mode: LaplacianMode) -> Result<f64, GeomError> {
    let sc = c.sqrt();
    match mode {
        LaplacianMode::Sphere => {
            if !(r > 0.0) {
                return Err(GeomError::NonpositiveRadius(r));
            }
            Ok((n as f64 - 1.0) * sc / (sc * r).tanh())
        }
        LaplacianMode::Horosphere => Ok(-(n as f64 - 1.0) * sc),
    }
}
