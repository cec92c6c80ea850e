//! Deterministic low-discrepancy sample sets (the additive-recurrence Rd
//! sequence built on the generalized golden ratio). A seed offsets the
//! sequence index, so sample sets are reproducible and parameterized by a
//! single integer.

use crate::geometry::{Model, Point};

/// Additive-recurrence quasi-random sequence in `[0,1)^dim`.
#[derive(Debug, Clone)]
pub struct QuasiRandom {
    alphas: Vec<f64>,
    index: u64,
}

impl QuasiRandom {
    pub fn new(dim: usize, seed: u64) -> Self {
        // generalized golden ratio: the positive root of x^{d+1} = x + 1
        let mut phi = 1.5f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
        }
        let alphas = (1..=dim).map(|k| (1.0 / phi.powi(k as i32)).fract()).collect();
        QuasiRandom { alphas, index: seed }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        self.index = self.index.wrapping_add(1);
        let i = self.index as f64;
        self.alphas.iter().map(|a| (0.5 + a * i).fract()).collect()
    }
}

/// First `count` sequence points mapped into the cube `[-extent, extent]^dim`
/// that pass `keep`. Gives up (returning fewer points) after scanning
/// `10_000 × count` candidates.
pub fn sample_ball(
    model: Model,
    count: usize,
    extent: f64,
    seed: u64,
    keep: &dyn Fn(&Point) -> bool,
) -> Vec<Point> {
    let mut seq = QuasiRandom::new(model.dim, seed);
    let mut out = Vec::with_capacity(count);
    let mut budget = 10_000usize.saturating_mul(count);
    while out.len() < count && budget > 0 {
        budget -= 1;
        let u = seq.next_point();
        let coords: Vec<f64> = u.iter().map(|v| (2.0 * v - 1.0) * extent).collect();
        if coords.iter().map(|c| c * c).sum::<f64>().sqrt() >= extent {
            continue;
        }
        if let Ok(p) = Point::new(coords, model) {
            if keep(&p) {
                out.push(p);
            }
        }
    }
    out
}
