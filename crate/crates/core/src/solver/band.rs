//! Banded LU with partial pivoting. Storage is keyed by row position with
//! fixed windows `[i − kl, i + ku + kl]`; the extra `kl` superdiagonals
//! hold pivoting fill. Multipliers are kept in a replay list instead of
//! in-place, so a row interchange only has to exchange the active range
//! `[k, k + ku + kl]` — every not-yet-eliminated entry of both candidate
//! rows lives there.

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    /// rows[i][c] = A(i, i - kl + c)
    rows: Vec<Vec<f64>>,
}

pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    rows: Vec<Vec<f64>>,
    /// multipliers (row, col, l) in elimination order
    ops: Vec<(u32, u32, f64)>,
    pivots: Vec<u32>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = kl + ku + kl + 1;
        BandMatrix { n, kl, ku, width, rows: vec![vec![0.0; width]; n] }
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        let off = j as isize - (i as isize - self.kl as isize);
        debug_assert!(
            off >= 0 && (off as usize) < self.width,
            "entry ({i},{j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        off as usize
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let off = self.offset(i, j);
        self.rows[i][off] += v;
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][self.offset(i, j)]
    }

    /// Factorization with partial pivoting; fails on an exactly singular
    /// or non-finite pivot column.
    pub fn factor(mut self) -> Result<BandLu, String> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut ops: Vec<(u32, u32, f64)> = Vec::with_capacity(n * kl.min(8));
        let mut pivots = vec![0u32; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for r in k + 1..=last_row {
                let v = self.get(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(format!("singular pivot at column {k} (|pivot| = {best})"));
            }
            pivots[k] = p as u32;
            let last_col = (k + ku + kl).min(n - 1);
            if p != k {
                // exchange the active ranges of positions k and p
                for j in k..=last_col {
                    let ok = self.offset(k, j);
                    let op = self.offset(p, j);
                    let tmp = self.rows[k][ok];
                    self.rows[k][ok] = self.rows[p][op];
                    self.rows[p][op] = tmp;
                }
            }
            let piv = self.get(k, k);
            for r in k + 1..=last_row {
                let v = self.get(r, k);
                if v != 0.0 {
                    let l = v / piv;
                    // target and source windows both cover [k, last_col]
                    for j in k..=last_col {
                        let so = self.offset(k, j);
                        let to = self.offset(r, j);
                        let s = self.rows[k][so];
                        self.rows[r][to] -= l * s;
                    }
                    ops.push((r as u32, k as u32, l));
                }
            }
        }
        Ok(BandLu { n, kl: self.kl, ku: self.ku, rows: self.rows, ops, pivots })
    }
}

impl BandLu {
    pub fn solve(&self, rhs: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.n);
        let mut op_idx = 0usize;
        for k in 0..self.n {
            let p = self.pivots[k] as usize;
            if p != k {
                rhs.swap(k, p);
            }
            while op_idx < self.ops.len() && self.ops[op_idx].1 as usize == k {
                let (r, _, l) = self.ops[op_idx];
                rhs[r as usize] -= l * rhs[k];
                op_idx += 1;
            }
        }
        for k in (0..self.n).rev() {
            let last_col = (k + self.ku + self.kl).min(self.n - 1);
            let row = &self.rows[k];
            let base = k as isize - self.kl as isize;
            let mut acc = rhs[k];
            for j in k + 1..=last_col {
                let v = row[(j as isize - base) as usize];
                if v != 0.0 {
                    acc -= v * rhs[j];
                }
            }
            rhs[k] = acc / row[(k as isize - base) as usize];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tridiagonal_poisson_solve() {
        let n = 64;
        let mut m = BandMatrix::new(n, 1, 1);
        for i in 0..n {
            m.add(i, i, 2.0);
            if i > 0 {
                m.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                m.add(i, i + 1, -1.0);
            }
        }
        // exact solution x_i = 1 for rhs = A·1
        let mut rhs = vec![0.0; n];
        rhs[0] = 1.0;
        rhs[n - 1] = 1.0;
        let lu = m.factor().unwrap();
        lu.solve(&mut rhs);
        for v in &rhs {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_banded_matches_dense_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 60;
        let (kl, ku) = (4usize, 3usize);
        let mut band = BandMatrix::new(n, kl, ku);
        let mut dense = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                let v: f64 = rng.gen_range(-1.0..1.0);
                band.add(i, j, v);
                dense[i][j] = v;
            }
            band.add(i, i, 5.0);
            dense[i][i] += 5.0;
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut rhs: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| dense[i][j] * x_true[j]).sum())
            .collect();
        let lu = band.factor().unwrap();
        lu.solve(&mut rhs);
        for (got, want) in rhs.iter().zip(&x_true) {
            assert!((got - want).abs() < 1e-8, "got {got}, want {want}");
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [0 1; 1 0] requires a row swap
        let mut m = BandMatrix::new(2, 1, 1);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        let lu = m.factor().unwrap();
        let mut rhs = vec![3.0, 7.0];
        lu.solve(&mut rhs);
        assert!((rhs[0] - 7.0).abs() < 1e-14);
        assert!((rhs[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn row_permuted_system_forces_pivot_chains() {
        // pairwise-swapped rows of a dominant tridiagonal system: solvable
        // only through interchanges
        let n = 31;
        let (kl, ku) = (2usize, 2usize);
        let mut band = BandMatrix::new(n, kl, ku);
        let entry = |i: usize, j: usize| -> f64 {
            if i == j {
                4.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        };
        let perm: Vec<usize> = (0..n)
            .map(|i| if i % 2 == 0 && i + 1 < n { i + 1 } else if i % 2 == 1 { i - 1 } else { i })
            .collect();
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                let v = entry(perm[i], j);
                if v != 0.0 {
                    band.add(i, j, v);
                }
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let mut rhs: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| entry(perm[i], j) * x_true[j]).sum())
            .collect();
        let lu = band.factor().unwrap();
        lu.solve(&mut rhs);
        for (got, want) in rhs.iter().zip(&x_true) {
            assert!((got - want).abs() < 1e-11, "got {got}, want {want}");
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let mut m = BandMatrix::new(3, 1, 1);
        m.add(0, 0, 1.0);
        m.add(2, 2, 1.0);
        assert!(m.factor().is_err());
    }
}
