//! Finite-difference weights on arbitrary node sets (Fornberg's algorithm).

/// Weights for approximating derivatives of order `0..=max_order` at `x0`
/// from samples at `nodes`. Returns `w` with `w[k][j]` the weight of
/// `f(nodes[j])` in the k-th derivative. The nodes must be distinct;
/// accuracy order is `nodes.len() - max_order` for smooth functions.
pub fn fd_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    assert!(n > max_order, "need more nodes than the derivative order");
    let m = max_order;
    let mut w = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    w[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[k][i] = c1 * (k as f64 * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                w[k][j] = (c4 * w[k][j] - k as f64 * w[k - 1][j]) / c3;
            }
            w[0][j] = c4 * w[0][j] / c3;
        }
        c1 = c2;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_second_derivative_weights() {
        let nodes = [-1.0, 0.0, 1.0];
        let w = fd_weights(0.0, &nodes, 2);
        assert!((w[2][0] - 1.0).abs() < 1e-14);
        assert!((w[2][1] + 2.0).abs() < 1e-14);
        assert!((w[2][2] - 1.0).abs() < 1e-14);
        assert!((w[1][0] + 0.5).abs() < 1e-14);
        assert!((w[1][2] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn five_point_first_derivative_is_fourth_order() {
        let h = 1e-2;
        let nodes: Vec<f64> = (-2..=2).map(|k| k as f64 * h).collect();
        let w = fd_weights(0.0, &nodes, 1);
        let d: f64 = nodes
            .iter()
            .zip(&w[1])
            .map(|(x, wt)| wt * x.sin())
            .sum();
        assert!((d - 1.0).abs() < 1e-9, "err {}", (d - 1.0).abs());
    }

    #[test]
    fn nonuniform_nodes_reproduce_polynomial_derivatives() {
        let nodes = [0.0, 0.13, 0.21, 0.55, 0.89];
        let x0 = 0.4;
        let w = fd_weights(x0, &nodes, 2);
        // f(x) = x^3: f'(0.4) = 0.48, f''(0.4) = 2.4 (exact for degree <= 4)
        let f = |x: f64| x * x * x;
        let d1: f64 = nodes.iter().zip(&w[1]).map(|(x, wt)| wt * f(*x)).sum();
        let d2: f64 = nodes.iter().zip(&w[2]).map(|(x, wt)| wt * f(*x)).sum();
        assert!((d1 - 0.48).abs() < 1e-12);
        assert!((d2 - 2.4).abs() < 1e-11);
    }
}
