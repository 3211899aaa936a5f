//! Finite-difference weights on arbitrary node sets (Fornberg's recursion).

use alloc::vec;
use alloc::vec::Vec;

/// Weights `w[k][j]` such that `f^{(k)}(z) ≈ Σ_j w[k][j] f(xs[j])` for
/// `k = 0..=max_order`.
pub fn fd_weights(z: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let m = max_order;
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_uniform() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w[1][0] + 0.5).abs() < 1e-14 && (w[1][2] - 0.5).abs() < 1e-14);
        assert!((w[2][0] - 1.0).abs() < 1e-14 && (w[2][1] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn one_sided_second_derivative() {
        let w = fd_weights(0.0, &[0.0, 1.0, 2.0, 3.0], 2);
        let expect = [2.0, -5.0, 4.0, -1.0];
        for (a, b) in w[2].iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_on_quadratics_nonuniform() {
        let xs = [0.1, 0.35, 0.5, 0.9];
        let f = |x: f64| 3.0 * x * x - x + 2.0;
        let w = fd_weights(0.4, &xs, 2);
        let d1: f64 = xs.iter().zip(&w[1]).map(|(x, c)| c * f(*x)).sum();
        let d2: f64 = xs.iter().zip(&w[2]).map(|(x, c)| c * f(*x)).sum();
        assert!((d1 - (6.0 * 0.4 - 1.0)).abs() < 1e-12);
        assert!((d2 - 6.0).abs() < 1e-11);
    }
}
