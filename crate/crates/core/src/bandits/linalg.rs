// Small dense symmetric solves for ridge regression (row-major storage).

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Lower Cholesky factor of a symmetric `d x d` matrix, or `None` if it is
/// not positive definite.
pub fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), d * d);
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[i * d + j];
            for k in 0..j {
                sum -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return None;
                }
                l[i * d + i] = math::sqrt(sum);
            } else {
                l[i * d + j] = sum / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Solves `L y = b` in place.
fn forward(l: &[f64], d: usize, b: &mut [f64]) {
    for i in 0..d {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * d + k] * b[k];
        }
        b[i] = s / l[i * d + i];
    }
}

/// Solves `L^T x = y` in place.
fn backward(l: &[f64], d: usize, y: &mut [f64]) {
    for i in (0..d).rev() {
        let mut s = y[i];
        for k in i + 1..d {
            s -= l[k * d + i] * y[k];
        }
        y[i] = s / l[i * d + i];
    }
}

/// Solves `A x = b` given the Cholesky factor of `A`.
pub fn cholesky_solve(l: &[f64], d: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    forward(l, d, &mut x);
    backward(l, d, &mut x);
    x
}

/// `a^T A^{-1} a` given the Cholesky factor of `A`.
pub fn inverse_quadratic_form(l: &[f64], d: usize, a: &[f64]) -> f64 {
    let mut y = a.to_vec();
    forward(l, d, &mut y);
    y.iter().map(|v| v * v).sum()
}
