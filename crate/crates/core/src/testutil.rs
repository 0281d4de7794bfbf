use ndarray::Array2;
use rand::Rng;

use crate::training::gradcheck::{central_difference, relative_error, FD_STEP};

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.0..1.0))
}

/// Checks `analytic[i]` against central differences of `f(i, ±h)`.
pub fn fd_check(n: usize, analytic: &[f64], tol: f64, mut f: impl FnMut(usize, f64) -> f64) {
    assert_eq!(n, analytic.len());
    for (i, &a) in analytic.iter().enumerate() {
        let num = central_difference(f(i, FD_STEP), f(i, -FD_STEP), FD_STEP);
        let err = relative_error(a, num);
        assert!(
            err < tol,
            "entry {i}: analytic {a} numeric {num} rel err {err}"
        );
    }
}
