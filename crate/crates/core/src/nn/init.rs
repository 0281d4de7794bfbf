use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform draw from `±√(6 / (fan_in + fan_out))` for a `rows × cols` matrix.
pub fn xavier_uniform<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..limit))
}

/// One `(weight, bias)` pair per `(rows, cols)` shape, in order. Biases are zero.
pub fn init_params(seed: u64, shapes: &[(usize, usize)]) -> Vec<(Array2<f64>, Array1<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shapes
        .iter()
        .map(|&(rows, cols)| {
            assert!(
                rows > 0 && cols > 0,
                "parameter dimensions must be positive"
            );
            (xavier_uniform(&mut rng, rows, cols), Array1::zeros(rows))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = init_params(11, &[(3, 4), (2, 2)]);
        let b = init_params(11, &[(3, 4), (2, 2)]);
        assert_eq!(a, b);
        assert_ne!(a, init_params(12, &[(3, 4), (2, 2)]));
    }

    #[test]
    fn biases_zero_and_weights_bounded() {
        let p = init_params(1, &[(90, 100)]);
        let (w, b) = &p[0];
        assert!(b.iter().all(|&v| v == 0.0));
        let limit = (6.0f64 / 190.0).sqrt();
        assert!(w.iter().all(|v| v.abs() <= limit));
    }

    #[test]
    fn sample_mean_near_zero() {
        let (w, _) = &init_params(2024, &[(90, 100)])[0];
        let limit = (6.0f64 / 190.0).sqrt();
        let se = limit / (3.0f64 * 9000.0).sqrt();
        let mean = w.mean().unwrap();
        assert!(mean.abs() < 3.0 * se, "mean {mean} vs 3se {}", 3.0 * se);
    }
}
