use ndarray::{Array1, Array2, ArrayView1};

/// Gate `h = σ(W_h · v_s + b_h)` mixing two representations.
#[derive(Debug, Clone, PartialEq)]
pub struct HighwayLayer {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl HighwayLayer {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weight: Array2::zeros((dim, dim)),
            bias: Array1::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.bias.len()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HighwayOutput {
    /// `(1 − h) ⊙ v_s + h ⊙ v_t`
    pub combined: Array1<f64>,
    pub gate: Array1<f64>,
}

pub fn highway_combine(
    v_s: ArrayView1<'_, f64>,
    v_t: ArrayView1<'_, f64>,
    layer: &HighwayLayer,
) -> HighwayOutput {
    let d = layer.dim();
    assert!(
        v_s.len() == d && v_t.len() == d,
        "highway input dimension mismatch"
    );
    let gate = (layer.weight.dot(&v_s) + &layer.bias).mapv(sigmoid);
    let combined = &v_s + &(&gate * &(&v_t - &v_s));
    HighwayOutput { combined, gate }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HighwayGrads {
    pub sentence: Array1<f64>,
    pub snippet: Array1<f64>,
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

pub fn highway_backward(
    v_s: ArrayView1<'_, f64>,
    v_t: ArrayView1<'_, f64>,
    layer: &HighwayLayer,
    gate: ArrayView1<'_, f64>,
    upstream: ArrayView1<'_, f64>,
) -> HighwayGrads {
    let snippet = &gate * &upstream;
    let pre = (&v_t - &v_s) * upstream * &gate.mapv(|h| h * (1.0 - h));
    let weight = pre
        .view()
        .insert_axis(ndarray::Axis(1))
        .dot(&v_s.insert_axis(ndarray::Axis(0)))
        .as_standard_layout()
        .into_owned();
    let sentence = gate.mapv(|h| 1.0 - h) * upstream + layer.weight.t().dot(&pre);
    HighwayGrads {
        sentence,
        snippet,
        weight,
        bias: pre,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{fd_check, random_matrix};
    use ndarray::array;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_average() {
        let layer = HighwayLayer::zeros(3);
        let out = highway_combine(
            array![1.0, 2.0, 3.0].view(),
            array![3.0, 0.0, -1.0].view(),
            &layer,
        );
        assert_eq!(out.gate.to_vec(), vec![0.5; 3]);
        assert_eq!(out.combined.to_vec(), vec![2.0, 1.0, 1.0]);
    }

    #[test]
    fn saturated_gate_passes_snippet() {
        let mut layer = HighwayLayer::zeros(2);
        layer.bias.fill(100.0);
        let v_t = array![0.4, -0.7];
        let out = highway_combine(array![5.0, 9.0].view(), v_t.view(), &layer);
        for (a, b) in out.combined.iter().zip(v_t.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layer = HighwayLayer {
            weight: random_matrix(&mut rng, 4, 4),
            bias: random_matrix(&mut rng, 4, 1).column(0).to_owned(),
        };
        let v_s = random_matrix(&mut rng, 4, 1).column(0).to_owned();
        let v_t = random_matrix(&mut rng, 4, 1).column(0).to_owned();
        let up = array![0.3, -1.1, 0.6, 0.9];
        let f = |l: &HighwayLayer, s: &Array1<f64>, t: &Array1<f64>| {
            highway_combine(s.view(), t.view(), l).combined.dot(&up)
        };
        let out = highway_combine(v_s.view(), v_t.view(), &layer);
        let g = highway_backward(v_s.view(), v_t.view(), &layer, out.gate.view(), up.view());
        fd_check(16, g.weight.as_slice().unwrap(), 1e-6, |i, h| {
            let mut l = layer.clone();
            l.weight.as_slice_mut().unwrap()[i] += h;
            f(&l, &v_s, &v_t)
        });
        fd_check(4, g.bias.as_slice().unwrap(), 1e-6, |i, h| {
            let mut l = layer.clone();
            l.bias[i] += h;
            f(&l, &v_s, &v_t)
        });
        fd_check(4, g.sentence.as_slice().unwrap(), 1e-6, |i, h| {
            let mut s = v_s.clone();
            s[i] += h;
            f(&layer, &s, &v_t)
        });
        fd_check(4, g.snippet.as_slice().unwrap(), 1e-6, |i, h| {
            let mut t = v_t.clone();
            t[i] += h;
            f(&layer, &v_s, &t)
        });
    }

    proptest! {
        #[test]
        fn gate_open_interval_and_convex(
            w in prop::collection::vec(-3.0f64..3.0, 9),
            b in prop::collection::vec(-3.0f64..3.0, 3),
            s in prop::collection::vec(-2.0f64..2.0, 3),
            t in prop::collection::vec(-2.0f64..2.0, 3),
        ) {
            let layer = HighwayLayer { weight: Array2::from_shape_vec((3, 3), w).unwrap(), bias: Array1::from(b) };
            let (s, t) = (Array1::from(s), Array1::from(t));
            let out = highway_combine(s.view(), t.view(), &layer);
            for j in 0..3 {
                prop_assert!(out.gate[j] > 0.0 && out.gate[j] < 1.0);
                let (lo, hi) = (s[j].min(t[j]), s[j].max(t[j]));
                prop_assert!(out.combined[j] >= lo - 1e-12 && out.combined[j] <= hi + 1e-12);
            }
        }
    }
}
