use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::corpus::QuestionClass;

/// Softmax regression over the question classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierHead {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl ClassifierHead {
    pub fn zeros(in_dim: usize) -> Self {
        Self {
            weight: Array2::zeros((QuestionClass::COUNT, in_dim)),
            bias: Array1::zeros(QuestionClass::COUNT),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Negative log-probability of the gold class.
    pub loss: f64,
    pub probs: Array1<f64>,
}

pub fn softmax_classify(
    input: ArrayView1<'_, f64>,
    head: &ClassifierHead,
    gold: usize,
) -> Classification {
    assert!(gold < head.bias.len(), "gold class {gold} out of range");
    let logits = head.weight.dot(&input) + &head.bias;
    let max = logits.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exp = logits.mapv(|v| (v - max).exp());
    let sum = exp.sum();
    let probs = exp / sum;
    let loss = max + sum.ln() - logits[gold];
    Classification { loss, probs }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierGrads {
    pub input: Array1<f64>,
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Gradients of `upstream · loss`.
pub fn softmax_backward(
    input: ArrayView1<'_, f64>,
    head: &ClassifierHead,
    probs: ArrayView1<'_, f64>,
    gold: usize,
    upstream: f64,
) -> ClassifierGrads {
    let mut dlogits = probs.to_owned();
    dlogits[gold] -= 1.0;
    dlogits *= upstream;
    let weight = dlogits
        .view()
        .insert_axis(Axis(1))
        .dot(&input.insert_axis(Axis(0)))
        .as_standard_layout()
        .into_owned();
    let grad_input = head.weight.t().dot(&dlogits);
    ClassifierGrads {
        input: grad_input,
        weight,
        bias: dlogits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{fd_check, random_matrix};
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_loss_is_ln12() {
        let head = ClassifierHead::zeros(5);
        let c = softmax_classify(array![1.0, 2.0, 3.0, 4.0, 5.0].view(), &head, 4);
        assert!((c.loss - 12f64.ln()).abs() < 1e-9);
        assert!((c.loss - 2.4849).abs() < 1e-4);
        assert!(c.probs.iter().all(|&p| (p - 1.0 / 12.0).abs() < 1e-15));
    }

    #[test]
    fn saturated_gold() {
        let mut head = ClassifierHead::zeros(3);
        head.bias[7] = 50.0;
        let c = softmax_classify(array![0.2, 0.1, -0.3].view(), &head, 7);
        assert!(c.loss < 1e-9 && c.loss >= 0.0);
        assert!((c.probs.sum() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let head = ClassifierHead {
            weight: random_matrix(&mut rng, 12, 5),
            bias: random_matrix(&mut rng, 12, 1).column(0).to_owned(),
        };
        let x = random_matrix(&mut rng, 5, 1).column(0).to_owned();
        let gold = 3;
        let c = softmax_classify(x.view(), &head, gold);
        let g = softmax_backward(x.view(), &head, c.probs.view(), gold, 1.0);
        fd_check(60, g.weight.as_slice().unwrap(), 1e-6, |i, h| {
            let mut hd = head.clone();
            hd.weight.as_slice_mut().unwrap()[i] += h;
            softmax_classify(x.view(), &hd, gold).loss
        });
        fd_check(12, g.bias.as_slice().unwrap(), 1e-6, |i, h| {
            let mut hd = head.clone();
            hd.bias[i] += h;
            softmax_classify(x.view(), &hd, gold).loss
        });
        fd_check(5, g.input.as_slice().unwrap(), 1e-6, |i, h| {
            let mut y = x.clone();
            y[i] += h;
            softmax_classify(y.view(), &head, gold).loss
        });
    }
}
