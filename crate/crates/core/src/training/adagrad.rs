use crate::models::{ModelParams, ParamBlocks};

pub const ADAGRAD_EPS: f64 = 1e-6;

/// Running sum of squared gradients, one entry per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaGradState {
    pub accum: ParamBlocks,
}

impl AdaGradState {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            accum: params.blocks.zeros_like(),
        }
    }
}

/// `G += g²; θ −= lr · g / (√G + ε)`, element-wise.
pub fn adagrad_update(
    params: &mut ModelParams,
    grads: &ParamBlocks,
    state: &mut AdaGradState,
    lr: f64,
) {
    let triples = params
        .blocks
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.accum.tensors_mut());
    for (((name, mut theta), (gname, g)), (_, mut acc)) in triples {
        assert_eq!(name, gname);
        assert_eq!(
            theta.shape(),
            g.shape(),
            "gradient shape mismatch for {name}"
        );
        ndarray::Zip::from(&mut theta)
            .and(&g)
            .and(&mut acc)
            .for_each(|t, &g, a| {
                *a += g * g;
                *t -= lr * g / (a.sqrt() + ADAGRAD_EPS);
            });
    }
}
