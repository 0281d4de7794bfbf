//! The hierarchical attention-based encoder, the three scoring
//! architectures, the two additive baselines, and checkpoints.

mod baseline;
mod checkpoint;
pub(crate) mod encoder;
mod habcnn;

use std::fmt;
use std::str::FromStr;

use ndarray::{ArrayViewD, ArrayViewMutD};
use serde::{Deserialize, Serialize};

pub use baseline::{baseline_addition, baseline_addition_proj, Addition, AdditionProj};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub(crate) use habcnn::statement as habcnn_statement;
pub use habcnn::{AttentionTrace, EncodedDoc, Habcnn, QueryEncoding};

use crate::nn::{init_params, ClassifierHead, ConvLayer, HighwayLayer};

/// How query and document representations are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    /// Question-attended document vs. answer representation.
    Qp,
    /// Question-attended document vs. answer-attended document.
    Qap,
    /// Statement-attended document vs. statement representation.
    Te,
}

impl Arch {
    pub const ALL: [Arch; 3] = [Arch::Qp, Arch::Qap, Arch::Te];

    pub fn as_str(self) -> &'static str {
        match self {
            Arch::Qp => "qp",
            Arch::Qap => "qap",
            Arch::Te => "te",
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Arch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qp" => Ok(Arch::Qp),
            "qap" => Ok(Arch::Qap),
            "te" => Ok(Arch::Te),
            other => Err(format!("unknown architecture {other:?}")),
        }
    }
}

/// Shapes and pooling sizes of one model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub arch: Arch,
    pub embed_dim: usize,
    /// Output width of both convolution layers.
    pub hidden: usize,
    pub sentence_width: usize,
    pub snippet_width: usize,
    /// Sentences kept by attention pooling.
    pub k_sentence: usize,
    /// Snippets kept by attention pooling.
    pub k_snippet: usize,
}

impl ModelConfig {
    /// d=50, d1=[90,90], w=[2,2], k=[1,3].
    pub fn new(arch: Arch) -> Self {
        Self {
            arch,
            embed_dim: 50,
            hidden: 90,
            sentence_width: 2,
            snippet_width: 2,
            k_sentence: 1,
            k_snippet: 3,
        }
    }

    pub fn with_embed_dim(mut self, dim: usize) -> Self {
        self.embed_dim = dim;
        self
    }
}

/// All trainable tensors. Also used, zero-initialised, as a gradient buffer
/// and as AdaGrad accumulator storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBlocks {
    /// Shared by every query and every document sentence.
    pub sentence_conv: ConvLayer,
    /// Shared by the query snippet and every document snippet.
    pub snippet_conv: ConvLayer,
    /// Shared by the document and query sides.
    pub highway: HighwayLayer,
    pub classifier: ClassifierHead,
}

/// Names of the trainable tensors, in enumeration order.
pub const PARAM_NAMES: [&str; 8] = [
    "sentence_conv.weight",
    "sentence_conv.bias",
    "snippet_conv.weight",
    "snippet_conv.bias",
    "highway.weight",
    "highway.bias",
    "classifier.weight",
    "classifier.bias",
];

impl ParamBlocks {
    pub fn zeros(config: &ModelConfig) -> Self {
        Self {
            sentence_conv: ConvLayer::zeros(config.embed_dim, config.hidden, config.sentence_width),
            snippet_conv: ConvLayer::zeros(config.hidden, config.hidden, config.snippet_width),
            highway: HighwayLayer::zeros(config.hidden),
            classifier: ClassifierHead::zeros(config.hidden),
        }
    }

    /// A zero tensor set of the same shapes.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.fill(0.0);
        z
    }

    pub fn fill(&mut self, value: f64) {
        for (_, mut t) in self.tensors_mut() {
            t.fill(value);
        }
    }

    pub fn tensors(&self) -> [(&'static str, ArrayViewD<'_, f64>); 8] {
        [
            (PARAM_NAMES[0], self.sentence_conv.weight.view().into_dyn()),
            (PARAM_NAMES[1], self.sentence_conv.bias.view().into_dyn()),
            (PARAM_NAMES[2], self.snippet_conv.weight.view().into_dyn()),
            (PARAM_NAMES[3], self.snippet_conv.bias.view().into_dyn()),
            (PARAM_NAMES[4], self.highway.weight.view().into_dyn()),
            (PARAM_NAMES[5], self.highway.bias.view().into_dyn()),
            (PARAM_NAMES[6], self.classifier.weight.view().into_dyn()),
            (PARAM_NAMES[7], self.classifier.bias.view().into_dyn()),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, ArrayViewMutD<'_, f64>); 8] {
        [
            (
                PARAM_NAMES[0],
                self.sentence_conv.weight.view_mut().into_dyn(),
            ),
            (
                PARAM_NAMES[1],
                self.sentence_conv.bias.view_mut().into_dyn(),
            ),
            (
                PARAM_NAMES[2],
                self.snippet_conv.weight.view_mut().into_dyn(),
            ),
            (PARAM_NAMES[3], self.snippet_conv.bias.view_mut().into_dyn()),
            (PARAM_NAMES[4], self.highway.weight.view_mut().into_dyn()),
            (PARAM_NAMES[5], self.highway.bias.view_mut().into_dyn()),
            (PARAM_NAMES[6], self.classifier.weight.view_mut().into_dyn()),
            (PARAM_NAMES[7], self.classifier.bias.view_mut().into_dyn()),
        ]
    }

    /// Weight matrices carry the L2 penalty; biases do not.
    pub fn is_regularized(name: &str) -> bool {
        name.ends_with(".weight")
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Sum of squares of all weight matrices.
    pub fn weight_sq_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .filter(|(n, _)| Self::is_regularized(n))
            .map(|(_, t)| t.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }
}

/// Parameters of one model together with its configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub blocks: ParamBlocks,
}

impl ModelParams {
    pub fn zeros(config: ModelConfig) -> Self {
        Self {
            blocks: ParamBlocks::zeros(&config),
            config,
        }
    }

    /// Uniform Glorot weights and zero biases, deterministic per seed.
    pub fn init(config: ModelConfig, seed: u64) -> Self {
        let mut p = Self::zeros(config);
        let shapes: Vec<(usize, usize)> = p
            .blocks
            .tensors()
            .iter()
            .filter(|(n, _)| ParamBlocks::is_regularized(n))
            .map(|(_, t)| (t.shape()[0], t.shape()[1]))
            .collect();
        let mut drawn = init_params(seed, &shapes).into_iter();
        let b = &mut p.blocks;
        for w in [
            &mut b.sentence_conv.weight,
            &mut b.snippet_conv.weight,
            &mut b.highway.weight,
            &mut b.classifier.weight,
        ] {
            *w = drawn.next().unwrap().0;
        }
        p
    }

    pub fn arch(&self) -> Arch {
        self.config.arch
    }
}
