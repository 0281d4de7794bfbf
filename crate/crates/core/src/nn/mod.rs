//! Differentiable kernels with hand-written backward passes.
//!
//! Matrices hold one item per column: a sentence is `d × s`, a feature map of
//! sentence representations is `d1 × n`.

mod classifier;
mod conv;
mod cosine;
mod highway;
mod init;
mod pool;

pub use classifier::{
    softmax_backward, softmax_classify, Classification, ClassifierGrads, ClassifierHead,
};
pub use conv::{conv_backward, conv_forward, wide_convolution, ConvCache, ConvGrads, ConvLayer};
pub use cosine::{cosine, cosine_backward, COSINE_EPS};
pub use highway::{
    highway_backward, highway_combine, sigmoid, HighwayGrads, HighwayLayer, HighwayOutput,
};
pub use init::{init_params, xavier_uniform};
pub use pool::{
    attention_pool, max_pool_backward, max_pool_columns, max_pool_forward, pool_backward,
    AttentionPool, MaxPool,
};
