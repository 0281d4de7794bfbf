//! Hierarchical attention-based convolutional networks for multiple-choice
//! reading comprehension.
//!
//! A story is encoded bottom-up: a sentence-CNN with max-pooling turns words
//! into sentence vectors, a snippet-CNN turns runs of sentences into snippet
//! vectors, and at both levels the query keeps only its top-k most similar
//! items before max-pooling. A highway gate mixes the two levels. Three
//! architectures compare queries and documents differently (see
//! [`models::Arch`]); all train with a max-margin ranking loss plus a
//! question-type classifier, using AdaGrad.

pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod models;
pub mod nn;
pub mod training;

#[cfg(test)]
pub(crate) mod testutil;

pub use corpus::{Corpus, McItem, QAItem, Story};
pub use embeddings::EmbeddingTable;
pub use error::{Error, Result};
pub use eval::{evaluate, EvalReport, Scorer};
pub use models::{Arch, Habcnn, ModelConfig, ModelParams};
pub use training::{train, HyperParams};
