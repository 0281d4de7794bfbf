//! Bag-of-vectors baselines built from summed word embeddings.

use ndarray::Array1;

use crate::corpus::{Story, Tokens, NUM_CANDIDATES};
use crate::embeddings::EmbeddingTable;
use crate::nn::cosine;

/// Cosine between the summed question and summed candidate vectors. The
/// document is ignored.
pub fn baseline_addition(
    table: &EmbeddingTable,
    question: &[String],
    candidates: &[Tokens; NUM_CANDIDATES],
) -> [f64; NUM_CANDIDATES] {
    let q = table.sum_vector(question);
    std::array::from_fn(|c| cosine(q.view(), table.sum_vector(&candidates[c]).view()))
}

fn best_sentence(target: &Array1<f64>, sentences: &[Array1<f64>]) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, s) in sentences.iter().enumerate() {
        let score = cosine(target.view(), s.view());
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

/// Index of the document sentence closest to the question, and to each
/// candidate. Ties prefer the earlier sentence.
pub fn addition_proj_selection(
    table: &EmbeddingTable,
    story: &Story,
    question: &[String],
    candidates: &[Tokens; NUM_CANDIDATES],
) -> (usize, [usize; NUM_CANDIDATES]) {
    assert!(!story.sentences.is_empty(), "document has no sentences");
    let sentences: Vec<Array1<f64>> = story
        .sentences
        .iter()
        .map(|s| table.sum_vector(s))
        .collect();
    let sq = best_sentence(&table.sum_vector(question), &sentences);
    let sa = std::array::from_fn(|c| best_sentence(&table.sum_vector(&candidates[c]), &sentences));
    (sq, sa)
}

/// Cosine between the document sentence matched by the question and the one
/// matched by each candidate.
pub fn baseline_addition_proj(
    table: &EmbeddingTable,
    story: &Story,
    question: &[String],
    candidates: &[Tokens; NUM_CANDIDATES],
) -> [f64; NUM_CANDIDATES] {
    let (sq, sa) = addition_proj_selection(table, story, question, candidates);
    let vq = table.sum_vector(&story.sentences[sq]);
    std::array::from_fn(|c| cosine(vq.view(), table.sum_vector(&story.sentences[sa[c]]).view()))
}

#[derive(Debug, Clone, Copy)]
pub struct Addition<'a> {
    pub table: &'a EmbeddingTable,
}

#[derive(Debug, Clone, Copy)]
pub struct AdditionProj<'a> {
    pub table: &'a EmbeddingTable,
}
