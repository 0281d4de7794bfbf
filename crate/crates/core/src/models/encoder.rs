//! Forward passes that keep what their backward passes need.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use super::{ModelParams, ParamBlocks};
use crate::embeddings::EmbeddingTable;
use crate::nn::{
    attention_pool, conv_forward, highway_backward, highway_combine, max_pool_forward,
    pool_backward, AttentionPool, ConvCache, HighwayOutput, MaxPool,
};

/// Sentence-CNN followed by max-pooling.
pub(crate) struct SentenceTrace {
    pub conv: ConvCache,
    pub pool: MaxPool,
}

impl SentenceTrace {
    pub fn new(tokens: &[String], table: &EmbeddingTable, params: &ModelParams) -> Self {
        let input = table.embed_sentence(tokens);
        let conv = conv_forward(input.view(), &params.blocks.sentence_conv);
        let pool = max_pool_forward(conv.output.view());
        Self { conv, pool }
    }

    pub fn rep(&self) -> &Array1<f64> {
        &self.pool.values
    }

    /// Embeddings are frozen, so only the convolution parameters receive gradient.
    pub fn backward(
        &self,
        params: &ModelParams,
        upstream: ArrayView1<'_, f64>,
        grads: &mut ParamBlocks,
    ) {
        let mut g = Array2::zeros(self.conv.output.dim());
        pool_backward(&self.pool.argmax, upstream, &mut g);
        let layer = &params.blocks.sentence_conv;
        let gl = &mut grads.sentence_conv;
        self.conv
            .backward_into(layer, g.view(), &mut gl.weight, &mut gl.bias, false);
    }

    pub fn record(&self, out: &mut Vec<usize>) {
        out.extend_from_slice(&self.pool.argmax);
    }
}

/// A query (question, answer or statement) encoded as a one-sentence document.
pub(crate) struct QueryTrace {
    pub sentence: SentenceTrace,
    pub snippet_conv: ConvCache,
    pub snippet_pool: MaxPool,
    pub highway: HighwayOutput,
}

impl QueryTrace {
    pub fn new(tokens: &[String], table: &EmbeddingTable, params: &ModelParams) -> Self {
        let sentence = SentenceTrace::new(tokens, table, params);
        let column = sentence.rep().view().insert_axis(Axis(1));
        let snippet_conv = conv_forward(column, &params.blocks.snippet_conv);
        let snippet_pool = max_pool_forward(snippet_conv.output.view());
        let highway = highway_combine(
            sentence.rep().view(),
            snippet_pool.values.view(),
            &params.blocks.highway,
        );
        Self {
            sentence,
            snippet_conv,
            snippet_pool,
            highway,
        }
    }

    pub fn sentence_rep(&self) -> &Array1<f64> {
        self.sentence.rep()
    }

    pub fn snippet_rep(&self) -> &Array1<f64> {
        &self.snippet_pool.values
    }

    pub fn overall(&self) -> &Array1<f64> {
        &self.highway.combined
    }

    /// Backward from a gradient on the overall representation.
    pub fn backward(
        &self,
        params: &ModelParams,
        upstream: ArrayView1<'_, f64>,
        grads: &mut ParamBlocks,
    ) {
        let b = &params.blocks;
        let hg = highway_backward(
            self.sentence_rep().view(),
            self.snippet_rep().view(),
            &b.highway,
            self.highway.gate.view(),
            upstream,
        );
        grads.highway.weight += &hg.weight;
        grads.highway.bias += &hg.bias;

        let mut g_snip = Array2::zeros(self.snippet_conv.output.dim());
        pool_backward(&self.snippet_pool.argmax, hg.snippet.view(), &mut g_snip);
        let gl = &mut grads.snippet_conv;
        let g_col = self
            .snippet_conv
            .backward_into(
                &b.snippet_conv,
                g_snip.view(),
                &mut gl.weight,
                &mut gl.bias,
                true,
            )
            .unwrap();
        let g_sentence = hg.sentence + g_col.column(0);
        self.sentence.backward(params, g_sentence.view(), grads);
    }

    pub fn record(&self, out: &mut Vec<usize>) {
        self.sentence.record(out);
        out.extend_from_slice(&self.snippet_pool.argmax);
    }
}

/// Query-independent part of a document encoding: sentence representations
/// and the snippet-CNN over them.
pub(crate) struct DocFeatures {
    pub sentences: Vec<SentenceTrace>,
    /// `hidden × n_sentences`
    pub sentence_reps: Array2<f64>,
    pub snippet_conv: ConvCache,
}

impl DocFeatures {
    pub fn new(sentences: &[Vec<String>], table: &EmbeddingTable, params: &ModelParams) -> Self {
        assert!(!sentences.is_empty(), "document has no sentences");
        let sentences: Vec<SentenceTrace> = sentences
            .iter()
            .map(|s| SentenceTrace::new(s, table, params))
            .collect();
        let mut reps = Array2::zeros((params.config.hidden, sentences.len()));
        for (j, s) in sentences.iter().enumerate() {
            reps.column_mut(j).assign(s.rep());
        }
        let snippet_conv = conv_forward(reps.view(), &params.blocks.snippet_conv);
        Self {
            sentences,
            sentence_reps: reps,
            snippet_conv,
        }
    }

    pub fn snippet_reps(&self) -> &Array2<f64> {
        &self.snippet_conv.output
    }

    pub fn zero_grads(&self) -> DocGrads {
        DocGrads {
            sentence_reps: Array2::zeros(self.sentence_reps.dim()),
            snippet_reps: Array2::zeros(self.snippet_conv.output.dim()),
        }
    }

    pub fn backward(&self, params: &ModelParams, upstream: DocGrads, grads: &mut ParamBlocks) {
        let gl = &mut grads.snippet_conv;
        let g_from_snippets = self
            .snippet_conv
            .backward_into(
                &params.blocks.snippet_conv,
                upstream.snippet_reps.view(),
                &mut gl.weight,
                &mut gl.bias,
                true,
            )
            .unwrap();
        let g_reps = upstream.sentence_reps + &g_from_snippets;
        for (j, s) in self.sentences.iter().enumerate() {
            s.backward(params, g_reps.column(j), grads);
        }
    }

    pub fn record(&self, out: &mut Vec<usize>) {
        for s in &self.sentences {
            s.record(out);
        }
    }
}

/// Gradients on the document feature maps, accumulated across projections.
pub(crate) struct DocGrads {
    pub sentence_reps: Array2<f64>,
    pub snippet_reps: Array2<f64>,
}

/// The document seen through one query's attention.
pub(crate) struct Projection {
    pub sentence_pool: AttentionPool,
    pub snippet_pool: AttentionPool,
    pub highway: HighwayOutput,
}

impl Projection {
    pub fn new(
        doc: &DocFeatures,
        query_sentence: ArrayView1<'_, f64>,
        query_snippet: ArrayView1<'_, f64>,
        params: &ModelParams,
    ) -> Self {
        let c = &params.config;
        let sentence_pool = attention_pool(query_sentence, doc.sentence_reps.view(), c.k_sentence);
        let snippet_pool = attention_pool(query_snippet, doc.snippet_reps().view(), c.k_snippet);
        let highway = highway_combine(
            sentence_pool.pooled.view(),
            snippet_pool.pooled.view(),
            &params.blocks.highway,
        );
        Self {
            sentence_pool,
            snippet_pool,
            highway,
        }
    }

    pub fn for_query(doc: &DocFeatures, query: &QueryTrace, params: &ModelParams) -> Self {
        Self::new(
            doc,
            query.sentence_rep().view(),
            query.snippet_rep().view(),
            params,
        )
    }

    pub fn overall(&self) -> &Array1<f64> {
        &self.highway.combined
    }

    /// Backward from a gradient on `v_o`. Attention weights only select, so
    /// nothing flows back into the query.
    pub fn backward(
        &self,
        params: &ModelParams,
        upstream: ArrayView1<'_, f64>,
        doc_grads: &mut DocGrads,
        grads: &mut ParamBlocks,
    ) {
        let hg = highway_backward(
            self.sentence_pool.pooled.view(),
            self.snippet_pool.pooled.view(),
            &params.blocks.highway,
            self.highway.gate.view(),
            upstream,
        );
        grads.highway.weight += &hg.weight;
        grads.highway.bias += &hg.bias;
        pool_backward(
            &self.sentence_pool.argmax,
            hg.sentence.view(),
            &mut doc_grads.sentence_reps,
        );
        pool_backward(
            &self.snippet_pool.argmax,
            hg.snippet.view(),
            &mut doc_grads.snippet_reps,
        );
    }

    pub fn record(&self, out: &mut Vec<usize>) {
        out.extend_from_slice(&self.sentence_pool.selected);
        out.extend_from_slice(&self.sentence_pool.argmax);
        out.extend_from_slice(&self.snippet_pool.selected);
        out.extend_from_slice(&self.snippet_pool.argmax);
    }
}
