use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::encoder::{DocFeatures, Projection, QueryTrace, SentenceTrace};
use super::{Arch, ModelParams};
use crate::corpus::{QAItem, Story, NUM_CANDIDATES};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::nn::cosine;

/// Attention weights and selections at both levels of one document encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionTrace {
    pub sentence_weights: Vec<f64>,
    pub sentence_selected: Vec<usize>,
    pub snippet_weights: Vec<f64>,
    pub snippet_selected: Vec<usize>,
}

impl AttentionTrace {
    fn from_projection(p: &Projection) -> Self {
        Self {
            sentence_weights: p.sentence_pool.weights.clone(),
            sentence_selected: p.sentence_pool.selected.clone(),
            snippet_weights: p.snippet_pool.weights.clone(),
            snippet_selected: p.snippet_pool.selected.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryEncoding {
    pub sentence: Array1<f64>,
    pub snippet: Array1<f64>,
    pub overall: Array1<f64>,
}

/// A document represented under one query's attention.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDoc {
    /// One column per sentence.
    pub sentence_reps: Array2<f64>,
    /// One column per snippet; `sentences + width − 1` columns.
    pub snippet_reps: Array2<f64>,
    pub v_s: Array1<f64>,
    pub v_t: Array1<f64>,
    pub v_o: Array1<f64>,
    pub trace: AttentionTrace,
}

/// A trained model bound to its word vectors.
#[derive(Debug, Clone, Copy)]
pub struct Habcnn<'a> {
    pub params: &'a ModelParams,
    pub table: &'a EmbeddingTable,
}

impl<'a> Habcnn<'a> {
    pub fn new(params: &'a ModelParams, table: &'a EmbeddingTable) -> Self {
        assert_eq!(
            params.config.embed_dim,
            table.dim(),
            "model expects {}-dim embeddings, table has {}",
            params.config.embed_dim,
            table.dim()
        );
        Self { params, table }
    }

    pub fn arch(&self) -> Arch {
        self.params.config.arch
    }

    pub fn encode_sentence(&self, tokens: &[String]) -> Array1<f64> {
        SentenceTrace::new(tokens, self.table, self.params)
            .pool
            .values
    }

    pub fn encode_query(&self, tokens: &[String]) -> QueryEncoding {
        let q = QueryTrace::new(tokens, self.table, self.params);
        QueryEncoding {
            sentence: q.sentence_rep().clone(),
            snippet: q.snippet_rep().clone(),
            overall: q.overall().clone(),
        }
    }

    pub fn encode_document(
        &self,
        story: &Story,
        query_sentence: ArrayView1<'_, f64>,
        query_snippet: ArrayView1<'_, f64>,
    ) -> EncodedDoc {
        let doc = DocFeatures::new(&story.sentences, self.table, self.params);
        let proj = Projection::new(&doc, query_sentence, query_snippet, self.params);
        EncodedDoc {
            trace: AttentionTrace::from_projection(&proj),
            v_s: proj.sentence_pool.pooled.clone(),
            v_t: proj.snippet_pool.pooled.clone(),
            v_o: proj.highway.combined,
            snippet_reps: doc.snippet_conv.output,
            sentence_reps: doc.sentence_reps,
        }
    }

    pub fn score_te(&self, story: &Story, statement: &[String]) -> f64 {
        let doc = DocFeatures::new(&story.sentences, self.table, self.params);
        let s = QueryTrace::new(statement, self.table, self.params);
        let proj = Projection::for_query(&doc, &s, self.params);
        cosine(s.overall().view(), proj.overall().view())
    }

    pub fn score_qp(&self, story: &Story, question: &[String], answer: &[String]) -> f64 {
        let doc = DocFeatures::new(&story.sentences, self.table, self.params);
        let q = QueryTrace::new(question, self.table, self.params);
        let a = QueryTrace::new(answer, self.table, self.params);
        let proj = Projection::for_query(&doc, &q, self.params);
        cosine(proj.overall().view(), a.overall().view())
    }

    pub fn score_qap(&self, story: &Story, question: &[String], answer: &[String]) -> f64 {
        let doc = DocFeatures::new(&story.sentences, self.table, self.params);
        let q = QueryTrace::new(question, self.table, self.params);
        let a = QueryTrace::new(answer, self.table, self.params);
        let pq = Projection::for_query(&doc, &q, self.params);
        let pa = Projection::for_query(&doc, &a, self.params);
        cosine(pq.overall().view(), pa.overall().view())
    }

    /// The query whose attention drives the document projection for a
    /// candidate: the statement under TE, the question under QP, the answer
    /// under QAP.
    pub fn attention_query<'q>(&self, qa: &'q QAItem, candidate: usize) -> Result<&'q [String]> {
        Ok(match self.arch() {
            Arch::Te => statement(qa, candidate)?,
            Arch::Qp => &qa.question,
            Arch::Qap => &qa.candidates[candidate],
        })
    }

    /// Scores all four candidates, sharing the document features.
    pub fn score_candidates(&self, story: &Story, qa: &QAItem) -> Result<[f64; NUM_CANDIDATES]> {
        let doc = DocFeatures::new(&story.sentences, self.table, self.params);
        let p = self.params;
        let mut scores = [0.0; NUM_CANDIDATES];
        match self.arch() {
            Arch::Te => {
                for (c, score) in scores.iter_mut().enumerate() {
                    let s = QueryTrace::new(statement(qa, c)?, self.table, p);
                    let proj = Projection::for_query(&doc, &s, p);
                    *score = cosine(s.overall().view(), proj.overall().view());
                }
            }
            Arch::Qp => {
                let q = QueryTrace::new(&qa.question, self.table, p);
                let pq = Projection::for_query(&doc, &q, p);
                for (c, score) in scores.iter_mut().enumerate() {
                    let a = QueryTrace::new(&qa.candidates[c], self.table, p);
                    *score = cosine(pq.overall().view(), a.overall().view());
                }
            }
            Arch::Qap => {
                let q = QueryTrace::new(&qa.question, self.table, p);
                let pq = Projection::for_query(&doc, &q, p);
                for (c, score) in scores.iter_mut().enumerate() {
                    let a = QueryTrace::new(&qa.candidates[c], self.table, p);
                    let pa = Projection::for_query(&doc, &a, p);
                    *score = cosine(pq.overall().view(), pa.overall().view());
                }
            }
        }
        Ok(scores)
    }

    /// Attention trace of the document under the query for `candidate`.
    pub fn attention_trace(
        &self,
        story: &Story,
        qa: &QAItem,
        candidate: usize,
    ) -> Result<AttentionTrace> {
        let query = self.attention_query(qa, candidate)?;
        let enc = self.encode_query(query);
        Ok(self
            .encode_document(story, enc.sentence.view(), enc.snippet.view())
            .trace)
    }
}

pub(crate) fn statement(qa: &QAItem, candidate: usize) -> Result<&[String]> {
    qa.statement(candidate)
        .map(|s| s.as_slice())
        .ok_or_else(|| Error::Config("entailment scoring needs statements; none attached".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, QuestionClass, SpanLabel};
    use crate::models::ModelConfig;
    use crate::nn::{max_pool_columns, wide_convolution};

    fn table() -> EmbeddingTable {
        let rows = [
            "jimmy", "knocked", "grandpa", "answered", "the", "door", ".", "why", "did", "?",
            "insects",
        ]
        .iter()
        .enumerate()
        .map(|(i, t)| {
            (
                t.to_string(),
                (0..6)
                    .map(|j| (((i * 7 + j * 3) % 11) as f64 - 5.0) / 5.0)
                    .collect(),
            )
        })
        .collect::<Vec<_>>();
        EmbeddingTable::from_rows(6, rows)
    }

    fn config(arch: Arch) -> ModelConfig {
        ModelConfig {
            arch,
            embed_dim: 6,
            hidden: 8,
            sentence_width: 2,
            snippet_width: 2,
            k_sentence: 1,
            k_snippet: 3,
        }
    }

    fn story(text: &str) -> Story {
        Story::new("s", crate::corpus::split_sentences(text), text).unwrap()
    }

    fn qa(statements: bool) -> QAItem {
        let candidates: [Vec<String>; 4] = std::array::from_fn(|c| {
            tokenize(["jimmy", "the door", "insects", "grandpa knocked"][c])
        });
        let question = tokenize("Why did grandpa answer the door?");
        let st = statements.then(|| crate::corpus::StatementSet {
            statements: std::array::from_fn(|c| {
                crate::corpus::fallback_statement(&question, &candidates[c])
            }),
        });
        QAItem {
            question,
            span_label: SpanLabel::One,
            candidates,
            correct_index: 0,
            question_class: QuestionClass::Why,
            statements: st,
        }
    }

    #[test]
    fn sentence_encoding_shape_and_oov() {
        let p = ModelParams::init(config(Arch::Te), 1);
        let t = table();
        let m = Habcnn::new(&p, &t);
        assert_eq!(m.encode_sentence(&tokenize("jimmy")).len(), 8);
        let direct = max_pool_columns(
            wide_convolution(
                t.embed_sentence(&tokenize("jimmy")).view(),
                &p.blocks.sentence_conv,
            )
            .view(),
        );
        assert_eq!(m.encode_sentence(&tokenize("jimmy")), direct);
        // zero biases: an all-OOV sentence encodes to zero
        assert!(m
            .encode_sentence(&tokenize("zz yy"))
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn degenerate_query_overall_is_half_sentence() {
        let mut p = ModelParams::init(config(Arch::Te), 2);
        p.blocks.snippet_conv.weight.fill(0.0);
        p.blocks.highway.weight.fill(0.0);
        let t = table();
        let m = Habcnn::new(&p, &t);
        let q = m.encode_query(&tokenize("grandpa answered the door"));
        assert_eq!(q.snippet, Array1::<f64>::zeros(8));
        for (o, s) in q.overall.iter().zip(q.sentence.iter()) {
            assert!((o - s / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn one_sentence_story_two_snippets() {
        let p = ModelParams::init(config(Arch::Te), 3);
        let t = table();
        let m = Habcnn::new(&p, &t);
        let q = m.encode_query(&tokenize("jimmy knocked"));
        let d = m.encode_document(
            &story("Grandpa answered the door."),
            q.sentence.view(),
            q.snippet.view(),
        );
        assert_eq!(d.snippet_reps.ncols(), 2);
        assert_eq!(d.trace.snippet_weights.len(), 2);
        assert_eq!(d.trace.sentence_selected, vec![0]);
    }

    #[test]
    fn large_k_is_plain_max_pool() {
        let mut c = config(Arch::Te);
        c.k_sentence = 10;
        let p = ModelParams::init(c, 4);
        let t = table();
        let m = Habcnn::new(&p, &t);
        let q = m.encode_query(&tokenize("jimmy knocked"));
        let d = m.encode_document(
            &story("Jimmy knocked. Grandpa answered the door. Insects."),
            q.sentence.view(),
            q.snippet.view(),
        );
        assert_eq!(d.v_s, max_pool_columns(d.sentence_reps.view()));
        assert_eq!(d.snippet_reps.ncols(), 4);
    }

    #[test]
    fn identical_statement_scores_one() {
        let mut p = ModelParams::init(config(Arch::Te), 5);
        p.blocks.highway.weight.fill(0.0);
        let t = table();
        let m = Habcnn::new(&p, &t);
        let s = tokenize("Grandpa answered the door.");
        let score = m.score_te(&story("Grandpa answered the door."), &s);
        assert!((score - 1.0).abs() < 1e-12, "{score}");
    }

    #[test]
    fn scores_in_range_and_candidate_pure() {
        let t = table();
        let st = story("Jimmy knocked. Grandpa answered the door. Insects.");
        for arch in Arch::ALL {
            let p = ModelParams::init(config(arch), 6);
            let m = Habcnn::new(&p, &t);
            let item = qa(true);
            let scores = m.score_candidates(&st, &item).unwrap();
            assert!(scores.iter().all(|s| (-1.0..=1.0).contains(s)));
            let mut swapped = item.clone();
            swapped.candidates.swap(1, 2);
            if let Some(s) = swapped.statements.as_mut() {
                s.statements.swap(1, 2);
            }
            let s2 = m.score_candidates(&st, &swapped).unwrap();
            assert_eq!((s2[1], s2[2]), (scores[2], scores[1]));
            assert_eq!((s2[0], s2[3]), (scores[0], scores[3]));
            // batched scoring agrees with the single-candidate entry points
            let single = match arch {
                Arch::Te => m.score_te(&st, item.statement(3).unwrap()),
                Arch::Qp => m.score_qp(&st, &item.question, &item.candidates[3]),
                Arch::Qap => m.score_qap(&st, &item.question, &item.candidates[3]),
            };
            assert_eq!(single, scores[3]);
        }
    }

    #[test]
    fn degenerate_params_tie() {
        let t = table();
        let st = story("Jimmy knocked. Grandpa answered the door.");
        for arch in Arch::ALL {
            let p = ModelParams::zeros(config(arch));
            let m = Habcnn::new(&p, &t);
            let scores = m.score_candidates(&st, &qa(true)).unwrap();
            assert!(scores.iter().all(|&s| s == scores[0]), "{arch}: {scores:?}");
        }
    }

    #[test]
    fn te_without_statements_is_error() {
        let p = ModelParams::init(config(Arch::Te), 1);
        let t = table();
        let m = Habcnn::new(&p, &t);
        assert!(matches!(
            m.score_candidates(&story("Jimmy knocked."), &qa(false)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn sentence_order_leaves_v_s_unchanged() {
        let p = ModelParams::init(config(Arch::Te), 8);
        let t = table();
        let m = Habcnn::new(&p, &t);
        let q = m.encode_query(&tokenize("grandpa answered"));
        let a = m.encode_document(
            &story("Jimmy knocked. Grandpa answered the door. Insects."),
            q.sentence.view(),
            q.snippet.view(),
        );
        let b = m.encode_document(
            &story("Insects. Jimmy knocked. Grandpa answered the door."),
            q.sentence.view(),
            q.snippet.view(),
        );
        let mut w = a.trace.sentence_weights.clone();
        w.sort_by(f64::total_cmp);
        assert!(w.windows(2).all(|x| x[0] != x[1]));
        assert_eq!(a.v_s, b.v_s);
    }
}
