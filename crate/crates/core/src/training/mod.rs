//! Max-margin ranking training with an auxiliary question-type loss.

mod adagrad;
pub mod gradcheck;
mod trainer;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

pub use adagrad::{adagrad_update, AdaGradState, ADAGRAD_EPS};
pub use trainer::{train, EpochRecord, TrainOutcome};

use crate::corpus::{McItem, QAItem, QuestionClass, NUM_CANDIDATES};
use crate::embeddings::EmbeddingTable;
use crate::error::Result;
use crate::models::encoder::{DocFeatures, Projection, QueryTrace};
use crate::models::{Arch, ModelParams, ParamBlocks};
use crate::nn::{cosine, cosine_backward, softmax_backward, softmax_classify};

/// How the three negatives of a question are turned into loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossStyle {
    /// One example per (positive, negative) pair.
    PerNegative,
    /// One example per question with a hinge term for each negative.
    Grouped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub k_sentence: usize,
    pub k_snippet: usize,
    pub lr: f64,
    pub hidden: usize,
    pub batch_size: usize,
    pub sentence_width: usize,
    pub snippet_width: usize,
    pub l2: f64,
    pub margin: f64,
    /// Weight of the question-type loss.
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub loss_style: LossStyle,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            k_sentence: 1,
            k_snippet: 3,
            lr: 0.05,
            hidden: 90,
            batch_size: 1,
            sentence_width: 2,
            snippet_width: 2,
            l2: 0.0065,
            margin: 0.2,
            lambda: 1.0,
            epochs: 50,
            seed: 1,
            loss_style: LossStyle::PerNegative,
        }
    }
}

impl HyperParams {
    pub fn model_config(&self, arch: Arch, embed_dim: usize) -> crate::models::ModelConfig {
        crate::models::ModelConfig {
            arch,
            embed_dim,
            hidden: self.hidden,
            sentence_width: self.sentence_width,
            snippet_width: self.snippet_width,
            k_sentence: self.k_sentence,
            k_snippet: self.k_snippet,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(crate::error::Error::Config(m.to_string()));
        if self.k_sentence == 0 || self.k_snippet == 0 {
            return bad("k values must be at least 1");
        }
        if self.hidden == 0 || self.sentence_width == 0 || self.snippet_width == 0 {
            return bad("layer sizes must be positive");
        }
        if self.batch_size != 1 {
            return bad("only batch size 1 is supported");
        }
        if self.lr.is_nan()
            || self.lr <= 0.0
            || self.l2 < 0.0
            || self.margin < 0.0
            || self.lambda < 0.0
        {
            return bad("lr must be positive and l2, margin, lambda non-negative");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        Ok(())
    }

    /// Header entries recorded alongside a checkpoint.
    pub fn metadata(&self) -> Vec<(String, String)> {
        vec![
            ("seed".into(), self.seed.to_string()),
            ("lr".into(), self.lr.to_string()),
            ("l2".into(), self.l2.to_string()),
            ("margin".into(), self.margin.to_string()),
            ("lambda".into(), self.lambda.to_string()),
            ("epochs".into(), self.epochs.to_string()),
            ("batch_size".into(), self.batch_size.to_string()),
            (
                "loss_style".into(),
                serde_json::to_value(self.loss_style)
                    .unwrap()
                    .as_str()
                    .unwrap()
                    .to_string(),
            ),
        ]
    }
}

/// One ranking example: a question with one positive and one negative candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainExample {
    pub item: usize,
    pub question: usize,
    pub positive: usize,
    pub negative: usize,
    pub question_class: QuestionClass,
}

/// One example per distractor, each repeating the correct candidate.
pub fn expand_examples(
    item: usize,
    question: usize,
    qa: &QAItem,
) -> [TrainExample; NUM_CANDIDATES - 1] {
    let mut negatives = (0..NUM_CANDIDATES).filter(|&c| c != qa.correct_index);
    std::array::from_fn(|_| TrainExample {
        item,
        question,
        positive: qa.correct_index,
        negative: negatives.next().unwrap(),
        question_class: qa.question_class,
    })
}

/// `max(0, margin + s_neg − s_pos)`.
pub fn ranking_loss(s_pos: f64, s_neg: f64, margin: f64) -> f64 {
    (margin - (s_pos - s_neg)).max(0.0)
}

/// Loss breakdown and gradients of one update.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub total: f64,
    pub ranking: f64,
    pub classification: f64,
    pub l2: f64,
    pub grads: ParamBlocks,
    /// Every discrete choice the forward pass made (pooling winners,
    /// attention selections, active hinges). Unchanged under a perturbation
    /// means the loss is smooth along it.
    pub decisions: Vec<usize>,
}

/// Total loss of one example and its gradient.
pub fn step_loss(
    item: &McItem,
    example: &TrainExample,
    table: &EmbeddingTable,
    params: &ModelParams,
    hp: &HyperParams,
) -> Result<(f64, ParamBlocks)> {
    let r = loss_and_grad(
        item,
        example.question,
        example.positive,
        &[example.negative],
        table,
        params,
        hp,
    )?;
    Ok((r.total, r.grads))
}

/// Ranking loss of `positive` against each of `negatives` plus the
/// question-type and L2 terms.
pub fn loss_and_grad(
    item: &McItem,
    question: usize,
    positive: usize,
    negatives: &[usize],
    table: &EmbeddingTable,
    params: &ModelParams,
    hp: &HyperParams,
) -> Result<StepResult> {
    let qa = &item.questions[question];
    let mut grads = params.blocks.zeros_like();
    let mut decisions = Vec::new();
    let doc = DocFeatures::new(&item.story.sentences, table, params);
    doc.record(&mut decisions);
    let mut doc_grads = doc.zero_grads();
    let question_trace = QueryTrace::new(&qa.question, table, params);
    question_trace.record(&mut decisions);

    let mut candidates = vec![positive];
    candidates.extend_from_slice(negatives);

    // Per-candidate forward state and score.
    enum Side {
        Te {
            statement: Box<QueryTrace>,
            proj: Box<Projection>,
        },
        Qp {
            answer: Box<QueryTrace>,
        },
        Qap {
            proj: Box<Projection>,
        },
    }
    let shared_proj = match params.config.arch {
        Arch::Qp | Arch::Qap => Some(Projection::for_query(&doc, &question_trace, params)),
        Arch::Te => None,
    };
    if let Some(p) = &shared_proj {
        p.record(&mut decisions);
    }
    let mut sides = Vec::with_capacity(candidates.len());
    let mut scores = Vec::with_capacity(candidates.len());
    for &c in &candidates {
        let (side, score) = match params.config.arch {
            Arch::Te => {
                let statement =
                    QueryTrace::new(crate::models::habcnn_statement(qa, c)?, table, params);
                let proj = Projection::for_query(&doc, &statement, params);
                statement.record(&mut decisions);
                proj.record(&mut decisions);
                let s = cosine(statement.overall().view(), proj.overall().view());
                (
                    Side::Te {
                        statement: Box::new(statement),
                        proj: Box::new(proj),
                    },
                    s,
                )
            }
            Arch::Qp => {
                let answer = QueryTrace::new(&qa.candidates[c], table, params);
                answer.record(&mut decisions);
                let s = cosine(
                    shared_proj.as_ref().unwrap().overall().view(),
                    answer.overall().view(),
                );
                (
                    Side::Qp {
                        answer: Box::new(answer),
                    },
                    s,
                )
            }
            Arch::Qap => {
                let answer = QueryTrace::new(&qa.candidates[c], table, params);
                let proj = Projection::for_query(&doc, &answer, params);
                proj.record(&mut decisions);
                let s = cosine(
                    shared_proj.as_ref().unwrap().overall().view(),
                    proj.overall().view(),
                );
                (
                    Side::Qap {
                        proj: Box::new(proj),
                    },
                    s,
                )
            }
        };
        sides.push(side);
        scores.push(score);
    }

    // d(loss)/d(score) per candidate
    let mut dscore = vec![0.0; candidates.len()];
    let mut ranking = 0.0;
    for n in 1..candidates.len() {
        let l = ranking_loss(scores[0], scores[n], hp.margin);
        let active = l > 0.0;
        decisions.push(usize::from(active));
        if active {
            ranking += l;
            dscore[0] -= 1.0;
            dscore[n] += 1.0;
        }
    }

    let mut g_shared = Array1::zeros(params.config.hidden);
    for (side, &ds) in sides.iter().zip(&dscore) {
        if ds == 0.0 {
            continue;
        }
        match side {
            Side::Te { statement, proj } => {
                let (g_r, g_vo) =
                    cosine_backward(statement.overall().view(), proj.overall().view(), ds);
                statement.backward(params, g_r.view(), &mut grads);
                proj.backward(params, g_vo.view(), &mut doc_grads, &mut grads);
            }
            Side::Qp { answer } => {
                let shared = shared_proj.as_ref().unwrap();
                let (g_vo, g_r) =
                    cosine_backward(shared.overall().view(), answer.overall().view(), ds);
                g_shared += &g_vo;
                answer.backward(params, g_r.view(), &mut grads);
            }
            Side::Qap { proj } => {
                let shared = shared_proj.as_ref().unwrap();
                let (g_voq, g_voa) =
                    cosine_backward(shared.overall().view(), proj.overall().view(), ds);
                g_shared += &g_voq;
                proj.backward(params, g_voa.view(), &mut doc_grads, &mut grads);
            }
        }
    }
    if let Some(shared) = &shared_proj {
        shared.backward(params, g_shared.view(), &mut doc_grads, &mut grads);
    }

    let class = qa.question_class.index();
    let cls = softmax_classify(
        question_trace.overall().view(),
        &params.blocks.classifier,
        class,
    );
    let classification = hp.lambda * cls.loss;
    if hp.lambda != 0.0 {
        let g = softmax_backward(
            question_trace.overall().view(),
            &params.blocks.classifier,
            cls.probs.view(),
            class,
            hp.lambda,
        );
        grads.classifier.weight += &g.weight;
        grads.classifier.bias += &g.bias;
        question_trace.backward(params, g.input.view(), &mut grads);
    }

    doc.backward(params, doc_grads, &mut grads);

    let l2 = 0.5 * hp.l2 * params.blocks.weight_sq_norm();
    if hp.l2 != 0.0 {
        for ((name, mut g), (_, w)) in grads.tensors_mut().into_iter().zip(params.blocks.tensors())
        {
            if ParamBlocks::is_regularized(name) {
                g.scaled_add(hp.l2, &w);
            }
        }
    }

    Ok(StepResult {
        total: ranking + classification + l2,
        ranking,
        classification,
        l2,
        grads,
        decisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthesize_corpus, QuestionClass, SpanLabel, Tokens};

    fn qa(correct: usize) -> QAItem {
        QAItem {
            question: vec!["why".into()],
            span_label: SpanLabel::One,
            candidates: std::array::from_fn(|c| vec![format!("c{c}")] as Tokens),
            correct_index: correct,
            question_class: QuestionClass::Why,
            statements: None,
        }
    }

    #[test]
    fn three_examples_per_question() {
        for correct in 0..4 {
            let ex = expand_examples(2, 1, &qa(correct));
            assert_eq!(ex.len(), 3);
            assert!(ex
                .iter()
                .all(|e| e.positive == correct && e.item == 2 && e.question == 1));
            let mut neg: Vec<usize> = ex.iter().map(|e| e.negative).collect();
            neg.sort_unstable();
            let expected: Vec<usize> = (0..4).filter(|&c| c != correct).collect();
            assert_eq!(neg, expected);
        }
    }

    #[test]
    fn ranking_loss_examples() {
        assert_eq!(ranking_loss(0.9, 0.3, 0.2), 0.0);
        assert!((ranking_loss(0.5, 0.5, 0.2) - 0.2).abs() < 1e-15);
        assert!((ranking_loss(0.4, 0.6, 0.2) - 0.4).abs() < 1e-15);
    }

    fn setup(arch: Arch) -> (McItem, EmbeddingTable, ModelParams, HyperParams) {
        let synth = synthesize_corpus(11, 1, 30);
        let table = EmbeddingTable::parse(&synth.embedding_file(6, 11)).unwrap();
        let hp = HyperParams {
            hidden: 5,
            ..HyperParams::default()
        };
        let params = ModelParams::init(hp.model_config(arch, 6), 4);
        (synth.corpus.items[0].clone(), table, params, hp)
    }

    #[test]
    fn lambda_zero_leaves_classifier_untouched() {
        let (item, table, params, mut hp) = setup(Arch::Te);
        hp.lambda = 0.0;
        hp.l2 = 0.0;
        let ex = expand_examples(0, 0, &item.questions[0])[0];
        let (total, grads) = step_loss(&item, &ex, &table, &params, &hp).unwrap();
        assert!(grads.classifier.weight.iter().all(|&g| g == 0.0));
        assert!(grads.classifier.bias.iter().all(|&g| g == 0.0));
        let mut other = params.clone();
        other.blocks.classifier.weight.fill(3.0);
        let (total2, _) = step_loss(&item, &ex, &table, &other, &hp).unwrap();
        assert_eq!(total, total2);
    }

    #[test]
    fn satisfied_margin_and_saturated_classifier_leave_l2() {
        let (item, table, mut params, mut hp) = setup(Arch::Te);
        hp.margin = 0.0;
        let qa = &item.questions[0];
        params.blocks.classifier.bias[qa.question_class.index()] = 60.0;
        let scores = crate::models::Habcnn::new(&params, &table)
            .score_candidates(&item.story, qa)
            .unwrap();
        // pick a negative the positive already beats
        let neg = (0..4).find(|&c| c != qa.correct_index && scores[c] <= scores[qa.correct_index]);
        let Some(neg) = neg else { return };
        let r = loss_and_grad(&item, 0, qa.correct_index, &[neg], &table, &params, &hp).unwrap();
        assert_eq!(r.ranking, 0.0);
        assert!(r.classification < 1e-12);
        assert!((r.total - 0.5 * hp.l2 * params.blocks.weight_sq_norm()).abs() < 1e-12);
    }

    #[test]
    fn grouped_loss_sums_pairwise_terms() {
        for arch in Arch::ALL {
            let (item, table, params, mut hp) = setup(arch);
            hp.lambda = 0.0;
            hp.l2 = 0.0;
            hp.margin = 1.5;
            let qa = &item.questions[1];
            let negs: Vec<usize> = (0..4).filter(|&c| c != qa.correct_index).collect();
            let grouped =
                loss_and_grad(&item, 1, qa.correct_index, &negs, &table, &params, &hp).unwrap();
            let mut sum = 0.0;
            let mut gsum = params.blocks.zeros_like();
            for &n in &negs {
                let r =
                    loss_and_grad(&item, 1, qa.correct_index, &[n], &table, &params, &hp).unwrap();
                sum += r.total;
                for ((_, mut a), (_, b)) in gsum.tensors_mut().into_iter().zip(r.grads.tensors()) {
                    a += &b;
                }
            }
            assert!((grouped.total - sum).abs() < 1e-12);
            for ((_, a), (_, b)) in gsum.tensors().iter().zip(grouped.grads.tensors().iter()) {
                for (x, y) in a.iter().zip(b.iter()) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }
}
