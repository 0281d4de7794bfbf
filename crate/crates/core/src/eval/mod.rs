//! Accuracy and NDCG over four ranked candidates, with one/multiple
//! breakdowns, and attention-trace export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, McItem, QAItem, SpanLabel, Story, NUM_CANDIDATES};
use crate::error::{Error, Result};
use crate::models::{baseline_addition, baseline_addition_proj, Addition, AdditionProj, Habcnn};

/// Anything that scores the four candidates of a question.
pub trait Scorer {
    fn score(&self, story: &Story, qa: &QAItem) -> Result<[f64; NUM_CANDIDATES]>;
}

impl Scorer for Habcnn<'_> {
    fn score(&self, story: &Story, qa: &QAItem) -> Result<[f64; NUM_CANDIDATES]> {
        self.score_candidates(story, qa)
    }
}

impl Scorer for Addition<'_> {
    fn score(&self, _story: &Story, qa: &QAItem) -> Result<[f64; NUM_CANDIDATES]> {
        Ok(baseline_addition(self.table, &qa.question, &qa.candidates))
    }
}

impl Scorer for AdditionProj<'_> {
    fn score(&self, story: &Story, qa: &QAItem) -> Result<[f64; NUM_CANDIDATES]> {
        Ok(baseline_addition_proj(
            self.table,
            story,
            &qa.question,
            &qa.candidates,
        ))
    }
}

/// Highest-scoring candidate; the lowest index wins ties.
pub fn predict(scores: &[f64; NUM_CANDIDATES]) -> usize {
    let mut best = 0;
    for c in 1..NUM_CANDIDATES {
        if scores[c] > scores[best] {
            best = c;
        }
    }
    best
}

/// 1-based rank of `gold` when candidates are sorted by descending score,
/// ties broken by index.
pub fn rank_of(scores: &[f64; NUM_CANDIDATES], gold: usize) -> usize {
    1 + (0..NUM_CANDIDATES)
        .filter(|&c| {
            c != gold && (scores[c] > scores[gold] || (scores[c] == scores[gold] && c < gold))
        })
        .count()
}

/// `1 / log2(rank + 1)` for the single relevant candidate.
pub fn ndcg4(scores: &[f64; NUM_CANDIDATES], gold: usize) -> f64 {
    assert!(gold < NUM_CANDIDATES, "gold index out of range");
    1.0 / ((rank_of(scores, gold) + 1) as f64).log2()
}

/// Fraction of `(predicted, gold)` pairs that agree.
pub fn accuracy(predictions: &[(usize, usize)]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::UndefinedMetric(
            "accuracy of an empty prediction list",
        ));
    }
    let hits = predictions.iter().filter(|(p, g)| p == g).count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// A metric over one-sentence, multiple-sentence and all questions.
/// `None` marks a group with no questions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub one: Option<f64>,
    pub mul: Option<f64>,
    pub all: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAccuracy {
    pub n: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionOutcome {
    pub item_id: String,
    pub question: usize,
    pub span: SpanLabel,
    pub scores: [f64; NUM_CANDIDATES],
    pub predicted: usize,
    pub gold: usize,
    pub ndcg4: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_items: usize,
    pub n_questions: usize,
    pub acc: Breakdown,
    #[serde(rename = "ndcg4")]
    pub ndcg4: Breakdown,
    pub per_class: BTreeMap<String, ClassAccuracy>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl EvalReport {
    pub fn from_outcomes(
        n_items: usize,
        outcomes: &[QuestionOutcome],
        classes: &[crate::corpus::QuestionClass],
    ) -> Self {
        let mean = |pred: &dyn Fn(&QuestionOutcome) -> bool,
                    val: &dyn Fn(&QuestionOutcome) -> f64| {
            let v: Vec<f64> = outcomes.iter().filter(|o| pred(o)).map(val).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        let hit = |o: &QuestionOutcome| if o.predicted == o.gold { 1.0 } else { 0.0 };
        let ndcg = |o: &QuestionOutcome| o.ndcg4;
        let one = |o: &QuestionOutcome| o.span == SpanLabel::One;
        let mul = |o: &QuestionOutcome| o.span == SpanLabel::Multiple;
        let all = |_: &QuestionOutcome| true;

        let mut per_class: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        for (o, c) in outcomes.iter().zip(classes) {
            let e = per_class.entry(c.as_str().to_string()).or_default();
            e.0 += 1;
            e.1 += usize::from(o.predicted == o.gold);
        }
        EvalReport {
            n_items,
            n_questions: outcomes.len(),
            acc: Breakdown {
                one: mean(&one, &hit),
                mul: mean(&mul, &hit),
                all: mean(&all, &hit),
            },
            ndcg4: Breakdown {
                one: mean(&one, &ndcg),
                mul: mean(&mul, &ndcg),
                all: mean(&all, &ndcg),
            },
            per_class: per_class
                .into_iter()
                .map(|(k, (n, h))| {
                    (
                        k,
                        ClassAccuracy {
                            n,
                            accuracy: h as f64 / n as f64,
                        },
                    )
                })
                .collect(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap() + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Two-row table: acc and NDCG4, each with one / mul / all columns (percent).
    pub fn to_table(&self) -> String {
        let cell = |v: Option<f64>| {
            v.map_or_else(|| "  -- ".to_string(), |v| format!("{:5.1}", 100.0 * v))
        };
        let mut out = String::new();
        writeln!(out, "{:<6} {:>5} {:>5} {:>5}", "", "one", "mul", "all").unwrap();
        for (name, b) in [("acc", &self.acc), ("NDCG4", &self.ndcg4)] {
            writeln!(
                out,
                "{:<6} {} {} {}",
                name,
                cell(b.one),
                cell(b.mul),
                cell(b.all)
            )
            .unwrap();
        }
        writeln!(
            out,
            "({} questions over {} items)",
            self.n_questions, self.n_items
        )
        .unwrap();
        out
    }
}

/// Scores every question of a split.
pub fn evaluate_detailed(model: &dyn Scorer, split: &Corpus) -> Result<Vec<QuestionOutcome>> {
    let mut out = Vec::with_capacity(split.num_questions());
    for item in &split.items {
        for (q, qa) in item.questions.iter().enumerate() {
            let scores = model.score(&item.story, qa)?;
            out.push(QuestionOutcome {
                item_id: item.story.id.clone(),
                question: q,
                span: qa.span_label,
                predicted: predict(&scores),
                gold: qa.correct_index,
                ndcg4: ndcg4(&scores, qa.correct_index),
                scores,
            });
        }
    }
    Ok(out)
}

pub fn evaluate(model: &dyn Scorer, split: &Corpus) -> Result<EvalReport> {
    let outcomes = evaluate_detailed(model, split)?;
    if outcomes.is_empty() {
        return Err(Error::UndefinedMetric("evaluation split has no questions"));
    }
    let classes: Vec<_> = split
        .items
        .iter()
        .flat_map(|i| i.questions.iter().map(|q| q.question_class))
        .collect();
    let mut report = EvalReport::from_outcomes(split.items.len(), &outcomes, &classes);
    report
        .metadata
        .insert("statements".into(), split.statement_source.as_str().into());
    Ok(report)
}

pub const TRACE_TEXT_LIMIT: usize = 60;

/// One attention weight in an exported trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub item_id: String,
    pub question: usize,
    pub candidate: usize,
    pub level: TraceLevel,
    pub index: usize,
    pub weight: f64,
    pub selected: bool,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceLevel {
    Sentence,
    Snippet,
}

/// Shortens to at most `limit` characters, ending in `…` when cut.
pub fn truncate_text(text: &str, limit: usize) -> String {
    if text.chars().count() <= limit {
        return text.to_string();
    }
    let mut s: String = text.chars().take(limit - 1).collect();
    s.push('…');
    s
}

/// Sentence- and snippet-level attention of the document under the query
/// belonging to `candidate`.
pub fn export_attention(
    model: &Habcnn<'_>,
    item: &McItem,
    question: usize,
    candidate: usize,
) -> Result<Vec<TraceRecord>> {
    let qa = item.questions.get(question).ok_or_else(|| {
        Error::Config(format!("item {} has no question {question}", item.story.id))
    })?;
    let trace = model.attention_trace(&item.story, qa, candidate)?;
    let sentences: Vec<String> = item.story.sentences.iter().map(|s| s.join(" ")).collect();
    let width = model.params.config.snippet_width;
    let mk = |level, index, weight, selected: &[usize], text: String| TraceRecord {
        item_id: item.story.id.clone(),
        question,
        candidate,
        level,
        index,
        weight,
        selected: selected.contains(&index),
        text: truncate_text(&text, TRACE_TEXT_LIMIT),
    };
    let mut out = Vec::new();
    for (i, &w) in trace.sentence_weights.iter().enumerate() {
        out.push(mk(
            TraceLevel::Sentence,
            i,
            w,
            &trace.sentence_selected,
            sentences[i].clone(),
        ));
    }
    for (t, &w) in trace.snippet_weights.iter().enumerate() {
        // snippet t spans sentences t-width+1 ..= t
        let lo = (t + 1).saturating_sub(width);
        let hi = t.min(sentences.len() - 1);
        let text = sentences[lo..=hi].join(" ");
        out.push(mk(TraceLevel::Snippet, t, w, &trace.snippet_selected, text));
    }
    Ok(out)
}

pub fn trace_to_jsonl(records: &[TraceRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).unwrap() + "\n")
        .collect()
}
