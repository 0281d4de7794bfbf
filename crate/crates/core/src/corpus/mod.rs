//! MCTest-style corpora: stories, questions with four candidates, and the
//! declarative statements used by the entailment architecture.

mod mctest;
mod question;
mod statements;
mod synth;

use serde::{Deserialize, Serialize};

pub use mctest::{parse_mctest, read_mctest, write_mctest, MctestFiles};
pub use question::{classify_question, QuestionClass};
pub use statements::{attach_statements, fallback_statement, synthesize_statements};
pub use synth::{synthesize_corpus, SynthItemInfo, SynthesizedCorpus};

use crate::error::{Error, Result};

pub type Tokens = Vec<String>;

pub const NUM_CANDIDATES: usize = 4;
pub const QUESTIONS_PER_STORY: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Story {
    pub id: String,
    pub sentences: Vec<Tokens>,
    pub raw_text: String,
}

impl Story {
    pub fn new(
        id: impl Into<String>,
        sentences: Vec<Tokens>,
        raw_text: impl Into<String>,
    ) -> Result<Self> {
        let id = id.into();
        if sentences.is_empty() {
            return Err(Error::Structure(format!("story {id} has no sentences")));
        }
        if sentences.iter().any(|s| s.is_empty()) {
            return Err(Error::Structure(format!(
                "story {id} has an empty sentence"
            )));
        }
        Ok(Self {
            id,
            sentences,
            raw_text: raw_text.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanLabel {
    One,
    Multiple,
}

impl SpanLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SpanLabel::One => "one",
            SpanLabel::Multiple => "multiple",
        }
    }
}

/// Four statements, index-aligned with the candidates of one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementSet {
    pub statements: [Tokens; NUM_CANDIDATES],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAItem {
    pub question: Tokens,
    pub span_label: SpanLabel,
    pub candidates: [Tokens; NUM_CANDIDATES],
    pub correct_index: usize,
    pub question_class: QuestionClass,
    pub statements: Option<StatementSet>,
}

impl QAItem {
    pub fn statement(&self, candidate: usize) -> Option<&Tokens> {
        self.statements.as_ref().map(|s| &s.statements[candidate])
    }
}

/// One story with its questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McItem {
    pub story: Story,
    pub questions: Vec<QAItem>,
}

/// Where the statements of a corpus came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatementSource {
    /// No statements attached.
    None,
    /// Read from a statements file.
    Provided,
    /// Built from question and candidate tokens; an approximation.
    Synthesized,
}

impl StatementSource {
    pub fn as_str(self) -> &'static str {
        match self {
            StatementSource::None => "none",
            StatementSource::Provided => "provided",
            StatementSource::Synthesized => "synthesized",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub items: Vec<McItem>,
    pub statement_source: StatementSource,
}

impl Corpus {
    pub fn new(items: Vec<McItem>) -> Self {
        Self {
            items,
            statement_source: StatementSource::None,
        }
    }

    pub fn num_questions(&self) -> usize {
        self.items.iter().map(|i| i.questions.len()).sum()
    }

    pub fn find(&self, id: &str) -> Option<&McItem> {
        self.items.iter().find(|i| i.story.id == id)
    }

    /// Splits off the first `n` items; the remainder keeps the statement source.
    pub fn split_at(&self, n: usize) -> (Corpus, Corpus) {
        let n = n.min(self.items.len());
        let head = Corpus {
            items: self.items[..n].to_vec(),
            statement_source: self.statement_source,
        };
        let tail = Corpus {
            items: self.items[n..].to_vec(),
            statement_source: self.statement_source,
        };
        (head, tail)
    }

    /// Serializes as line-delimited JSON records, one story per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            let record = CorpusRecord::from(item);
            out.push_str(&serde_json::to_string(&record).expect("corpus record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut items = Vec::new();
        let mut any_statements = false;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: CorpusRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            any_statements |= record.statements.is_some();
            items.push(record.into_item(i + 1)?);
        }
        let statement_source = if any_statements {
            StatementSource::Provided
        } else {
            StatementSource::None
        };
        Ok(Self {
            items,
            statement_source,
        })
    }
}

/// Flat on-disk shape of one story.
#[derive(Debug, Serialize, Deserialize)]
struct CorpusRecord {
    id: String,
    sentences: Vec<Tokens>,
    questions: Vec<Tokens>,
    spans: Vec<SpanLabel>,
    candidates: Vec<[Tokens; NUM_CANDIDATES]>,
    answers: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    statements: Option<Vec<[Tokens; NUM_CANDIDATES]>>,
}

impl From<&McItem> for CorpusRecord {
    fn from(item: &McItem) -> Self {
        let qs = &item.questions;
        let statements = if qs.iter().all(|q| q.statements.is_some()) && !qs.is_empty() {
            Some(
                qs.iter()
                    .map(|q| q.statements.clone().unwrap().statements)
                    .collect(),
            )
        } else {
            None
        };
        CorpusRecord {
            id: item.story.id.clone(),
            sentences: item.story.sentences.clone(),
            questions: qs.iter().map(|q| q.question.clone()).collect(),
            spans: qs.iter().map(|q| q.span_label).collect(),
            candidates: qs.iter().map(|q| q.candidates.clone()).collect(),
            answers: qs.iter().map(|q| q.correct_index).collect(),
            statements,
        }
    }
}

impl CorpusRecord {
    fn into_item(self, line: usize) -> Result<McItem> {
        let n = self.questions.len();
        let bad = |msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        if self.spans.len() != n || self.candidates.len() != n || self.answers.len() != n {
            return Err(bad("question, span, candidate and answer counts differ"));
        }
        if let Some(s) = &self.statements {
            if s.len() != n {
                return Err(bad("statement count differs from question count"));
            }
        }
        let raw_text = self
            .sentences
            .iter()
            .map(|s| s.join(" "))
            .collect::<Vec<_>>()
            .join(" ");
        let story = Story::new(self.id, self.sentences, raw_text)?;
        let mut questions = Vec::with_capacity(n);
        for (i, question) in self.questions.into_iter().enumerate() {
            if question.is_empty() {
                return Err(bad("empty question"));
            }
            if self.answers[i] >= NUM_CANDIDATES {
                return Err(bad("answer index out of range"));
            }
            questions.push(QAItem {
                question_class: classify_question(&question),
                question,
                span_label: self.spans[i],
                candidates: self.candidates[i].clone(),
                correct_index: self.answers[i],
                statements: self.statements.as_ref().map(|s| StatementSet {
                    statements: s[i].clone(),
                }),
            });
        }
        Ok(McItem { story, questions })
    }
}

const TERMINALS: [&str; 3] = [".", "!", "?"];
const CLOSERS: [&str; 6] = [".", "!", "?", "\"", "'", ")"];

/// Lowercases, splits on whitespace, and detaches leading and trailing
/// punctuation characters as single-character tokens.
pub fn tokenize(text: &str) -> Tokens {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let chars: Vec<char> = word.chars().collect();
        let start = chars.iter().position(|c| !c.is_ascii_punctuation());
        let Some(start) = start else {
            out.extend(chars.iter().map(|c| c.to_string()));
            continue;
        };
        let end = chars
            .iter()
            .rposition(|c| !c.is_ascii_punctuation())
            .unwrap()
            + 1;
        out.extend(chars[..start].iter().map(|c| c.to_string()));
        out.push(chars[start..end].iter().collect::<String>().to_lowercase());
        out.extend(chars[end..].iter().map(|c| c.to_string()));
    }
    out
}

/// Splits story text into tokenized sentences on the literal `\newline`
/// marker and on terminal punctuation.
pub fn split_sentences(text: &str) -> Vec<Tokens> {
    let text = text.replace("\\tab", " ");
    let mut sentences = Vec::new();
    for segment in text.split("\\newline") {
        let tokens = tokenize(segment);
        let mut current: Tokens = Vec::new();
        let mut closing = false;
        for tok in tokens {
            if closing && !CLOSERS.contains(&tok.as_str()) {
                sentences.push(std::mem::take(&mut current));
                closing = false;
            }
            if TERMINALS.contains(&tok.as_str()) {
                closing = true;
            }
            current.push(tok);
        }
        if !current.is_empty() {
            sentences.push(current);
        }
    }
    sentences
}
