//! The MCTest TSV release format.
//!
//! A story line has 23 tab-separated fields: id, properties, story text, then
//! four groups of (question, A, B, C, D). Story newlines are the literal
//! `\newline`. Each question starts with `one: ` or `multiple: `. The answer
//! file has one line per story with four letters.

use std::fs;
use std::path::Path;

use super::{
    classify_question, split_sentences, tokenize, Corpus, McItem, QAItem, SpanLabel, Story, Tokens,
    NUM_CANDIDATES, QUESTIONS_PER_STORY,
};
use crate::error::{Error, Result};

const FIELDS_PER_LINE: usize = 3 + QUESTIONS_PER_STORY * (1 + NUM_CANDIDATES);

fn parse_question(field: &str, line: usize) -> Result<(SpanLabel, Tokens)> {
    let field = field.trim_start();
    let (label, rest) = if let Some(rest) = field.strip_prefix("one:") {
        (SpanLabel::One, rest)
    } else if let Some(rest) = field.strip_prefix("multiple:") {
        (SpanLabel::Multiple, rest)
    } else {
        return Err(Error::Parse {
            line,
            msg: format!("question lacks one:/multiple: prefix: {field:?}"),
        });
    };
    let tokens = tokenize(rest);
    if tokens.is_empty() {
        return Err(Error::Parse {
            line,
            msg: "empty question".into(),
        });
    }
    Ok((label, tokens))
}

fn answer_index(letter: &str, line: usize) -> Result<usize> {
    match letter.trim() {
        "A" => Ok(0),
        "B" => Ok(1),
        "C" => Ok(2),
        "D" => Ok(3),
        other => Err(Error::Parse {
            line,
            msg: format!("unknown answer letter {other:?}"),
        }),
    }
}

/// Parses a story file and its answer file. Question classes are assigned
/// with [`classify_question`]; statements are left unset.
pub fn parse_mctest(story_file: &str, answer_file: &str) -> Result<Vec<McItem>> {
    let story_lines: Vec<(usize, &str)> = story_file
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();
    let answer_lines: Vec<(usize, &str)> = answer_file
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();
    if story_lines.len() != answer_lines.len() {
        return Err(Error::Structure(format!(
            "story file has {} lines but answer file has {}",
            story_lines.len(),
            answer_lines.len()
        )));
    }

    let mut items = Vec::with_capacity(story_lines.len());
    for (&(line, text), &(aline, answers)) in story_lines.iter().zip(&answer_lines) {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != FIELDS_PER_LINE {
            return Err(Error::Parse {
                line,
                msg: format!(
                    "expected {FIELDS_PER_LINE} tab-separated fields, found {}",
                    fields.len()
                ),
            });
        }
        let letters: Vec<&str> = answers
            .split('\t')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        if letters.len() != QUESTIONS_PER_STORY {
            return Err(Error::Parse {
                line: aline,
                msg: format!(
                    "expected {QUESTIONS_PER_STORY} answers, found {}",
                    letters.len()
                ),
            });
        }

        let id = fields[0].trim().to_string();
        let raw_text = fields[2].to_string();
        let sentences = split_sentences(&raw_text);
        let story = Story::new(id, sentences, raw_text).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;

        let mut questions = Vec::with_capacity(QUESTIONS_PER_STORY);
        for (q, letter) in letters.iter().enumerate() {
            let base = 3 + q * (1 + NUM_CANDIDATES);
            let (span_label, question) = parse_question(fields[base], line)?;
            let candidates: [Tokens; NUM_CANDIDATES] =
                std::array::from_fn(|c| tokenize(fields[base + 1 + c]));
            if candidates.iter().any(|c| c.is_empty()) {
                return Err(Error::Parse {
                    line,
                    msg: format!("question {q} has an empty candidate"),
                });
            }
            questions.push(QAItem {
                question_class: classify_question(&question),
                question,
                span_label,
                candidates,
                correct_index: answer_index(letter, aline)?,
                statements: None,
            });
        }
        items.push(McItem { story, questions });
    }
    Ok(items)
}

/// Reads and parses a story/answer file pair.
pub fn read_mctest(stories: &Path, answers: &Path) -> Result<Corpus> {
    let s = fs::read_to_string(stories)?;
    let a = fs::read_to_string(answers)?;
    Ok(Corpus::new(parse_mctest(&s, &a)?))
}

/// Text of the three files describing a corpus in MCTest layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MctestFiles {
    pub stories: String,
    pub answers: String,
    /// Flat statements TSV; empty when the corpus has no statements.
    pub statements: String,
}

/// Writes a corpus in MCTest layout. Tokens are joined with single spaces,
/// which re-tokenizes to the same sequences.
pub fn write_mctest(corpus: &Corpus) -> MctestFiles {
    let mut stories = String::new();
    let mut answers = String::new();
    let mut statements = String::new();
    for item in &corpus.items {
        let story_text = item
            .story
            .sentences
            .iter()
            .map(|s| s.join(" "))
            .collect::<Vec<_>>()
            .join("\\newline");
        let mut fields = vec![item.story.id.clone(), "synthetic".to_string(), story_text];
        let mut letters = Vec::new();
        for (qi, q) in item.questions.iter().enumerate() {
            fields.push(format!(
                "{}: {}",
                q.span_label.as_str(),
                q.question.join(" ")
            ));
            fields.extend(q.candidates.iter().map(|c| c.join(" ")));
            letters.push(["A", "B", "C", "D"][q.correct_index]);
            if let Some(set) = &q.statements {
                for (ci, s) in set.statements.iter().enumerate() {
                    statements.push_str(&format!(
                        "{}\t{}\t{}\t{}\n",
                        item.story.id,
                        qi,
                        ci,
                        s.join(" ")
                    ));
                }
            }
        }
        stories.push_str(&fields.join("\t"));
        stories.push('\n');
        answers.push_str(&letters.join("\t"));
        answers.push('\n');
    }
    MctestFiles {
        stories,
        answers,
        statements,
    }
}
