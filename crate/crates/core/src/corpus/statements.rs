use std::collections::HashMap;

use super::{tokenize, Corpus, StatementSet, StatementSource, Tokens, NUM_CANDIDATES};
use crate::error::{Error, MissingStatement, Result};

const WH_WORDS: [&str; 10] = [
    "how", "what", "who", "where", "which", "when", "whose", "why", "will", "whom",
];

/// Attaches statements from a flat TSV: `item_id \t question \t candidate \t text`.
///
/// Every (item, question, candidate) triple in the corpus must be covered;
/// otherwise a coverage error lists all gaps. Lines for unknown items are
/// ignored. A repeated triple keeps the last line.
pub fn attach_statements(corpus: &mut Corpus, statements_file: &str) -> Result<()> {
    let mut table: HashMap<(String, usize, usize), Tokens> = HashMap::new();
    for (i, line) in statements_file.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.splitn(4, '\t').collect();
        let bad = |msg: String| Error::Parse { line: i + 1, msg };
        if parts.len() != 4 {
            return Err(bad(format!(
                "expected 4 tab-separated fields, found {}",
                parts.len()
            )));
        }
        let q: usize = parts[1]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad question index {:?}", parts[1])))?;
        let c: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad candidate index {:?}", parts[2])))?;
        if c >= NUM_CANDIDATES {
            return Err(bad(format!("candidate index {c} out of range")));
        }
        let tokens = tokenize(parts[3]);
        if tokens.is_empty() {
            return Err(bad("empty statement".into()));
        }
        table.insert((parts[0].trim().to_string(), q, c), tokens);
    }

    let mut missing = Vec::new();
    for item in &corpus.items {
        for q in 0..item.questions.len() {
            for c in 0..NUM_CANDIDATES {
                if !table.contains_key(&(item.story.id.clone(), q, c)) {
                    missing.push(MissingStatement {
                        item_id: item.story.id.clone(),
                        question: q,
                        candidate: c,
                    });
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Coverage(missing));
    }

    for item in &mut corpus.items {
        let id = item.story.id.clone();
        for (q, qa) in item.questions.iter_mut().enumerate() {
            let statements = std::array::from_fn(|c| table.remove(&(id.clone(), q, c)).unwrap());
            qa.statements = Some(StatementSet { statements });
        }
    }
    corpus.statement_source = StatementSource::Provided;
    Ok(())
}

/// Approximate statement: the question without its leading wh-word,
/// followed by the candidate.
pub fn fallback_statement(question: &[String], candidate: &[String]) -> Tokens {
    let skip = usize::from(
        question
            .first()
            .is_some_and(|w| WH_WORDS.contains(&w.as_str())),
    );
    let mut out: Tokens = question[skip..].to_vec();
    out.extend(candidate.iter().cloned());
    out
}

/// Fills every question lacking statements with [`fallback_statement`]s and
/// marks the corpus as synthesized.
pub fn synthesize_statements(corpus: &mut Corpus) {
    let mut any = false;
    for item in &mut corpus.items {
        for qa in &mut item.questions {
            if qa.statements.is_none() {
                let statements =
                    std::array::from_fn(|c| fallback_statement(&qa.question, &qa.candidates[c]));
                qa.statements = Some(StatementSet { statements });
                any = true;
            }
        }
    }
    if any {
        corpus.statement_source = StatementSource::Synthesized;
    }
}
