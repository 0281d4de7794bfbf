//! Seeded synthetic corpora with a planted answer keyword.
//!
//! Every story sentence reads `the <entity> <verb> the <object> .` with
//! entities, verbs and objects unique within a story. A question names the
//! entity and verb of one sentence; the correct candidate is that sentence's
//! object, and the three distractors are objects absent from the story.

use std::fmt::Write as _;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    classify_question, statements::synthesize_statements, Corpus, McItem, QAItem, SpanLabel, Story,
    Tokens, NUM_CANDIDATES, QUESTIONS_PER_STORY,
};

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";
const WH: [&str; 6] = ["what", "which", "who", "where", "why", "how"];
const FUNCTION_WORDS: [&str; 4] = ["the", "did", ".", "?"];

fn content_word(i: usize) -> String {
    let syllables = CONSONANTS.len() * VOWELS.len();
    let mut word = String::new();
    let mut n = i;
    for _ in 0..2 {
        let s = n % syllables;
        word.push(CONSONANTS[s / VOWELS.len()] as char);
        word.push(VOWELS[s % VOWELS.len()] as char);
        n /= syllables;
    }
    // Large vocabularies get a third syllable instead of colliding.
    if n > 0 {
        let s = (n - 1) % syllables;
        word.push(CONSONANTS[s / VOWELS.len()] as char);
        word.push(VOWELS[s % VOWELS.len()] as char);
    }
    word
}

/// Where the answer of each question was planted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthItemInfo {
    /// Index of the planted sentence per question.
    pub planted_sentence: [usize; QUESTIONS_PER_STORY],
    /// The correct candidate's object word per question.
    pub keyword: [String; QUESTIONS_PER_STORY],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedCorpus {
    pub corpus: Corpus,
    pub info: Vec<SynthItemInfo>,
    /// Every token the generator can emit.
    pub vocabulary: Vec<String>,
}

impl SynthesizedCorpus {
    /// A GloVe-style text file with seeded uniform(-1, 1) vectors covering
    /// the whole vocabulary.
    pub fn embedding_file(&self, dim: usize, seed: u64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_e4be_dd00_0000);
        let mut out = String::new();
        for token in &self.vocabulary {
            out.push_str(token);
            for _ in 0..dim {
                let v: f64 = rng.random_range(-1.0..1.0);
                write!(out, " {v:.6}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn toks(words: &[&str]) -> Tokens {
    words.iter().map(|w| w.to_string()).collect()
}

/// Builds a deterministic corpus of `n_items` stories over `vocab_size`
/// content words (at least 20), with fallback statements attached.
pub fn synthesize_corpus(seed: u64, n_items: usize, vocab_size: usize) -> SynthesizedCorpus {
    assert!(n_items >= 1, "n_items must be at least 1");
    assert!(vocab_size >= 20, "vocab_size must be at least 20");

    let words: Vec<String> = (0..vocab_size).map(content_word).collect();
    let third = vocab_size / 3;
    let entities = &words[..third];
    let verbs = &words[third..2 * third];
    let objects = &words[2 * third..];
    let max_sentences = 6
        .min(entities.len())
        .min(verbs.len())
        .min(objects.len() - (NUM_CANDIDATES - 1));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(n_items);
    let mut info = Vec::with_capacity(n_items);
    for i in 0..n_items {
        let n_sent = rng.random_range(3..=max_sentences);
        let ents: Vec<&String> = entities.choose_multiple(&mut rng, n_sent).collect();
        let vbs: Vec<&String> = verbs.choose_multiple(&mut rng, n_sent).collect();
        let mut objs: Vec<&String> = objects.iter().collect();
        objs.shuffle(&mut rng);
        let (story_objs, spare) = objs.split_at(n_sent);

        let sentences: Vec<Tokens> = (0..n_sent)
            .map(|s| toks(&["the", ents[s], vbs[s], "the", story_objs[s], "."]))
            .collect();
        let raw_text = sentences
            .iter()
            .map(|s| s.join(" "))
            .collect::<Vec<_>>()
            .join(" ");
        let story =
            Story::new(format!("synth.{seed}.{i}"), sentences, raw_text).expect("non-empty story");

        let mut planted = [0; QUESTIONS_PER_STORY];
        let mut keyword: [String; QUESTIONS_PER_STORY] = Default::default();
        let mut questions = Vec::with_capacity(QUESTIONS_PER_STORY);
        for q in 0..QUESTIONS_PER_STORY {
            let j = rng.random_range(0..n_sent);
            let wh = *WH.choose(&mut rng).unwrap();
            let question = toks(&[wh, "did", "the", ents[j], vbs[j], "?"]);
            let correct_index = rng.random_range(0..NUM_CANDIDATES);
            let mut distractors = spare.choose_multiple(&mut rng, NUM_CANDIDATES - 1);
            let candidates: [Tokens; NUM_CANDIDATES] = std::array::from_fn(|c| {
                let obj = if c == correct_index {
                    story_objs[j]
                } else {
                    *distractors.next().unwrap()
                };
                toks(&["the", obj])
            });
            let span_label = if rng.random_bool(0.5) {
                SpanLabel::One
            } else {
                SpanLabel::Multiple
            };
            planted[q] = j;
            keyword[q] = story_objs[j].clone();
            questions.push(QAItem {
                question_class: classify_question(&question),
                question,
                span_label,
                candidates,
                correct_index,
                statements: None,
            });
        }
        items.push(McItem { story, questions });
        info.push(SynthItemInfo {
            planted_sentence: planted,
            keyword,
        });
    }

    let mut corpus = Corpus::new(items);
    synthesize_statements(&mut corpus);

    let mut vocabulary: Vec<String> = FUNCTION_WORDS
        .iter()
        .chain(WH.iter())
        .map(|w| w.to_string())
        .collect();
    vocabulary.extend(words);
    SynthesizedCorpus {
        corpus,
        info,
        vocabulary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn content_words_are_distinct() {
        let words: HashSet<String> = (0..5000).map(content_word).collect();
        assert_eq!(words.len(), 5000);
        for w in FUNCTION_WORDS.iter().chain(WH.iter()) {
            assert!(!words.contains(*w));
        }
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let a = synthesize_corpus(7, 20, 50);
        let b = synthesize_corpus(7, 20, 50);
        assert_eq!(a.corpus.to_jsonl(), b.corpus.to_jsonl());
        assert_eq!(a.embedding_file(50, 7), b.embedding_file(50, 7));
    }

    #[test]
    fn different_seeds_differ() {
        let a = synthesize_corpus(7, 20, 50).corpus.to_jsonl();
        let b = synthesize_corpus(8, 20, 50).corpus.to_jsonl();
        assert_ne!(a, b);
    }

    #[test]
    fn planted_keyword_in_exactly_one_sentence() {
        for seed in 0..5 {
            let s = synthesize_corpus(seed, 30, 20);
            for (item, info) in s.corpus.items.iter().zip(&s.info) {
                for (q, qa) in item.questions.iter().enumerate() {
                    let correct = &qa.candidates[qa.correct_index];
                    let kw = &info.keyword[q];
                    assert!(correct.contains(kw));
                    let hits: Vec<usize> = item
                        .story
                        .sentences
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.contains(kw))
                        .map(|(i, _)| i)
                        .collect();
                    assert_eq!(hits, vec![info.planted_sentence[q]]);
                    for (c, cand) in qa.candidates.iter().enumerate() {
                        if c != qa.correct_index {
                            let obj = &cand[1];
                            assert!(item.story.sentences.iter().all(|s| !s.contains(obj)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn vocabulary_covers_corpus() {
        let s = synthesize_corpus(3, 10, 40);
        let vocab: HashSet<&String> = s.vocabulary.iter().collect();
        for item in &s.corpus.items {
            for sent in &item.story.sentences {
                assert!(sent.iter().all(|t| vocab.contains(t)));
            }
            for q in &item.questions {
                assert!(q.question.iter().all(|t| vocab.contains(t)));
                assert!(q
                    .statements
                    .as_ref()
                    .unwrap()
                    .statements
                    .iter()
                    .flatten()
                    .all(|t| vocab.contains(t)));
            }
        }
    }
}
