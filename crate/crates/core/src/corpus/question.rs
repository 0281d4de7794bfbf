use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Question type used by the auxiliary classification task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionClass {
    How,
    HowMuch,
    HowMany,
    What,
    Who,
    Where,
    Which,
    When,
    Whose,
    Why,
    Will,
    Other,
}

impl QuestionClass {
    pub const COUNT: usize = 12;

    pub const ALL: [QuestionClass; Self::COUNT] = [
        QuestionClass::How,
        QuestionClass::HowMuch,
        QuestionClass::HowMany,
        QuestionClass::What,
        QuestionClass::Who,
        QuestionClass::Where,
        QuestionClass::Which,
        QuestionClass::When,
        QuestionClass::Whose,
        QuestionClass::Why,
        QuestionClass::Will,
        QuestionClass::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QuestionClass::How => "how",
            QuestionClass::HowMuch => "how_much",
            QuestionClass::HowMany => "how_many",
            QuestionClass::What => "what",
            QuestionClass::Who => "who",
            QuestionClass::Where => "where",
            QuestionClass::Which => "which",
            QuestionClass::When => "when",
            QuestionClass::Whose => "whose",
            QuestionClass::Why => "why",
            QuestionClass::Will => "will",
            QuestionClass::Other => "other",
        }
    }
}

impl fmt::Display for QuestionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QuestionClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown question class {s:?}"))
    }
}

fn normalize(token: &str) -> String {
    token
        .trim_matches(|c: char| c.is_ascii_punctuation())
        .to_lowercase()
}

fn single_keyword(word: &str) -> Option<QuestionClass> {
    Some(match word {
        "how" => QuestionClass::How,
        "what" => QuestionClass::What,
        "who" => QuestionClass::Who,
        "where" => QuestionClass::Where,
        "which" => QuestionClass::Which,
        "when" => QuestionClass::When,
        "whose" => QuestionClass::Whose,
        "why" => QuestionClass::Why,
        "will" => QuestionClass::Will,
        _ => return None,
    })
}

/// Assigns a question class by keyword. The earliest keyword wins; at the
/// same position `how much` / `how many` beat `how`.
pub fn classify_question(tokens: &[String]) -> QuestionClass {
    let words: Vec<String> = tokens
        .iter()
        .map(|t| normalize(t))
        .filter(|w| !w.is_empty())
        .collect();
    for (i, word) in words.iter().enumerate() {
        let Some(class) = single_keyword(word) else {
            continue;
        };
        if class == QuestionClass::How {
            match words.get(i + 1).map(String::as_str) {
                Some("much") => return QuestionClass::HowMuch,
                Some("many") => return QuestionClass::HowMany,
                _ => {}
            }
        }
        return class;
    }
    QuestionClass::Other
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use proptest::prelude::*;

    fn classify(s: &str) -> QuestionClass {
        classify_question(&tokenize(s))
    }

    #[test]
    fn specific_beats_general() {
        assert_eq!(
            classify("How much money did she have?"),
            QuestionClass::HowMuch
        );
        assert_eq!(
            classify("How many rooms did I say I checked?"),
            QuestionClass::HowMany
        );
        assert_eq!(classify("How did he get there?"), QuestionClass::How);
    }

    #[test]
    fn earliest_keyword_wins() {
        assert_eq!(
            classify("Why did Grandpa answer the door?"),
            QuestionClass::Why
        );
        assert_eq!(
            classify("What did Jimmy see when he arrived?"),
            QuestionClass::What
        );
        assert_eq!(
            classify("Jimmy went where after school?"),
            QuestionClass::Where
        );
        assert_eq!(
            classify("After dinner, who will wash up?"),
            QuestionClass::Who
        );
    }

    #[test]
    fn no_keyword_is_other() {
        assert_eq!(classify("Name the insect."), QuestionClass::Other);
        assert_eq!(classify("Somehow, it worked"), QuestionClass::Other);
    }

    #[test]
    fn exactly_twelve_classes() {
        assert_eq!(QuestionClass::ALL.len(), 12);
        for (i, c) in QuestionClass::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(c.as_str().parse::<QuestionClass>().unwrap(), *c);
        }
    }

    proptest! {
        #[test]
        fn stable_under_trailing_punctuation(
            words in prop::collection::vec(
                prop::sample::select(vec!["how", "much", "many", "what", "who", "the", "dog", "why", "will", "ran", "which"]),
                1..8),
            punct in prop::sample::select(vec!["?", ".", "!", "?!"]),
        ) {
            let plain: Vec<String> = words.iter().map(|w| w.to_string()).collect();
            let mut with = plain.clone();
            with.push(punct.to_string());
            prop_assert_eq!(classify_question(&plain), classify_question(&with));
            let glued = format!("{}{}", words.join(" "), punct);
            prop_assert_eq!(classify_question(&plain), classify(&glued));
        }
    }
}
