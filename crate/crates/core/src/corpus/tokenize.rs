use serde::{Deserialize, Serialize};

/// Ordered words of one document.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub source_id: String,
}

impl TokenSequence {
    pub fn new(source_id: impl Into<String>, tokens: Vec<String>) -> Self {
        Self {
            tokens,
            source_id: source_id.into(),
        }
    }

    pub fn from_words<S: AsRef<str>>(source_id: impl Into<String>, words: &[S]) -> Self {
        Self::new(source_id, words.iter().map(|w| w.as_ref().to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Appends the tokens of `other`, keeping this sequence's id.
    pub fn concat(mut self, other: &TokenSequence) -> Self {
        self.tokens.extend(other.tokens.iter().cloned());
        self
    }
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}'
                ..='\u{201F}'
                    | '\u{2026}'
                    | '\u{2013}'
                    | '\u{2014}'
                    | '\u{00AB}'
                    | '\u{00BB}'
                    | '\u{00BF}'
                    | '\u{00A1}'
        )
}

/// Lowercases, splits on whitespace, and strips leading/trailing punctuation
/// from each token. Tokens that become empty are dropped.
pub fn tokenize(text: &str) -> TokenSequence {
    tokenize_with_id(text, "")
}

pub fn tokenize_with_id(text: &str, source_id: impl Into<String>) -> TokenSequence {
    let tokens = text
        .split_whitespace()
        .map(|raw| raw.trim_matches(is_punct).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect();
    TokenSequence::new(source_id, tokens)
}
