//! Terms and tokenization.

use serde::{Deserialize, Serialize};
use std::fmt;
use unicode_segmentation::UnicodeSegmentation;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("term `{0}` contains no word tokens")]
    Empty(String),
}

/// Split text into lowercased word tokens using Unicode word
/// segmentation. No stemming, no stop-word removal: counts stay
/// explainable and the brute-force oracle stays trivial.
pub fn tokenize(text: &str) -> Vec<String> {
    text.unicode_words().map(|w| w.to_lowercase()).collect()
}

/// A query term: a word or expression, held as its normalized token
/// sequence plus the original string for display.
///
/// Identity (equality, ordering, hashing) is defined on the normalized
/// tokens only, so `"New York"` and `"new  york"` are the same term.
#[derive(Debug, Clone)]
pub struct Term {
    tokens: Vec<String>,
    display: String,
}

impl Term {
    pub fn parse(input: &str) -> Result<Self, TermError> {
        let tokens = tokenize(input);
        if tokens.is_empty() {
            return Err(TermError::Empty(input.to_string()));
        }
        Ok(Term {
            tokens,
            display: input.to_string(),
        })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn display(&self) -> &str {
        &self.display
    }

    /// Canonical text form: normalized tokens joined by single spaces.
    /// Parsing this form again yields the same term.
    pub fn normalized(&self) -> String {
        self.tokens.join(" ")
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
    }
}

impl Eq for Term {}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.tokens.cmp(&other.tokens)
    }
}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.tokens.hash(state);
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.normalized())
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.normalized())
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Term::parse(&text).map_err(serde::de::Error::custom)
    }
}
