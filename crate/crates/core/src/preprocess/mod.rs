//! Narrative preprocessing: lowercasing, tokenization, stopword filtering,
//! and Porter stemming.
//!
//! The fixed order of operations is: Unicode lowercase → tokenize as maximal
//! alphabetic runs (digits, punctuation, and apostrophes all separate, so
//! "don't" tokenizes as "don" + "t") → drop tokens shorter than
//! `min_token_length` → drop stopwords, checked against the raw token → stem
//! → drop stopwords again, checked against the stem. The second check stops
//! stems of stopwords ("being" → "be") from re-entering the vocabulary.

pub mod porter;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub use porter::stem;

/// Redaction artifacts of the public complaint export ("XX/XX/2015" and
/// friends) always act as stopwords.
pub const DEFAULT_MASKING: &[&str] = &["xx", "xxxx", "xxxxxxxx"];

const DEFAULT_GENERIC_LIST: &str = include_str!("../../data/stopwords_english.txt");

/// The three stop sets plus the pre-stemming length gate.
///
/// Construction validates that every member term is lowercase and purely
/// alphabetic; an uppercase or hyphenated entry in a stopword file would
/// otherwise never match any token and hide a configuration mistake.
#[derive(Debug, Clone)]
pub struct StopwordPolicy {
    generic: HashSet<String>,
    domain: HashSet<String>,
    masking: HashSet<String>,
    pub min_token_length: usize,
}

impl StopwordPolicy {
    pub fn new(generic: HashSet<String>, domain: HashSet<String>) -> Result<Self> {
        let masking = DEFAULT_MASKING.iter().map(|s| s.to_string()).collect();
        let policy = StopwordPolicy {
            generic,
            domain,
            masking,
            min_token_length: 2,
        };
        policy.validate()?;
        Ok(policy)
    }

    /// The shipped generic English list, no domain list.
    pub fn default_english() -> Self {
        let generic = parse_stopword_list(DEFAULT_GENERIC_LIST);
        StopwordPolicy::new(generic.into_iter().collect(), HashSet::new())
            .expect("shipped stopword list is valid")
    }

    /// An empty policy (masking tokens only); useful for tests and for
    /// callers that do their own filtering.
    pub fn masking_only() -> Self {
        StopwordPolicy::new(HashSet::new(), HashSet::new()).expect("empty sets are valid")
    }

    pub fn with_extra_masking<I: IntoIterator<Item = String>>(mut self, terms: I) -> Result<Self> {
        self.masking.extend(terms);
        self.validate()?;
        Ok(self)
    }

    pub fn is_stopped(&self, term: &str) -> bool {
        self.generic.contains(term) || self.domain.contains(term) || self.masking.contains(term)
    }

    fn validate(&self) -> Result<()> {
        for set in [&self.generic, &self.domain, &self.masking] {
            for term in set {
                let ok = !term.is_empty()
                    && term
                        .chars()
                        .all(|c| c.is_alphabetic() && !c.is_uppercase());
                if !ok {
                    return Err(Error::Config(format!(
                        "stopword {term:?} must be lowercase and alphabetic"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The shipped generic English list as a raw set, for callers that need to
/// combine it with their own domain or masking additions.
pub fn default_generic_terms() -> HashSet<String> {
    parse_stopword_list(DEFAULT_GENERIC_LIST).into_iter().collect()
}

/// Parses stopword file contents: one term per line, `#` comments, blank
/// lines ignored.
pub fn parse_stopword_list(text: &str) -> Vec<String> {
    text.lines()
        .map(|line| match line.find('#') {
            Some(i) => line[..i].trim(),
            None => line.trim(),
        })
        .filter(|line| !line.is_empty())
        .map(|line| line.to_string())
        .collect()
}

pub fn load_stopword_file(path: &Path) -> Result<HashSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopword_list(&text).into_iter().collect())
}

/// Runs the full text pipeline; returns surviving stems in document order.
pub fn preprocess_text(text: &str, policy: &StopwordPolicy) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut terms = Vec::new();
    for token in lowered.split(|c: char| !c.is_alphabetic()) {
        if token.is_empty() || token.chars().count() < policy.min_token_length {
            continue;
        }
        if policy.is_stopped(token) {
            continue;
        }
        let stemmed = stem(token);
        if policy.is_stopped(&stemmed) {
            continue;
        }
        terms.push(stemmed);
    }
    terms
}
