use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Dense term index with corpus frequencies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    freq: Vec<u64>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Rebuilds the lookup table; needed after deserialization.
    pub fn from_parts(terms: Vec<String>, freq: Vec<u64>) -> Self {
        assert_eq!(terms.len(), freq.len());
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self { terms, freq, index }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, idx: usize) -> &str {
        &self.terms[idx]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn frequency(&self, idx: usize) -> u64 {
        self.freq[idx]
    }
}

/// Indexes terms in first-occurrence order, keeping those seen at least
/// `min_count` times.
pub fn build_vocabulary<I, S>(corpus_terms: I, min_count: u64) -> Vocabulary
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut order: Vec<String> = Vec::new();
    let mut counts: HashMap<String, u64> = HashMap::new();
    for term in corpus_terms {
        let term = term.as_ref();
        match counts.get_mut(term) {
            Some(c) => *c += 1,
            None => {
                counts.insert(term.to_owned(), 1);
                order.push(term.to_owned());
            }
        }
    }
    let min_count = min_count.max(1);
    let (terms, freq) = order
        .into_iter()
        .filter_map(|t| {
            let c = counts[&t];
            (c >= min_count).then_some((t, c))
        })
        .unzip();
    Vocabulary::from_parts(terms, freq)
}
