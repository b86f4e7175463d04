use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    /// Terms with fewer characters than this are dropped.
    pub min_len: usize,
    pub stopwords: HashSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            min_len: 2,
            stopwords: HashSet::new(),
        }
    }
}

impl TokenizerConfig {
    /// Adds every non-empty line of a stopword file (lowercased).
    pub fn load_stopwords(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.stopwords.extend(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty()),
        );
        Ok(())
    }
}

/// Lowercases, splits on runs of non-alphanumeric characters and drops short
/// terms and stopwords.
pub fn tokenize(raw_text: &str, config: &TokenizerConfig) -> Vec<String> {
    raw_text
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| t.chars().count() >= config.min_len)
        .filter(|t| !config.stopwords.contains(*t))
        .map(str::to_owned)
        .collect()
}
