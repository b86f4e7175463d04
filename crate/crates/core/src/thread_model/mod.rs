//! Comment trees, tokenization and vocabulary.

mod corpus;
pub mod fixtures;
mod parse;
mod tokenize;
mod tree;
mod vocab;

pub use corpus::{filter_min_descendants, Corpus};
pub use parse::{parse_threads, write_threads, InputFormat, ParseReport};
pub use tokenize::{tokenize, TokenizerConfig};
pub use tree::{Comment, DiscussionTree, Record, TreeBuild};
pub use vocab::{build_vocabulary, Vocabulary};
