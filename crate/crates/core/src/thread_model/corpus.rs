use super::tokenize::{tokenize, TokenizerConfig};
use super::tree::{Comment, DiscussionTree};
use super::vocab::{build_vocabulary, Vocabulary};

/// All trees of a run with a shared vocabulary. Comments are addressed by a
/// global index: trees in order, nodes in tree storage order.
#[derive(Debug, Clone)]
pub struct Corpus {
    trees: Vec<DiscussionTree>,
    offsets: Vec<usize>,
    vocab: Vocabulary,
    locations: Vec<(usize, usize)>,
}

impl Corpus {
    /// Tokenizes every comment, builds the vocabulary and fills in the
    /// token indices. Terms below `min_count` are removed from comments.
    pub fn build(
        mut trees: Vec<DiscussionTree>,
        tokenizer: &TokenizerConfig,
        min_count: u64,
    ) -> Self {
        let terms: Vec<Vec<Vec<String>>> = trees
            .iter()
            .map(|t| {
                t.comments()
                    .iter()
                    .map(|c| tokenize(&c.raw_text, tokenizer))
                    .collect()
            })
            .collect();
        let vocab = build_vocabulary(terms.iter().flatten().flatten(), min_count);
        for (tree, tree_terms) in trees.iter_mut().zip(&terms) {
            for (node, comment_terms) in tree_terms.iter().enumerate() {
                tree.comment_mut(node).tokens = comment_terms
                    .iter()
                    .filter_map(|t| vocab.index_of(t))
                    .collect();
            }
        }
        Self::from_parts(trees, vocab)
    }

    /// Wraps trees whose comments already carry vocabulary indices.
    pub fn from_parts(trees: Vec<DiscussionTree>, vocab: Vocabulary) -> Self {
        let mut offsets = Vec::with_capacity(trees.len());
        let mut locations = Vec::new();
        for (ti, tree) in trees.iter().enumerate() {
            offsets.push(locations.len());
            locations.extend((0..tree.len()).map(|n| (ti, n)));
        }
        debug_assert!(trees
            .iter()
            .flat_map(|t| t.comments())
            .flat_map(|c| &c.tokens)
            .all(|&w| w < vocab.len()));
        Self {
            trees,
            offsets,
            vocab,
            locations,
        }
    }

    pub fn trees(&self) -> &[DiscussionTree] {
        &self.trees
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn num_comments(&self) -> usize {
        self.locations.len()
    }

    pub fn num_tokens(&self) -> usize {
        self.comments().map(|c| c.tokens.len()).sum()
    }

    /// Global index of a tree's first comment.
    pub fn offset(&self, tree: usize) -> usize {
        self.offsets[tree]
    }

    /// (tree, node) of a global comment index.
    pub fn location(&self, comment: usize) -> (usize, usize) {
        self.locations[comment]
    }

    pub fn comment(&self, comment: usize) -> &Comment {
        let (t, n) = self.locations[comment];
        self.trees[t].comment(n)
    }

    /// Comments in global index order.
    pub fn comments(&self) -> impl Iterator<Item = &Comment> + '_ {
        self.trees.iter().flat_map(|t| t.comments())
    }

    /// Single-tree corpus sharing this corpus' vocabulary.
    pub fn subset(&self, tree: usize) -> Corpus {
        Corpus::from_parts(vec![self.trees[tree].clone()], self.vocab.clone())
    }
}

/// Keeps threads whose root has at least `min` descendants.
pub fn filter_min_descendants(trees: Vec<DiscussionTree>, min: usize) -> Vec<DiscussionTree> {
    trees
        .into_iter()
        .filter(|t| t.descendant_count() >= min)
        .collect()
}
