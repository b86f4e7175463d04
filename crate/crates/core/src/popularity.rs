//! Level-weighted popularity of comment nodes.
//!
//! A node's popularity is its initial value 1 plus, for every descendant at
//! distance `l` below it, the level weight `w(l)`. Direct replies sit at
//! distance 1.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thread_model::{Corpus, DiscussionTree};

/// Decreasing per-level weight function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSequence {
    /// `w(l) = max(c - (l-1) d, floor)`
    Arithmetic {
        c: f64,
        d: f64,
        #[serde(default)]
        floor: f64,
    },
    /// `w(l) = c r^(l-1)`
    Geometric { c: f64, r: f64 },
    /// `w(l) = (c + (l-1) b)^(-gravity)`
    Harmonic { c: f64, b: f64, gravity: f64 },
}

impl WeightSequence {
    pub fn arithmetic(c: f64, d: f64) -> Result<Self> {
        Self::Arithmetic { c, d, floor: 0.0 }.validated()
    }

    pub fn geometric(c: f64, r: f64) -> Result<Self> {
        Self::Geometric { c, r }.validated()
    }

    pub fn harmonic(c: f64, b: f64, gravity: f64) -> Result<Self> {
        Self::Harmonic { c, b, gravity }.validated()
    }

    /// Every level weighted 1.
    pub fn flat() -> Self {
        Self::Geometric { c: 1.0, r: 1.0 }
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidWeights(m));
        let finite = |x: f64| x.is_finite();
        match self {
            Self::Arithmetic { c, d, floor } => {
                if !(finite(c) && c > 0.0) {
                    return bad(format!("arithmetic c must be > 0, got {c}"));
                }
                if !(finite(d) && d >= 0.0) {
                    return bad(format!("arithmetic d must be >= 0, got {d}"));
                }
                if !(finite(floor) && floor >= 0.0) {
                    return bad(format!("arithmetic floor must be >= 0, got {floor}"));
                }
            }
            Self::Geometric { c, r } => {
                if !(finite(c) && c > 0.0) {
                    return bad(format!("geometric c must be > 0, got {c}"));
                }
                if !(r > 0.0 && r <= 1.0) {
                    return bad(format!("geometric r must be in (0, 1], got {r}"));
                }
            }
            Self::Harmonic { c, b, gravity } => {
                if !(finite(c) && c > 0.0) {
                    return bad(format!("harmonic base c must be > 0, got {c}"));
                }
                if !(finite(b) && b >= 0.0) {
                    return bad(format!("harmonic b must be >= 0, got {b}"));
                }
                if !(finite(gravity) && gravity >= 0.0) {
                    return bad(format!("gravity must be >= 0, got {gravity}"));
                }
            }
        }
        Ok(self)
    }

    /// Weight of level `l` (1-based).
    pub fn weight_at(&self, l: usize) -> f64 {
        assert!(l >= 1, "levels are 1-based");
        let steps = (l - 1) as f64;
        match *self {
            Self::Arithmetic { c, d, floor } => (c - steps * d).max(floor),
            Self::Geometric { c, r } => c * r.powi((l - 1) as i32),
            Self::Harmonic { c, b, gravity } => (c + steps * b).powf(-gravity),
        }
    }

    /// `[w(1), ..., w(n)]`
    pub fn weights(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|l| self.weight_at(l)).collect()
    }
}

/// Popularity per comment, aligned with the corpus' global comment index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopularityScores {
    values: Vec<f64>,
}

impl PopularityScores {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// `p = 1` everywhere.
    pub fn uniform(n: usize) -> Self {
        Self {
            values: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, comment: usize) -> Option<f64> {
        self.values.get(comment).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 1.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn scaled(&self, gamma: f64) -> Self {
        Self {
            values: self.values.iter().map(|p| p * gamma).collect(),
        }
    }

    /// CSV with `comment_id,thread_id,popularity`.
    pub fn write_csv<W: Write>(&self, corpus: &Corpus, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["comment_id", "thread_id", "popularity"])?;
        for (i, c) in corpus.comments().enumerate() {
            w.write_record([&c.id, &c.thread_id, &self.values[i].to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<scores csv>", e))?;
        Ok(())
    }
}

/// Popularity of every node of `tree`, indexed by node position.
pub fn score_tree(tree: &DiscussionTree, seq: &WeightSequence) -> Vec<f64> {
    let weights = seq.weights(tree.depth());
    let mut scores = vec![1.0; tree.len()];
    // each node credits every ancestor with the weight of its distance
    for node in 0..tree.len() {
        let mut distance = 0;
        let mut cur = node;
        while let Some(parent) = tree.parent(cur) {
            scores[parent] += weights[distance];
            distance += 1;
            cur = parent;
        }
    }
    scores
}

pub fn score_corpus(corpus: &Corpus, seq: &WeightSequence) -> PopularityScores {
    let values = corpus
        .trees()
        .iter()
        .flat_map(|t| score_tree(t, seq))
        .collect();
    PopularityScores { values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thread_model::{fixtures, TokenizerConfig};

    fn by_id(tree: &DiscussionTree, scores: &[f64], id: &str) -> f64 {
        scores[tree.node_of(id).unwrap()]
    }

    #[test]
    fn first_weight_is_c() {
        assert_eq!(
            WeightSequence::arithmetic(2.0, 0.3).unwrap().weight_at(1),
            2.0
        );
        assert_eq!(
            WeightSequence::geometric(2.0, 0.3).unwrap().weight_at(1),
            2.0
        );
        assert_eq!(
            WeightSequence::harmonic(1.0, 0.3, 2.0)
                .unwrap()
                .weight_at(1),
            1.0
        );
        // non-unit harmonic base gives c^-G
        let h = WeightSequence::harmonic(2.0, 1.0, 1.0).unwrap();
        assert_eq!(h.weight_at(1), 0.5);
    }

    #[test]
    fn hand_substituted_weights() {
        let a = WeightSequence::arithmetic(1.0, 0.25).unwrap();
        assert_eq!(a.weight_at(3), 0.5);
        let h = WeightSequence::harmonic(1.0, 1.0, 1.0).unwrap();
        assert_eq!(h.weight_at(4), 0.25);
    }

    #[test]
    fn arithmetic_clamps_at_floor() {
        let a = WeightSequence::arithmetic(1.0, 0.4).unwrap();
        assert_eq!(a.weight_at(4), 0.0);
        let f = WeightSequence::Arithmetic {
            c: 1.0,
            d: 0.4,
            floor: 0.1,
        };
        assert_eq!(f.weight_at(10), 0.1);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(WeightSequence::arithmetic(0.0, 0.1).is_err());
        assert!(WeightSequence::arithmetic(1.0, -0.1).is_err());
        assert!(WeightSequence::geometric(1.0, 0.0).is_err());
        assert!(WeightSequence::geometric(1.0, 1.5).is_err());
        assert!(WeightSequence::harmonic(-1.0, 1.0, 1.0).is_err());
        assert!(WeightSequence::harmonic(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn four_level_arithmetic_scores() {
        let tree = fixtures::four_level_thread();
        let s = score_tree(&tree, &WeightSequence::arithmetic(1.0, 0.25).unwrap());
        assert!((by_id(&tree, &s, "2") - 2.75).abs() < 1e-12);
        assert!((by_id(&tree, &s, "3") - 3.75).abs() < 1e-12);
        assert!((by_id(&tree, &s, "1") - 7.25).abs() < 1e-12);
        for leaf in ["4", "6", "8", "9"] {
            assert_eq!(by_id(&tree, &s, leaf), 1.0);
        }
    }

    #[test]
    fn four_level_geometric_root() {
        let tree = fixtures::four_level_thread();
        let s = score_tree(&tree, &WeightSequence::geometric(1.0, 0.5).unwrap());
        assert!((by_id(&tree, &s, "1") - 6.0).abs() < 1e-12);
    }

    #[test]
    fn corpus_scores() {
        let tokenizer = TokenizerConfig::default();
        let seq = WeightSequence::arithmetic(1.0, 0.25).unwrap();
        let empty = Corpus::build(vec![], &tokenizer, 1);
        assert!(score_corpus(&empty, &seq).is_empty());

        let singles = crate::thread_model::parse_threads(
            concat!(
                r#"{"id":"a","thread_id":"x","body":"one"}"#,
                "\n",
                r#"{"id":"b","thread_id":"y","body":"two"}"#
            )
            .as_bytes(),
            crate::thread_model::InputFormat::GenericJsonl,
        )
        .unwrap();
        let corpus = Corpus::build(singles.trees, &tokenizer, 1);
        assert_eq!(score_corpus(&corpus, &seq).values(), [1.0, 1.0]);

        let tree = fixtures::four_level_thread();
        let corpus = Corpus::build(vec![tree.clone()], &tokenizer, 1);
        assert_eq!(
            score_corpus(&corpus, &seq).values(),
            score_tree(&tree, &seq)
        );
    }
}
