//! Topic coherence against a reference corpus.

mod index;
mod measures;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use index::{build_index, build_index_sharded, CoherenceIndex, WindowCounts, DEFAULT_EPSILON};
pub use measures::{
    c_a, c_npmi, c_p, c_uci, c_umass, c_umass_detailed, c_v, npmi_pair, score_topic,
    MeasureWindows, TopicCoherence, UMass,
};

use crate::error::{Error, Result};
use crate::sampler::TopicModel;

/// Per-topic coherence plus the arithmetic mean of every measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub topics: Vec<TopicCoherence>,
    pub average: TopicCoherence,
}

impl CoherenceReport {
    pub fn from_topics(topics: Vec<TopicCoherence>) -> Self {
        let n = topics.len().max(1) as f64;
        let avg = |f: fn(&TopicCoherence) -> f64| topics.iter().map(f).sum::<f64>() / n;
        let average = TopicCoherence {
            c_v: avg(|t| t.c_v),
            c_p: avg(|t| t.c_p),
            c_uci: avg(|t| t.c_uci),
            c_umass: avg(|t| t.c_umass),
            c_npmi: avg(|t| t.c_npmi),
            c_a: avg(|t| t.c_a),
            umass_skipped_pairs: topics.iter().map(|t| t.umass_skipped_pairs).sum(),
        };
        Self { topics, average }
    }

    /// `topic,c_v,c_p,c_uci,c_umass,c_npmi,c_a` with a closing AVERAGE row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["topic", "c_v", "c_p", "c_uci", "c_umass", "c_npmi", "c_a"])?;
        let row = |label: String, t: &TopicCoherence| {
            [
                label,
                t.c_v.to_string(),
                t.c_p.to_string(),
                t.c_uci.to_string(),
                t.c_umass.to_string(),
                t.c_npmi.to_string(),
                t.c_a.to_string(),
            ]
        };
        for (k, t) in self.topics.iter().enumerate() {
            w.write_record(row(k.to_string(), t))?;
        }
        w.write_record(row("AVERAGE".into(), &self.average))?;
        w.flush().map_err(|e| Error::io("<coherence csv>", e))?;
        Ok(())
    }
}

/// Union of all topics' top words, in first-seen order.
pub fn needed_terms(top_words: &[Vec<String>]) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    top_words
        .iter()
        .flatten()
        .filter(|t| seen.insert(t.as_str()))
        .cloned()
        .collect()
}

/// Scores the top `t` words of every topic of `model`.
pub fn evaluate_model(
    model: &TopicModel,
    index: &CoherenceIndex,
    t: usize,
    windows: &MeasureWindows,
) -> Result<CoherenceReport> {
    let topics = model
        .top_words(t)
        .iter()
        .map(|top| score_topic(top, index, windows))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoherenceReport::from_topics(topics))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> CoherenceIndex {
        // four documents that are each a single window for s = 10
        build_index(
            [vec!["a", "b"], vec!["a", "b"], vec!["a"], vec!["b"]],
            &["a", "b", "c"],
            &[1, 5, 10, 70, 110],
        )
        .unwrap()
    }

    #[test]
    fn npmi_toy_value() {
        // windows: {a b} {b} {b a} {a}
        let ix = build_index([vec!["a", "b"], vec!["b", "a"]], &["a", "b"], &[10]).unwrap();
        assert_eq!(ix.window(10).unwrap().total(), 4);
        let v = npmi_pair("a", "b", &ix, 10).unwrap();
        let expect = (0.5f64 / 0.5625).ln() / -(0.5f64).ln();
        assert!((v - expect).abs() < 1e-9, "{v} vs {expect}");
        assert!((v - -0.169_925).abs() < 1e-6);
    }

    #[test]
    fn umass_examples() {
        let ix = toy();
        assert!(c_umass(&["a", "b"], &ix).unwrap().abs() < 1e-12);
        let disjoint = build_index(
            [vec!["a"], vec!["a"], vec!["a"], vec!["a"], vec!["b"]],
            &["a", "b"],
            &[5],
        )
        .unwrap();
        let v = c_umass(&["a", "b"], &disjoint).unwrap();
        assert!((v - (0.25f64).ln()).abs() < 1e-12);
        let u = c_umass_detailed(&["c", "a"], &ix).unwrap();
        assert_eq!(u.skipped_pairs, 1);
    }

    #[test]
    fn too_few_words() {
        let ix = toy();
        assert!(matches!(
            c_npmi(&["a"], &ix, 10),
            Err(Error::TooFewWords(1))
        ));
    }

    #[test]
    fn report_average_single_topic() {
        let t = TopicCoherence {
            c_v: 0.5,
            c_p: 0.1,
            c_uci: -1.0,
            c_umass: -2.0,
            c_npmi: 0.05,
            c_a: 0.2,
            umass_skipped_pairs: 0,
        };
        let r = CoherenceReport::from_topics(vec![t.clone()]);
        assert_eq!(r.average, t);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("topic,c_v,c_p,c_uci,c_umass,c_npmi,c_a\n0,"));
        assert!(text.lines().last().unwrap().starts_with("AVERAGE,"));
    }

    #[test]
    fn needed_terms_dedup() {
        let top = vec![
            vec!["a".to_string(), "b".into()],
            vec!["b".into(), "c".into()],
        ];
        assert_eq!(needed_terms(&top), ["a", "b", "c"]);
    }
}
