//! Planted-topic discussion trees with known per-comment labels.

use std::collections::HashMap;
use std::io::{Read, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::TopicAssignment;
use crate::error::{Error, Result};
use crate::matching::max_weight_assignment;
use crate::thread_model::{Corpus, DiscussionTree, Record, TokenizerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_threads: usize,
    pub comments_per_thread: usize,
    pub k_true: usize,
    pub vocab_per_topic: usize,
    pub shared_noise_vocab: usize,
    /// Share of leaves that carry no topical words.
    pub noise_leaf_fraction: f64,
    /// Chance that a reply switches to a different planted topic.
    pub topic_shift_prob: f64,
    /// Success probability of the geometric child-count draw; mean fan-out
    /// is `(1 - p) / p`.
    pub branch_p: f64,
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Chance that a token of a topical comment comes from the noise vocabulary.
    pub noise_token_prob: f64,
    pub reference_docs: usize,
    pub reference_doc_len: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_threads: 20,
            comments_per_thread: 100,
            k_true: 4,
            vocab_per_topic: 20,
            shared_noise_vocab: 30,
            noise_leaf_fraction: 0.3,
            topic_shift_prob: 0.1,
            branch_p: 0.4,
            min_tokens: 3,
            max_tokens: 10,
            noise_token_prob: 0.2,
            reference_docs: 2000,
            reference_doc_len: 20,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synthetic: {m}")));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.k_true == 0 {
            return bad("k_true must be >= 1");
        }
        if self.vocab_per_topic == 0 {
            return bad("vocab_per_topic must be >= 1");
        }
        if !unit(self.noise_leaf_fraction)
            || !unit(self.topic_shift_prob)
            || !unit(self.noise_token_prob)
        {
            return bad("fractions must lie in [0, 1]");
        }
        if !(self.branch_p > 0.0 && self.branch_p <= 1.0) {
            return bad("branch_p must lie in (0, 1]");
        }
        if self.min_tokens > self.max_tokens {
            return bad("min_tokens exceeds max_tokens");
        }
        if self.shared_noise_vocab == 0
            && (self.noise_token_prob > 0.0 || self.noise_leaf_fraction > 0.0)
        {
            return bad("noise emissions need a non-empty noise vocabulary");
        }
        Ok(())
    }
}

/// True planted topic of every generated comment, in generation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    labels: Vec<(String, usize)>,
    lookup: HashMap<String, usize>,
}

impl GroundTruth {
    pub fn from_pairs(labels: Vec<(String, usize)>) -> Self {
        let lookup = labels.iter().map(|(id, t)| (id.clone(), *t)).collect();
        Self { labels, lookup }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.lookup.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.labels.iter().map(|(id, t)| (id.as_str(), *t))
    }

    /// `comment_id,topic`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["comment_id", "topic"])?;
        for (id, t) in &self.labels {
            w.write_record([id, &t.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<truth csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            comment_id: String,
            topic: usize,
        }
        let mut r = csv::Reader::from_reader(input);
        let labels = r
            .deserialize::<Row>()
            .map(|row| row.map(|r| (r.comment_id, r.topic)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self::from_pairs(labels))
    }
}

/// Generated threads in generic-jsonl form plus labels.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub records: Vec<Record>,
    pub truth: GroundTruth,
}

impl SyntheticData {
    pub fn trees(&self) -> Vec<DiscussionTree> {
        let mut by_thread: Vec<(String, Vec<Record>)> = Vec::new();
        for r in &self.records {
            match by_thread.last_mut() {
                Some((t, rs)) if *t == r.thread_id => rs.push(r.clone()),
                _ => by_thread.push((r.thread_id.clone(), vec![r.clone()])),
            }
        }
        by_thread
            .into_iter()
            .map(|(t, rs)| {
                DiscussionTree::build(&t, rs)
                    .expect("generated threads are valid trees")
                    .tree
                    .expect("generated threads have a root")
            })
            .collect()
    }

    pub fn corpus(&self, tokenizer: &TokenizerConfig) -> Corpus {
        Corpus::build(self.trees(), tokenizer, 1)
    }
}

fn topic_term(k: usize, i: usize) -> String {
    format!("t{k}w{i}")
}

fn noise_term(i: usize) -> String {
    format!("noise{i}")
}

/// Zipf-like rank weights `1 / (r + 1)`.
fn zipf(n: usize) -> Option<WeightedIndex<f64>> {
    (n > 0).then(|| {
        WeightedIndex::new((0..n).map(|r| 1.0 / (r as f64 + 1.0))).expect("positive weights")
    })
}

struct Emitter {
    topic_words: WeightedIndex<f64>,
    noise_words: Option<WeightedIndex<f64>>,
}

impl Emitter {
    fn new(spec: &SyntheticSpec) -> Self {
        Self {
            topic_words: zipf(spec.vocab_per_topic).expect("vocab_per_topic >= 1"),
            noise_words: zipf(spec.shared_noise_vocab),
        }
    }

    fn noise(&self, rng: &mut ChaCha8Rng) -> String {
        noise_term(
            self.noise_words
                .as_ref()
                .expect("noise vocabulary")
                .sample(rng),
        )
    }

    fn topical(
        &self,
        spec: &SyntheticSpec,
        topic: usize,
        len: usize,
        rng: &mut ChaCha8Rng,
    ) -> Vec<String> {
        (0..len)
            .map(|_| {
                if self.noise_words.is_some() && rng.gen::<f64>() < spec.noise_token_prob {
                    self.noise(rng)
                } else {
                    topic_term(topic, self.topic_words.sample(rng))
                }
            })
            .collect()
    }
}

/// Child count per node; a node forced open always gets at least one.
fn geometric(p: f64, rng: &mut ChaCha8Rng) -> usize {
    let mut n = 0;
    while rng.gen::<f64>() >= p && n < 1000 {
        n += 1;
    }
    n
}

fn generate_thread(
    spec: &SyntheticSpec,
    thread: usize,
    emitter: &Emitter,
) -> (Vec<Record>, Vec<(String, usize)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(thread as u64 + 1);
    let n = spec.comments_per_thread.max(1);

    // shape: breadth-first growth with geometric fan-out
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut frontier = std::collections::VecDeque::from([0usize]);
    while parent.len() < n {
        let (node, forced) = match frontier.pop_front() {
            Some(node) => (node, false),
            None => (rng.gen_range(0..parent.len()), true),
        };
        let mut kids = geometric(spec.branch_p, &mut rng);
        if forced {
            kids = kids.max(1);
        }
        for _ in 0..kids.min(n - parent.len()) {
            parent.push(Some(node));
            frontier.push_back(parent.len() - 1);
        }
    }
    let mut is_leaf = vec![true; n];
    for p in parent.iter().flatten() {
        is_leaf[*p] = false;
    }

    // planted topics flow down reply edges with occasional shifts
    let mut topic = vec![0usize; n];
    topic[0] = rng.gen_range(0..spec.k_true);
    for i in 1..n {
        let p = topic[parent[i].expect("non-root")];
        topic[i] = if spec.k_true > 1 && rng.gen::<f64>() < spec.topic_shift_prob {
            let other = rng.gen_range(0..spec.k_true - 1);
            if other >= p {
                other + 1
            } else {
                other
            }
        } else {
            p
        };
    }

    let thread_id = format!("s{thread:03}");
    let id = |i: usize| format!("{thread_id}c{i}");
    let mut records = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for i in 0..n {
        let noisy = is_leaf[i] && i > 0 && rng.gen::<f64>() < spec.noise_leaf_fraction;
        let body = if noisy {
            if emitter.noise_words.is_none() || rng.gen_bool(0.5) {
                "\u{1F602}".to_owned()
            } else {
                let len = rng.gen_range(1..=4);
                (0..len)
                    .map(|_| emitter.noise(&mut rng))
                    .collect::<Vec<_>>()
                    .join(" ")
            }
        } else {
            let len = rng.gen_range(spec.min_tokens..=spec.max_tokens);
            emitter.topical(spec, topic[i], len, &mut rng).join(" ")
        };
        records.push(Record {
            id: id(i),
            parent_id: parent[i].map(id),
            thread_id: thread_id.clone(),
            body,
        });
        truth.push((id(i), topic[i]));
    }
    (records, truth)
}

/// Generates `n_threads` planted-topic threads. Deterministic in `spec`.
pub fn generate_data(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let emitter = Emitter::new(spec);
    let mut records = Vec::new();
    let mut labels = Vec::new();
    for t in 0..spec.n_threads {
        let (r, l) = generate_thread(spec, t, &emitter);
        records.extend(r);
        labels.extend(l);
    }
    Ok(SyntheticData {
        records,
        truth: GroundTruth::from_pairs(labels),
    })
}

/// Corpus (default tokenizer) and labels of a synthetic run.
pub fn generate(spec: &SyntheticSpec) -> Result<(Corpus, GroundTruth)> {
    let data = generate_data(spec)?;
    let corpus = data.corpus(&TokenizerConfig::default());
    Ok((corpus, data.truth))
}

/// Single-topic reference documents drawn from the same emission model,
/// one space-joined document per entry.
pub fn reference_corpus(spec: &SyntheticSpec) -> Result<Vec<String>> {
    spec.validate()?;
    let emitter = Emitter::new(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(0);
    Ok((0..spec.reference_docs)
        .map(|_| {
            let topic = rng.gen_range(0..spec.k_true);
            emitter
                .topical(spec, topic, spec.reference_doc_len, &mut rng)
                .join(" ")
        })
        .collect())
}

/// Fraction of labelled comments whose predicted topic matches the truth
/// under the best one-to-one relabeling of predicted topics.
pub fn accuracy_from_labels(predicted: &HashMap<&str, usize>, truth: &GroundTruth) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::Coverage("ground truth is empty".into()));
    }
    let mut pred_ids: HashMap<usize, usize> = HashMap::new();
    let mut true_ids: HashMap<usize, usize> = HashMap::new();
    let mut pairs = Vec::with_capacity(truth.len());
    for (id, t) in truth.iter() {
        let p = *predicted
            .get(id)
            .ok_or_else(|| Error::Coverage(format!("no prediction for comment `{id}`")))?;
        let next = pred_ids.len();
        let pi = *pred_ids.entry(p).or_insert(next);
        let next = true_ids.len();
        let ti = *true_ids.entry(t).or_insert(next);
        pairs.push((pi, ti));
    }
    let n = pred_ids.len().max(true_ids.len());
    let mut confusion = vec![vec![0i64; n]; n];
    for (p, t) in pairs {
        confusion[p][t] += 1;
    }
    let matching = max_weight_assignment(&confusion);
    let correct: i64 = matching
        .iter()
        .enumerate()
        .map(|(p, &t)| confusion[p][t])
        .sum();
    Ok(correct as f64 / truth.len() as f64)
}

pub fn assignment_accuracy(assignments: &[TopicAssignment], truth: &GroundTruth) -> Result<f64> {
    let predicted = assignments
        .iter()
        .map(|a| (a.comment_id.as_str(), a.topic))
        .collect();
    accuracy_from_labels(&predicted, truth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SyntheticSpec {
        SyntheticSpec {
            n_threads: 3,
            comments_per_thread: 30,
            ..Default::default()
        }
    }

    #[test]
    fn single_topic_no_noise() {
        let spec = SyntheticSpec {
            k_true: 1,
            noise_leaf_fraction: 0.0,
            topic_shift_prob: 0.0,
            noise_token_prob: 0.0,
            ..small()
        };
        let data = generate_data(&spec).unwrap();
        assert!(data.truth.iter().all(|(_, t)| t == 0));
        for r in &data.records {
            assert!(
                r.body.split(' ').all(|w| w.starts_with("t0w")),
                "{}",
                r.body
            );
        }
    }

    #[test]
    fn deterministic() {
        let a = generate_data(&small()).unwrap();
        let b = generate_data(&small()).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.truth, b.truth);
        let c = generate_data(&SyntheticSpec {
            seed: 99,
            ..small()
        })
        .unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn counts() {
        let spec = SyntheticSpec::default();
        let (corpus, truth) = generate(&spec).unwrap();
        assert_eq!(truth.len(), 2000);
        assert_eq!(corpus.num_comments(), 2000);
        assert_eq!(corpus.trees().len(), 20);
        assert!(corpus.comments().all(|c| truth.get(&c.id).is_some()));
    }

    #[test]
    fn noise_leaves_have_no_topic_words() {
        let spec = SyntheticSpec {
            noise_leaf_fraction: 1.0,
            ..small()
        };
        let data = generate_data(&spec).unwrap();
        let trees = data.trees();
        for tree in &trees {
            for (i, c) in tree.comments().iter().enumerate() {
                if i != tree.root() && tree.children(i).is_empty() {
                    assert!(!c.raw_text.contains("t0w") && !c.raw_text.contains("t1w"));
                }
            }
        }
    }

    #[test]
    fn accuracy_identity_and_permutation() {
        let truth = GroundTruth::from_pairs((0..12).map(|i| (format!("c{i}"), i % 3)).collect());
        let ids: Vec<String> = (0..12).map(|i| format!("c{i}")).collect();
        let same: HashMap<&str, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i % 3))
            .collect();
        assert_eq!(accuracy_from_labels(&same, &truth).unwrap(), 1.0);
        let perm = [2, 0, 1];
        let permuted: HashMap<&str, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), perm[i % 3]))
            .collect();
        assert_eq!(accuracy_from_labels(&permuted, &truth).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_needs_coverage() {
        let truth = GroundTruth::from_pairs(vec![("a".into(), 0), ("b".into(), 1)]);
        let partial: HashMap<&str, usize> = [("a", 0)].into_iter().collect();
        assert!(matches!(
            accuracy_from_labels(&partial, &truth),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn truth_csv_round_trip() {
        let truth = GroundTruth::from_pairs(vec![("a".into(), 0), ("b,c".into(), 3)]);
        let mut buf = Vec::new();
        truth.write_csv(&mut buf).unwrap();
        assert_eq!(GroundTruth::read_csv(buf.as_slice()).unwrap(), truth);
    }

    #[test]
    fn invalid_spec() {
        assert!(generate_data(&SyntheticSpec {
            k_true: 0,
            ..small()
        })
        .is_err());
        assert!(generate_data(&SyntheticSpec {
            topic_shift_prob: 1.5,
            ..small()
        })
        .is_err());
    }
}
