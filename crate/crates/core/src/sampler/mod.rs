//! Popularity-weighted collapsed Gibbs sampling.
//!
//! Every token of comment `c` carries the weight `ω = λ·p_c` and contributes
//! that weight, rather than 1, to the topic-word, comment-topic and topic
//! total tables. With `p ≡ 1` and `λ = 1` the sampler is plain LDA.

mod model;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use model::{top_indices, top_words, Matrix, TopicModel};

use crate::error::{Error, Result};
use crate::popularity::PopularityScores;
use crate::thread_model::Corpus;

/// Scaling ratio between popularity and pseudo-counts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Lambda {
    /// `1 / mean(p)`, so the average token weight is 1.
    #[default]
    Auto,
    Fixed(f64),
}

impl Lambda {
    pub fn resolve(self, scores: &PopularityScores) -> f64 {
        match self {
            Lambda::Auto => 1.0 / scores.mean(),
            Lambda::Fixed(l) => l,
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Auto => f.write_str("auto"),
            Lambda::Fixed(l) => write!(f, "{l}"),
        }
    }
}

impl FromStr for Lambda {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Lambda::Auto);
        }
        s.parse::<f64>()
            .map(Lambda::Fixed)
            .map_err(|_| format!("lambda must be `auto` or a number, got `{s}`"))
    }
}

impl Serialize for Lambda {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Lambda::Auto => s.serialize_str("auto"),
            Lambda::Fixed(l) => s.serialize_f64(*l),
        }
    }
}

impl<'de> Deserialize<'de> for Lambda {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(l) => Ok(Lambda::Fixed(l)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: Lambda,
    pub iterations: usize,
    pub burn_in: usize,
    /// Average estimates over every `sample_lag`-th sweep after burn-in;
    /// 0 estimates from the final state only.
    pub sample_lag: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            topics: 70,
            alpha: 0.1,
            beta: 0.01,
            lambda: Lambda::Auto,
            iterations: 1000,
            burn_in: 500,
            sample_lag: 0,
            seed: 1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSampler(m));
        if self.topics == 0 {
            return bad("topics must be >= 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be > 0, got {}", self.beta));
        }
        if let Lambda::Fixed(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("lambda must be > 0, got {l}"));
            }
        }
        if self.burn_in >= self.iterations && self.iterations > 0 {
            return bad(format!(
                "burn_in ({}) must be below iterations ({})",
                self.burn_in, self.iterations
            ));
        }
        if self.topics > u32::MAX as usize {
            return bad("too many topics".into());
        }
        Ok(())
    }
}

/// Draws an index from unnormalized cumulative weights by inverse CDF.
fn draw_from_cumulative<R: Rng>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = cumulative[cumulative.len() - 1];
    let u = rng.gen::<f64>() * total;
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

/// Topic assignments and weighted count tables of one chain.
#[derive(Debug, Clone)]
pub struct SamplerState {
    topics: usize,
    vocab_size: usize,
    num_comments: usize,
    alpha: f64,
    beta: f64,
    lambda: f64,
    words: Vec<u32>,
    owners: Vec<u32>,
    weights: Vec<f64>,
    z: Vec<u32>,
    /// V x K
    word_topic: Vec<f64>,
    /// C x K
    comment_topic: Vec<f64>,
    topic_totals: Vec<f64>,
    rng: ChaCha8Rng,
    scratch: Vec<f64>,
}

impl SamplerState {
    /// Flattens the corpus into tokens (comment order, then position) and
    /// assigns each a uniformly random topic.
    pub fn init(
        corpus: &Corpus,
        scores: &PopularityScores,
        config: &SamplerConfig,
    ) -> Result<Self> {
        let mut state = Self::empty(corpus, scores, config)?;
        let k = state.topics as u32;
        state.z = (0..state.words.len())
            .map(|_| state.rng.gen_range(0..k))
            .collect();
        for t in 0..state.z.len() {
            state.add(t, state.z[t] as usize);
        }
        Ok(state)
    }

    fn empty(corpus: &Corpus, scores: &PopularityScores, config: &SamplerConfig) -> Result<Self> {
        config.validate()?;
        let lambda = config.lambda.resolve(scores);
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidSampler(format!(
                "resolved lambda {lambda} is not positive"
            )));
        }
        let mut words = Vec::new();
        let mut owners = Vec::new();
        let mut weights = Vec::new();
        for (c, comment) in corpus.comments().enumerate() {
            if comment.tokens.is_empty() {
                continue;
            }
            let p = scores
                .get(c)
                .filter(|p| p.is_finite() && *p > 0.0)
                .ok_or(Error::MissingScore(c))?;
            let omega = lambda * p;
            for &w in &comment.tokens {
                words.push(w as u32);
                owners.push(c as u32);
                weights.push(omega);
            }
        }
        let (k, v, c) = (config.topics, corpus.vocab().len(), corpus.num_comments());
        Ok(Self {
            topics: k,
            vocab_size: v,
            num_comments: c,
            alpha: config.alpha,
            beta: config.beta,
            lambda,
            words,
            owners,
            weights,
            z: Vec::new(),
            word_topic: vec![0.0; v * k],
            comment_topic: vec![0.0; c * k],
            topic_totals: vec![0.0; k],
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            scratch: vec![0.0; k],
        })
    }

    pub fn num_tokens(&self) -> usize {
        self.words.len()
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Current topic of every token.
    pub fn z(&self) -> &[u32] {
        &self.z
    }

    pub fn token_weight(&self, t: usize) -> f64 {
        self.weights[t]
    }

    pub fn word_topic(&self, w: usize, k: usize) -> f64 {
        self.word_topic[w * self.topics + k]
    }

    pub fn comment_topic(&self, c: usize, k: usize) -> f64 {
        self.comment_topic[c * self.topics + k]
    }

    pub fn topic_total(&self, k: usize) -> f64 {
        self.topic_totals[k]
    }

    /// Removes token `t`'s weight from the tables under its current topic.
    pub fn remove(&mut self, t: usize) {
        let k = self.z[t] as usize;
        let omega = self.weights[t];
        let wk = self.words[t] as usize * self.topics + k;
        let ck = self.owners[t] as usize * self.topics + k;
        self.word_topic[wk] = (self.word_topic[wk] - omega).max(0.0);
        self.comment_topic[ck] = (self.comment_topic[ck] - omega).max(0.0);
        self.topic_totals[k] = (self.topic_totals[k] - omega).max(0.0);
    }

    /// Assigns token `t` to topic `k` and adds its weight.
    pub fn add(&mut self, t: usize, k: usize) {
        let omega = self.weights[t];
        self.z[t] = k as u32;
        self.word_topic[self.words[t] as usize * self.topics + k] += omega;
        self.comment_topic[self.owners[t] as usize * self.topics + k] += omega;
        self.topic_totals[k] += omega;
    }

    /// Unnormalized full conditional of token `t`, which must already be
    /// removed from the tables.
    pub fn conditional_distribution(&self, t: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.topics];
        self.fill_conditional(t, &mut out, false);
        out
    }

    fn fill_conditional(&self, t: usize, out: &mut [f64], cumulative: bool) {
        let k_count = self.topics;
        let v_beta = self.vocab_size as f64 * self.beta;
        let wt = &self.word_topic[self.words[t] as usize * k_count..][..k_count];
        let ct = &self.comment_topic[self.owners[t] as usize * k_count..][..k_count];
        let mut acc = 0.0;
        for k in 0..k_count {
            let p = (ct[k] + self.alpha) * (wt[k] + self.beta) / (self.topic_totals[k] + v_beta);
            if cumulative {
                acc += p;
                out[k] = acc;
            } else {
                out[k] = p;
            }
        }
    }

    /// One full Gibbs pass over all tokens in index order.
    pub fn sweep(&mut self) {
        let mut cumulative = std::mem::take(&mut self.scratch);
        for t in 0..self.words.len() {
            self.remove(t);
            self.fill_conditional(t, &mut cumulative, true);
            let k = draw_from_cumulative(&cumulative, &mut self.rng);
            self.add(t, k);
        }
        self.scratch = cumulative;
    }

    /// `φ[k][w] ∝ n_kw + β`
    pub fn estimate_phi(&self) -> Matrix {
        let (k_count, v) = (self.topics, self.vocab_size);
        let mut phi = Matrix::zeros(k_count, v);
        for k in 0..k_count {
            let row = phi.row_mut(k);
            for (w, x) in row.iter_mut().enumerate() {
                *x = self.word_topic[w * k_count + k] + self.beta;
            }
            normalize(row);
        }
        phi
    }

    /// `θ[c][k] ∝ n_ck + α`
    pub fn estimate_theta(&self) -> Matrix {
        let k_count = self.topics;
        let mut theta = Matrix::zeros(self.num_comments, k_count);
        for c in 0..self.num_comments {
            let row = theta.row_mut(c);
            for (k, x) in row.iter_mut().enumerate() {
                *x = self.comment_topic[c * k_count + k] + self.alpha;
            }
            normalize(row);
        }
        theta
    }

    /// Largest absolute gap between the incremental tables and tables
    /// recomputed from `z` and the token weights.
    pub fn count_drift(&self) -> f64 {
        let k_count = self.topics;
        let mut wt = vec![0.0; self.word_topic.len()];
        let mut ct = vec![0.0; self.comment_topic.len()];
        let mut tt = vec![0.0; k_count];
        for t in 0..self.words.len() {
            let k = self.z[t] as usize;
            wt[self.words[t] as usize * k_count + k] += self.weights[t];
            ct[self.owners[t] as usize * k_count + k] += self.weights[t];
            tt[k] += self.weights[t];
        }
        let gap = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        gap(&wt, &self.word_topic)
            .max(gap(&ct, &self.comment_topic))
            .max(gap(&tt, &self.topic_totals))
    }
}

fn normalize(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    for x in row {
        *x /= sum;
    }
}

/// Serialized chain position; resuming from it replays the remaining sweeps
/// bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: SamplerConfig,
    pub iteration: usize,
    pub lambda: f64,
    pub z: Vec<u32>,
    pub word_topic: Vec<f64>,
    pub comment_topic: Vec<f64>,
    pub topic_totals: Vec<f64>,
    pub rng_word_pos: u128,
    pub phi_sum: Vec<f64>,
    pub theta_sum: Vec<f64>,
    pub samples: usize,
}

/// A sampler state plus the sweep schedule and estimate accumulators.
#[derive(Debug, Clone)]
pub struct Chain {
    state: SamplerState,
    config: SamplerConfig,
    iteration: usize,
    phi_sum: Vec<f64>,
    theta_sum: Vec<f64>,
    samples: usize,
}

impl Chain {
    pub fn new(corpus: &Corpus, scores: &PopularityScores, config: &SamplerConfig) -> Result<Self> {
        Ok(Self {
            state: SamplerState::init(corpus, scores, config)?,
            config: config.clone(),
            iteration: 0,
            phi_sum: Vec::new(),
            theta_sum: Vec::new(),
            samples: 0,
        })
    }

    pub fn state(&self) -> &SamplerState {
        &self.state
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_done(&self) -> bool {
        self.iteration >= self.config.iterations
    }

    /// One sweep, accumulating estimates when the schedule says so.
    pub fn step(&mut self) {
        self.state.sweep();
        self.iteration += 1;
        let lag = self.config.sample_lag;
        if lag > 0
            && self.iteration > self.config.burn_in
            && (self.iteration - self.config.burn_in).is_multiple_of(lag)
        {
            accumulate(&mut self.phi_sum, &self.state.estimate_phi());
            accumulate(&mut self.theta_sum, &self.state.estimate_theta());
            self.samples += 1;
        }
    }

    pub fn run_to_end(&mut self) {
        while !self.is_done() {
            self.step();
        }
    }

    pub fn estimate(&self, corpus: &Corpus) -> TopicModel {
        let (phi, theta) = if self.samples > 0 {
            let mut phi = self.state.estimate_phi();
            let mut theta = self.state.estimate_theta();
            average_into(&mut phi, &self.phi_sum, self.samples);
            average_into(&mut theta, &self.theta_sum, self.samples);
            (phi, theta)
        } else {
            (self.state.estimate_phi(), self.state.estimate_theta())
        };
        TopicModel {
            phi,
            theta,
            terms: corpus.vocab().terms().to_vec(),
            comment_ids: corpus.comments().map(|c| c.id.clone()).collect(),
            thread_ids: corpus.comments().map(|c| c.thread_id.clone()).collect(),
        }
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config: self.config.clone(),
            iteration: self.iteration,
            lambda: self.state.lambda,
            z: self.state.z.clone(),
            word_topic: self.state.word_topic.clone(),
            comment_topic: self.state.comment_topic.clone(),
            topic_totals: self.state.topic_totals.clone(),
            rng_word_pos: self.state.rng.get_word_pos(),
            phi_sum: self.phi_sum.clone(),
            theta_sum: self.theta_sum.clone(),
            samples: self.samples,
        }
    }

    /// Rebuilds a chain from a checkpoint over the same corpus and scores.
    /// `iterations` may be raised to extend the run.
    pub fn resume(
        corpus: &Corpus,
        scores: &PopularityScores,
        checkpoint: &Checkpoint,
    ) -> Result<Self> {
        let mut state = SamplerState::empty(corpus, scores, &checkpoint.config)?;
        let mismatch = |m: &str| Error::Checkpoint(m.to_owned());
        if state.lambda.to_bits() != checkpoint.lambda.to_bits() {
            return Err(mismatch("lambda differs"));
        }
        if checkpoint.z.len() != state.words.len() {
            return Err(mismatch("token count differs"));
        }
        if checkpoint.word_topic.len() != state.word_topic.len()
            || checkpoint.comment_topic.len() != state.comment_topic.len()
            || checkpoint.topic_totals.len() != state.topic_totals.len()
        {
            return Err(mismatch("table shapes differ"));
        }
        if checkpoint.z.iter().any(|&k| k as usize >= state.topics) {
            return Err(mismatch("topic index out of range"));
        }
        state.z = checkpoint.z.clone();
        state.word_topic = checkpoint.word_topic.clone();
        state.comment_topic = checkpoint.comment_topic.clone();
        state.topic_totals = checkpoint.topic_totals.clone();
        state.rng.set_word_pos(checkpoint.rng_word_pos);
        Ok(Self {
            state,
            config: checkpoint.config.clone(),
            iteration: checkpoint.iteration,
            phi_sum: checkpoint.phi_sum.clone(),
            theta_sum: checkpoint.theta_sum.clone(),
            samples: checkpoint.samples,
        })
    }
}

fn accumulate(sum: &mut Vec<f64>, m: &Matrix) {
    let data = m.iter_rows().flatten();
    if sum.is_empty() {
        sum.extend(data);
    } else {
        for (s, x) in sum.iter_mut().zip(data) {
            *s += x;
        }
    }
}

fn average_into(m: &mut Matrix, sum: &[f64], n: usize) {
    for i in 0..m.rows() {
        let cols = m.cols();
        let row = m.row_mut(i);
        row.copy_from_slice(&sum[i * cols..(i + 1) * cols]);
        for x in row.iter_mut() {
            *x /= n as f64;
        }
        normalize(row);
    }
}

/// Runs one corpus-wide chain for `config.iterations` sweeps.
pub fn run(
    corpus: &Corpus,
    scores: &PopularityScores,
    config: &SamplerConfig,
) -> Result<TopicModel> {
    let mut chain = Chain::new(corpus, scores, config)?;
    chain.run_to_end();
    Ok(chain.estimate(corpus))
}

/// Fits an independent `config.topics`-topic model to every thread and
/// stacks them: thread `i`'s topics occupy rows `i*K..(i+1)*K` of φ, and its
/// comments put all θ mass inside that block.
pub fn run_per_thread(
    corpus: &Corpus,
    scores: &PopularityScores,
    config: &SamplerConfig,
) -> Result<TopicModel> {
    config.validate()?;
    let k = config.topics;
    let n_threads = corpus.trees().len();
    let v = corpus.vocab().len();
    let mut phi = Matrix::zeros(n_threads * k, v);
    let mut theta = Matrix::zeros(corpus.num_comments(), n_threads * k);
    for ti in 0..n_threads {
        let sub = corpus.subset(ti);
        let offset = corpus.offset(ti);
        let sub_scores =
            PopularityScores::new(scores.values()[offset..offset + sub.num_comments()].to_vec());
        let sub_config = SamplerConfig {
            seed: config.seed.wrapping_add(ti as u64),
            ..config.clone()
        };
        let model = run(&sub, &sub_scores, &sub_config)?;
        for j in 0..k {
            phi.row_mut(ti * k + j).copy_from_slice(model.phi.row(j));
        }
        for c in 0..sub.num_comments() {
            theta.row_mut(offset + c)[ti * k..(ti + 1) * k].copy_from_slice(model.theta.row(c));
        }
    }
    Ok(TopicModel {
        phi,
        theta,
        terms: corpus.vocab().terms().to_vec(),
        comment_ids: corpus.comments().map(|c| c.id.clone()).collect(),
        thread_ids: corpus.comments().map(|c| c.thread_id.clone()).collect(),
    })
}
