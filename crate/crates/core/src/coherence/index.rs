use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric pair counts over `n` tracked terms, upper triangle only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct PairCounts {
    n: usize,
    data: Vec<u64>,
}

impl PairCounts {
    fn new(n: usize) -> Self {
        Self {
            n,
            data: vec![0; n * n.saturating_sub(1) / 2],
        }
    }

    fn slot(&self, a: usize, b: usize) -> usize {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    fn get(&self, a: usize, b: usize) -> u64 {
        self.data[self.slot(a, b)]
    }

    fn bump(&mut self, a: usize, b: usize) {
        let s = self.slot(a, b);
        self.data[s] += 1;
    }

    /// Counts every unordered pair of the distinct terms in `present`.
    fn bump_all(&mut self, present: &[usize]) {
        for (x, &a) in present.iter().enumerate() {
            for &b in &present[x + 1..] {
                self.bump(a, b);
            }
        }
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// Boolean sliding-window statistics for one window size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCounts {
    size: usize,
    total: u64,
    freq: Vec<u64>,
    pairs: PairCounts,
}

impl WindowCounts {
    fn new(size: usize, n: usize) -> Self {
        Self {
            size,
            total: 0,
            freq: vec![0; n],
            pairs: PairCounts::new(n),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of windows.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn freq(&self, term: usize) -> u64 {
        self.freq[term]
    }

    /// Windows containing both terms; a term with itself is its frequency.
    pub fn co(&self, a: usize, b: usize) -> u64 {
        if a == b {
            self.freq[a]
        } else {
            self.pairs.get(a, b)
        }
    }

    fn record(&mut self, present: &[usize]) {
        self.total += 1;
        for &t in present {
            self.freq[t] += 1;
        }
        self.pairs.bump_all(present);
    }
}

/// Tracks which terms are inside the current window.
struct Window {
    counts: Vec<u32>,
    present: Vec<usize>,
}

impl Window {
    fn new(n: usize) -> Self {
        Self {
            counts: vec![0; n],
            present: Vec::new(),
        }
    }

    fn add(&mut self, t: Option<usize>) {
        if let Some(t) = t {
            if self.counts[t] == 0 {
                self.present.push(t);
            }
            self.counts[t] += 1;
        }
    }

    fn remove(&mut self, t: Option<usize>) {
        if let Some(t) = t {
            self.counts[t] -= 1;
            if self.counts[t] == 0 {
                let pos = self.present.iter().position(|&x| x == t).unwrap();
                self.present.swap_remove(pos);
            }
        }
    }

    fn clear(&mut self) {
        for &t in &self.present {
            self.counts[t] = 0;
        }
        self.present.clear();
    }
}

/// Document and sliding-window (co-)occurrence counts of a reference corpus,
/// restricted to a fixed set of tracked terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceIndex {
    terms: Vec<String>,
    #[serde(skip)]
    lookup: HashMap<String, usize>,
    docs: u64,
    doc_freq: Vec<u64>,
    doc_pairs: PairCounts,
    windows: Vec<WindowCounts>,
    epsilon: f64,
}

/// Smoothing added to counts in the PMI-family probabilities.
pub const DEFAULT_EPSILON: f64 = 1e-12;

impl CoherenceIndex {
    /// Empty index over `needed_terms` (deduplicated, sorted) and
    /// `window_sizes`.
    pub fn empty<S: AsRef<str>>(needed_terms: &[S], window_sizes: &[usize]) -> Self {
        let terms: Vec<String> = needed_terms
            .iter()
            .map(|t| t.as_ref().to_owned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let sizes: BTreeSet<usize> = window_sizes.iter().copied().filter(|&s| s > 0).collect();
        let n = terms.len();
        let lookup = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            terms,
            lookup,
            docs: 0,
            doc_freq: vec![0; n],
            doc_pairs: PairCounts::new(n),
            windows: sizes.into_iter().map(|s| WindowCounts::new(s, n)).collect(),
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Adds one reference document.
    pub fn add_document<S: AsRef<str>>(&mut self, tokens: &[S]) {
        let mapped: Vec<Option<usize>> = tokens
            .iter()
            .map(|t| self.lookup.get(t.as_ref()).copied())
            .collect();
        let n = self.terms.len();
        let mut window = Window::new(n);

        self.docs += 1;
        for &t in &mapped {
            window.add(t);
        }
        for &t in &window.present {
            self.doc_freq[t] += 1;
        }
        self.doc_pairs.bump_all(&window.present);

        let len = mapped.len();
        for wc in &mut self.windows {
            window.clear();
            let s = wc.size;
            // stride 1, trailing short windows included: one window per start
            for &t in &mapped[..s.min(len)] {
                window.add(t);
            }
            wc.record(&window.present);
            for start in 1..len {
                window.remove(mapped[start - 1]);
                if start + s - 1 < len {
                    window.add(mapped[start + s - 1]);
                }
                wc.record(&window.present);
            }
        }
    }

    /// Folds in the counts of an index built over another shard.
    pub fn merge(&mut self, other: &CoherenceIndex) -> Result<()> {
        let sizes = |ix: &CoherenceIndex| ix.windows.iter().map(|w| w.size).collect::<Vec<_>>();
        if self.terms != other.terms || sizes(self) != sizes(other) {
            return Err(Error::IndexMismatch);
        }
        self.docs += other.docs;
        for (a, b) in self.doc_freq.iter_mut().zip(&other.doc_freq) {
            *a += b;
        }
        self.doc_pairs.merge(&other.doc_pairs);
        for (a, b) in self.windows.iter_mut().zip(&other.windows) {
            a.total += b.total;
            for (x, y) in a.freq.iter_mut().zip(&b.freq) {
                *x += y;
            }
            a.pairs.merge(&b.pairs);
        }
        Ok(())
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.lookup.get(term).copied()
    }

    pub fn resolve<S: AsRef<str>>(&self, terms: &[S]) -> Result<Vec<usize>> {
        terms
            .iter()
            .map(|t| {
                self.term_index(t.as_ref())
                    .ok_or_else(|| Error::UntrackedTerm(t.as_ref().to_owned()))
            })
            .collect()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn doc_count(&self) -> u64 {
        self.docs
    }

    pub fn doc_freq(&self, term: usize) -> u64 {
        self.doc_freq[term]
    }

    pub fn doc_co(&self, a: usize, b: usize) -> u64 {
        if a == b {
            self.doc_freq[a]
        } else {
            self.doc_pairs.get(a, b)
        }
    }

    pub fn window(&self, size: usize) -> Result<&WindowCounts> {
        self.windows
            .iter()
            .find(|w| w.size == size)
            .ok_or(Error::UnindexedWindow(size))
    }

    pub fn window_sizes(&self) -> Vec<usize> {
        self.windows.iter().map(|w| w.size).collect()
    }

    /// Restores the term lookup after deserialization.
    pub fn rebuild_lookup(&mut self) {
        self.lookup = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }
}

/// Indexes a reference corpus. Fails on an empty corpus.
pub fn build_index<I, D, S>(
    reference_docs: I,
    needed_terms: &[S],
    window_sizes: &[usize],
) -> Result<CoherenceIndex>
where
    I: IntoIterator<Item = D>,
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut index = CoherenceIndex::empty(needed_terms, window_sizes);
    for doc in reference_docs {
        index.add_document(doc.as_ref());
    }
    if index.docs == 0 {
        return Err(Error::EmptyReference);
    }
    Ok(index)
}

/// Builds per-shard indexes on scoped threads and merges them in shard order.
pub fn build_index_sharded<S>(
    reference_docs: &[Vec<S>],
    needed_terms: &[S],
    window_sizes: &[usize],
    shards: usize,
) -> Result<CoherenceIndex>
where
    S: AsRef<str> + Sync,
{
    if reference_docs.is_empty() {
        return Err(Error::EmptyReference);
    }
    let chunk = reference_docs.len().div_ceil(shards.max(1));
    let parts: Vec<CoherenceIndex> = std::thread::scope(|scope| {
        let handles: Vec<_> = reference_docs
            .chunks(chunk)
            .map(|docs| {
                scope.spawn(move || {
                    let mut ix = CoherenceIndex::empty(needed_terms, window_sizes);
                    for d in docs {
                        ix.add_document(d);
                    }
                    ix
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("index shard panicked"))
            .collect()
    });
    let mut parts = parts.into_iter();
    let mut index = parts.next().expect("at least one shard");
    for p in parts {
        index.merge(&p)?;
    }
    Ok(index)
}
