use serde::{Deserialize, Serialize};

use super::index::{CoherenceIndex, WindowCounts};
use crate::error::{Error, Result};

/// Window size used by each window-based measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureWindows {
    pub npmi: usize,
    pub uci: usize,
    pub cv: usize,
    pub ca: usize,
    pub cp: usize,
}

impl Default for MeasureWindows {
    fn default() -> Self {
        Self {
            npmi: 10,
            uci: 10,
            cv: 110,
            ca: 5,
            cp: 70,
        }
    }
}

impl MeasureWindows {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.npmi, self.uci, self.cv, self.ca, self.cp];
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Smoothed window probability `(count + ε) / (N + ε)`.
fn prob(count: u64, total: u64, eps: f64) -> f64 {
    (count as f64 + eps) / (total as f64 + eps)
}

struct Probs<'a> {
    w: &'a WindowCounts,
    eps: f64,
}

impl Probs<'_> {
    fn single(&self, a: usize) -> f64 {
        prob(self.w.freq(a), self.w.total(), self.eps)
    }

    fn joint(&self, a: usize, b: usize) -> f64 {
        prob(self.w.co(a, b), self.w.total(), self.eps)
    }

    fn pmi(&self, a: usize, b: usize) -> f64 {
        (self.joint(a, b) / (self.single(a) * self.single(b))).ln()
    }

    fn npmi(&self, a: usize, b: usize) -> f64 {
        let joint = self.joint(a, b);
        let denom = -joint.ln();
        if denom <= f64::EPSILON {
            // both words occur in every window
            return 1.0;
        }
        (self.pmi(a, b) / denom).clamp(-1.0, 1.0)
    }
}

fn probs(index: &CoherenceIndex, window: usize) -> Result<Probs<'_>> {
    Ok(Probs {
        w: index.window(window)?,
        eps: index.epsilon(),
    })
}

fn resolve_top<S: AsRef<str>>(top: &[S], index: &CoherenceIndex) -> Result<Vec<usize>> {
    if top.len() < 2 {
        return Err(Error::TooFewWords(top.len()));
    }
    index.resolve(top)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn unordered_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// NPMI of one word pair over windows of `window` tokens.
pub fn npmi_pair(a: &str, b: &str, index: &CoherenceIndex, window: usize) -> Result<f64> {
    let ids = index.resolve(&[a, b])?;
    Ok(probs(index, window)?.npmi(ids[0], ids[1]))
}

/// Mean NPMI over all unordered pairs of the top words.
pub fn c_npmi<S: AsRef<str>>(top: &[S], index: &CoherenceIndex, window: usize) -> Result<f64> {
    let ids = resolve_top(top, index)?;
    let p = probs(index, window)?;
    Ok(mean(
        unordered_pairs(ids.len()).map(|(i, j)| p.npmi(ids[i], ids[j])),
    ))
}

/// Mean PMI over all unordered pairs of the top words.
pub fn c_uci<S: AsRef<str>>(top: &[S], index: &CoherenceIndex, window: usize) -> Result<f64> {
    let ids = resolve_top(top, index)?;
    let p = probs(index, window)?;
    Ok(mean(
        unordered_pairs(ids.len()).map(|(i, j)| p.pmi(ids[i], ids[j])),
    ))
}

/// UMass value plus the number of pairs skipped because the preceding word
/// never occurs in the reference documents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UMass {
    pub value: f64,
    pub skipped_pairs: usize,
}

/// Mean over `j < i` of `ln((D(w_i, w_j) + 1) / D(w_j))` on document counts.
/// `top` must be in descending topic probability.
pub fn c_umass_detailed<S: AsRef<str>>(top: &[S], index: &CoherenceIndex) -> Result<UMass> {
    let ids = resolve_top(top, index)?;
    let mut skipped_pairs = 0;
    let mut values = Vec::new();
    for i in 1..ids.len() {
        for j in 0..i {
            let dj = index.doc_freq(ids[j]);
            if dj == 0 {
                skipped_pairs += 1;
                continue;
            }
            let co = index.doc_co(ids[i], ids[j]);
            values.push(((co as f64 + 1.0) / dj as f64).ln());
        }
    }
    Ok(UMass {
        value: mean(values.into_iter()),
        skipped_pairs,
    })
}

pub fn c_umass<S: AsRef<str>>(top: &[S], index: &CoherenceIndex) -> Result<f64> {
    Ok(c_umass_detailed(top, index)?.value)
}

fn npmi_vectors(ids: &[usize], p: &Probs) -> Vec<Vec<f64>> {
    ids.iter()
        .map(|&a| ids.iter().map(|&b| p.npmi(a, b)).collect())
        .collect()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Mean cosine between each word's NPMI context vector and the sum of all
/// context vectors.
pub fn c_v<S: AsRef<str>>(top: &[S], index: &CoherenceIndex, window: usize) -> Result<f64> {
    let ids = resolve_top(top, index)?;
    let vectors = npmi_vectors(&ids, &probs(index, window)?);
    let mut total = vec![0.0; ids.len()];
    for v in &vectors {
        for (t, x) in total.iter_mut().zip(v) {
            *t += x;
        }
    }
    Ok(mean(vectors.iter().map(|v| cosine(v, &total))))
}

/// Mean cosine between the NPMI context vectors of every ordered pair of
/// distinct top words.
pub fn c_a<S: AsRef<str>>(top: &[S], index: &CoherenceIndex, window: usize) -> Result<f64> {
    let ids = resolve_top(top, index)?;
    let vectors = npmi_vectors(&ids, &probs(index, window)?);
    let n = ids.len();
    Ok(mean(
        (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| cosine(&vectors[i], &vectors[j])),
    ))
}

/// Fitelson confirmation of each word by its immediate predecessor.
pub fn c_p<S: AsRef<str>>(top: &[S], index: &CoherenceIndex, window: usize) -> Result<f64> {
    let ids = resolve_top(top, index)?;
    let w = index.window(window)?;
    let eps = index.epsilon();
    let n = w.total();
    Ok(mean((1..ids.len()).map(|i| {
        let (cur, prev) = (ids[i], ids[i - 1]);
        let (n_cur, n_prev, n_both) = (w.freq(cur), w.freq(prev), w.co(cur, prev));
        if n_cur == 0 {
            return 0.0;
        }
        let given = if n_prev == 0 {
            0.0
        } else {
            prob(n_both, n_prev, eps)
        };
        let given_not = if n_prev == n {
            0.0
        } else {
            prob(n_cur - n_both, n - n_prev, eps)
        };
        if given + given_not == 0.0 {
            0.0
        } else {
            (given - given_not) / (given + given_not)
        }
    })))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCoherence {
    pub c_v: f64,
    pub c_p: f64,
    pub c_uci: f64,
    pub c_umass: f64,
    pub c_npmi: f64,
    pub c_a: f64,
    pub umass_skipped_pairs: usize,
}

/// All six measures for one list of top words.
pub fn score_topic<S: AsRef<str>>(
    top: &[S],
    index: &CoherenceIndex,
    windows: &MeasureWindows,
) -> Result<TopicCoherence> {
    let umass = c_umass_detailed(top, index)?;
    Ok(TopicCoherence {
        c_v: c_v(top, index, windows.cv)?,
        c_p: c_p(top, index, windows.cp)?,
        c_uci: c_uci(top, index, windows.uci)?,
        c_umass: umass.value,
        c_npmi: c_npmi(top, index, windows.npmi)?,
        c_a: c_a(top, index, windows.ca)?,
        umass_skipped_pairs: umass.skipped_pairs,
    })
}
