use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }
}

/// Estimated topic-word and comment-topic distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    /// K x V, rows sum to one.
    pub phi: Matrix,
    /// C x K, rows sum to one.
    pub theta: Matrix,
    pub terms: Vec<String>,
    pub comment_ids: Vec<String>,
    pub thread_ids: Vec<String>,
}

impl TopicModel {
    pub fn num_topics(&self) -> usize {
        self.phi.rows()
    }

    pub fn top_words(&self, t: usize) -> Vec<Vec<String>> {
        top_words(&self.phi, &self.terms, t)
    }

    /// `topic,term,probability`
    pub fn write_phi_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["topic", "term", "probability"])?;
        for (k, row) in self.phi.iter_rows().enumerate() {
            for (term, p) in self.terms.iter().zip(row) {
                w.write_record([&k.to_string(), term, &p.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<phi csv>", e))?;
        Ok(())
    }

    /// `comment_id,topic,probability`
    pub fn write_theta_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["comment_id", "topic", "probability"])?;
        for (id, row) in self.comment_ids.iter().zip(self.theta.iter_rows()) {
            for (k, p) in row.iter().enumerate() {
                w.write_record([id, &k.to_string(), &p.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<theta csv>", e))?;
        Ok(())
    }

    /// JSON list of `{topic, words: [{term, probability}]}`.
    pub fn write_top_words_json<W: Write>(&self, t: usize, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Word<'a> {
            term: &'a str,
            probability: f64,
        }
        #[derive(Serialize)]
        struct Topic<'a> {
            topic: usize,
            words: Vec<Word<'a>>,
        }
        let report: Vec<Topic> = (0..self.num_topics())
            .map(|k| Topic {
                topic: k,
                words: top_indices(self.phi.row(k), t)
                    .into_iter()
                    .map(|w| Word {
                        term: &self.terms[w],
                        probability: self.phi.get(k, w),
                    })
                    .collect(),
            })
            .collect();
        serde_json::to_writer_pretty(out, &report)?;
        Ok(())
    }
}

/// Positions of the `t` largest entries, descending, ties to the lower index.
pub fn top_indices(row: &[f64], t: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| {
        row[b]
            .partial_cmp(&row[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx.truncate(t);
    idx
}

/// The `t` most probable terms of every topic.
pub fn top_words(phi: &Matrix, terms: &[String], t: usize) -> Vec<Vec<String>> {
    phi.iter_rows()
        .map(|row| {
            top_indices(row, t)
                .into_iter()
                .map(|w| terms[w].clone())
                .collect()
        })
        .collect()
}
