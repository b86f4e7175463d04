//! Per-comment topic labels from root-path blending of topic distributions.
//!
//! A comment at level `l` mixes the raw distributions of its root path,
//! the comment itself weighted `w(1)`, its parent `w(2)` and the root `w(l)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::popularity::WeightSequence;
use crate::sampler::TopicModel;
use crate::thread_model::{Corpus, DiscussionTree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicAssignment {
    pub comment_id: String,
    pub thread_id: String,
    pub topic: usize,
    pub blended: Vec<f64>,
    pub raw: Vec<f64>,
}

/// Ids from the root down to `id`.
pub fn path_to_root(tree: &DiscussionTree, id: &str) -> Result<Vec<String>> {
    let node = tree
        .node_of(id)
        .ok_or_else(|| Error::UnknownComment(id.to_owned()))?;
    Ok(tree
        .path_from_root(node)
        .into_iter()
        .map(|n| tree.comment(n).id.clone())
        .collect())
}

/// Weighted average of root-to-node distributions with explicit weights,
/// `weights[j]` applying to `path[j]`. Returns the node's own distribution
/// unchanged for a one-element path or when every weight is zero.
pub fn blend_with_weights(path: &[&[f64]], weights: &[f64]) -> Vec<f64> {
    assert!(!path.is_empty(), "empty path");
    assert_eq!(path.len(), weights.len());
    let own = path[path.len() - 1];
    let total: f64 = weights.iter().sum();
    if path.len() == 1 || total <= 0.0 {
        return own.to_vec();
    }
    let mut out = vec![0.0; own.len()];
    for (dist, &w) in path.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (o, &x) in out.iter_mut().zip(dist.iter()) {
            *o += w * x;
        }
    }
    for o in &mut out {
        *o /= total;
    }
    out
}

/// Blends `path_thetas` (root first) with the level weights of `seq`.
pub fn blend_distribution(path_thetas: &[&[f64]], seq: &WeightSequence) -> Vec<f64> {
    let l = path_thetas.len();
    let weights: Vec<f64> = (1..=l).map(|j| seq.weight_at(l - j + 1)).collect();
    blend_with_weights(path_thetas, &weights)
}

/// First index of the largest entry.
pub fn argmax(dist: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in dist.iter().enumerate() {
        if x > dist[best] {
            best = k;
        }
    }
    best
}

/// Blended assignment for every comment of the corpus, in global order.
pub fn assign_all(
    model: &TopicModel,
    corpus: &Corpus,
    seq: &WeightSequence,
) -> Result<Vec<TopicAssignment>> {
    check_coverage(model, corpus)?;
    let mut out = Vec::with_capacity(corpus.num_comments());
    for (ti, tree) in corpus.trees().iter().enumerate() {
        let offset = corpus.offset(ti);
        for node in 0..tree.len() {
            let path: Vec<&[f64]> = tree
                .path_from_root(node)
                .into_iter()
                .map(|n| model.theta.row(offset + n))
                .collect();
            let blended = blend_distribution(&path, seq);
            out.push(make(tree, node, model.theta.row(offset + node), blended));
        }
    }
    Ok(out)
}

/// Assignment by each comment's own distribution only.
pub fn assign_raw(model: &TopicModel, corpus: &Corpus) -> Result<Vec<TopicAssignment>> {
    check_coverage(model, corpus)?;
    let mut out = Vec::with_capacity(corpus.num_comments());
    for (ti, tree) in corpus.trees().iter().enumerate() {
        let offset = corpus.offset(ti);
        for node in 0..tree.len() {
            let raw = model.theta.row(offset + node);
            out.push(make(tree, node, raw, raw.to_vec()));
        }
    }
    Ok(out)
}

fn make(tree: &DiscussionTree, node: usize, raw: &[f64], blended: Vec<f64>) -> TopicAssignment {
    let c = tree.comment(node);
    TopicAssignment {
        comment_id: c.id.clone(),
        thread_id: c.thread_id.clone(),
        topic: argmax(&blended),
        blended,
        raw: raw.to_vec(),
    }
}

fn check_coverage(model: &TopicModel, corpus: &Corpus) -> Result<()> {
    if model.theta.rows() != corpus.num_comments() {
        return Err(Error::Coverage(format!(
            "model has {} comment rows, corpus has {} comments",
            model.theta.rows(),
            corpus.num_comments()
        )));
    }
    if let Some((i, c)) = corpus
        .comments()
        .enumerate()
        .find(|(i, c)| model.comment_ids[*i] != c.id)
    {
        return Err(Error::Coverage(format!(
            "row {i} of the model is `{}`, corpus has `{}`",
            model.comment_ids[i], c.id
        )));
    }
    Ok(())
}

/// JSON Lines, one assignment per line.
pub fn write_jsonl<W: Write>(mut out: W, assignments: &[TopicAssignment]) -> Result<()> {
    for a in assignments {
        serde_json::to_writer(&mut out, a)?;
        out.write_all(b"\n")
            .map_err(|e| Error::io("<assignments output>", e))?;
    }
    Ok(())
}
