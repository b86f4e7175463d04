use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One line of the generic-jsonl format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub parent_id: Option<String>,
    pub thread_id: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub parent_id: Option<String>,
    pub thread_id: String,
    pub raw_text: String,
    /// Vocabulary indices; filled when the tree joins a corpus.
    pub tokens: Vec<usize>,
    /// Root is level 1.
    pub level: usize,
}

/// A validated reply tree. Nodes are stored in input order and addressed by
/// their position (`usize`) inside the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscussionTree {
    thread_id: String,
    root: usize,
    comments: Vec<Comment>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
}

/// Result of assembling one thread's records.
#[derive(Debug)]
pub struct TreeBuild {
    /// `None` when every record was an orphan.
    pub tree: Option<DiscussionTree>,
    pub orphans_dropped: usize,
}

impl DiscussionTree {
    /// Validates the parent links of one thread and assembles the tree.
    ///
    /// Records whose parent never appears are dropped together with their
    /// whole subtree. Cycles and multiple roots reject the thread.
    pub fn build(thread_id: &str, records: Vec<Record>) -> Result<TreeBuild> {
        let reject = |reason: String| Error::Thread {
            thread: thread_id.to_owned(),
            reason,
        };
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if index.insert(r.id.clone(), i).is_some() {
                return Err(reject(format!("duplicate id `{}`", r.id)));
            }
        }

        let n = records.len();
        let mut children = vec![Vec::new(); n];
        let mut roots = Vec::new();
        let mut orphan_heads = Vec::new();
        for (i, r) in records.iter().enumerate() {
            match &r.parent_id {
                None => roots.push(i),
                Some(p) => match index.get(p) {
                    Some(&pi) => children[pi].push(i),
                    None => orphan_heads.push(i),
                },
            }
        }

        let mut reached = vec![false; n];
        let mut from_root = vec![false; n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &r in &roots {
            reached[r] = true;
            from_root[r] = true;
            queue.push_back(r);
        }
        for &o in &orphan_heads {
            reached[o] = true;
            queue.push_back(o);
        }
        while let Some(u) = queue.pop_front() {
            for &c in &children[u] {
                if !reached[c] {
                    reached[c] = true;
                    from_root[c] = from_root[u];
                    queue.push_back(c);
                }
            }
        }
        if let Some(i) = reached.iter().position(|&r| !r) {
            return Err(reject(format!(
                "cyclic parent chain through `{}`",
                records[i].id
            )));
        }
        if roots.len() > 1 {
            return Err(reject(format!("{} root comments", roots.len())));
        }
        let orphans_dropped = from_root.iter().filter(|&&f| !f).count();
        if roots.is_empty() {
            return Ok(TreeBuild {
                tree: None,
                orphans_dropped,
            });
        }

        let kept: Vec<Record> = records
            .into_iter()
            .zip(&from_root)
            .filter_map(|(r, &keep)| keep.then_some(r))
            .collect();
        Ok(TreeBuild {
            tree: Some(Self::assemble(thread_id, kept)),
            orphans_dropped,
        })
    }

    // Records are known to form a single rooted tree.
    fn assemble(thread_id: &str, records: Vec<Record>) -> Self {
        let index: HashMap<String, usize> = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        let n = records.len();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut root = 0;
        for (i, r) in records.iter().enumerate() {
            match &r.parent_id {
                Some(p) => {
                    let pi = index[p];
                    parent[i] = Some(pi);
                    children[pi].push(i);
                }
                None => root = i,
            }
        }
        let comments = records
            .into_iter()
            .map(|r| Comment {
                id: r.id,
                parent_id: r.parent_id,
                thread_id: thread_id.to_owned(),
                raw_text: r.body,
                tokens: Vec::new(),
                level: 0,
            })
            .collect();
        let mut tree = Self {
            thread_id: thread_id.to_owned(),
            root,
            comments,
            parent,
            children,
            index,
        };
        for (i, level) in tree.levels().into_iter().enumerate() {
            tree.comments[i].level = level;
        }
        tree
    }

    pub fn thread_id(&self) -> &str {
        &self.thread_id
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.comments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn comment(&self, node: usize) -> &Comment {
        &self.comments[node]
    }

    pub(crate) fn comment_mut(&mut self, node: usize) -> &mut Comment {
        &mut self.comments[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn node_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Per-node level, root = 1, computed top-down from the root.
    fn levels(&self) -> Vec<usize> {
        let mut levels = vec![0; self.len()];
        levels[self.root] = 1;
        let mut queue = VecDeque::from([self.root]);
        while let Some(u) = queue.pop_front() {
            for &c in &self.children[u] {
                levels[c] = levels[u] + 1;
                queue.push_back(c);
            }
        }
        levels
    }

    pub fn compute_levels(&self) -> HashMap<String, usize> {
        self.levels()
            .into_iter()
            .enumerate()
            .map(|(i, l)| (self.comments[i].id.clone(), l))
            .collect()
    }

    pub fn depth(&self) -> usize {
        self.comments.iter().map(|c| c.level).max().unwrap_or(0)
    }

    /// Number of comments below the root.
    pub fn descendant_count(&self) -> usize {
        self.len() - 1
    }

    /// Node positions from the root down to `node`, inclusive.
    pub fn path_from_root(&self, node: usize) -> Vec<usize> {
        let mut path = vec![node];
        let mut cur = node;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Serializes back to generic-jsonl records in storage order.
    pub fn to_records(&self) -> Vec<Record> {
        self.comments
            .iter()
            .map(|c| Record {
                id: c.id.clone(),
                parent_id: c.parent_id.clone(),
                thread_id: self.thread_id.clone(),
                body: c.raw_text.clone(),
            })
            .collect()
    }
}
