use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::tree::{DiscussionTree, Record};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    #[default]
    GenericJsonl,
    Pushshift,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "generic-jsonl" | "jsonl" => Ok(Self::GenericJsonl),
            "pushshift" => Ok(Self::Pushshift),
            other => Err(format!("unknown input format `{other}`")),
        }
    }
}

/// Trees plus everything that was discarded on the way.
#[derive(Debug, Default)]
pub struct ParseReport {
    pub trees: Vec<DiscussionTree>,
    pub duplicates: usize,
    pub orphans_dropped: usize,
    /// (thread id, reason)
    pub rejected: Vec<(String, String)>,
}

/// Reads line-delimited records and assembles one tree per thread.
///
/// Threads are emitted in order of first appearance; comments keep file
/// order. Blank lines are ignored, malformed lines are a hard error.
pub fn parse_threads<R: BufRead>(reader: R, format: InputFormat) -> Result<ParseReport> {
    let mut report = ParseReport::default();
    let mut thread_order: Vec<String> = Vec::new();
    let mut by_thread: HashMap<String, Vec<Record>> = HashMap::new();
    let mut seen: HashSet<String> = HashSet::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Record {
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = match format {
            InputFormat::GenericJsonl => {
                serde_json::from_str::<Record>(&line).map_err(|e| Error::Record {
                    line: lineno + 1,
                    reason: e.to_string(),
                })?
            }
            InputFormat::Pushshift => pushshift_record(&line, lineno + 1)?,
        };
        if !seen.insert(record.id.clone()) {
            warn!("line {}: duplicate id `{}` ignored", lineno + 1, record.id);
            report.duplicates += 1;
            continue;
        }
        by_thread
            .entry(record.thread_id.clone())
            .or_insert_with(|| {
                thread_order.push(record.thread_id.clone());
                Vec::new()
            })
            .push(record);
    }

    for thread in thread_order {
        let mut records = by_thread.remove(&thread).unwrap_or_default();
        if format == InputFormat::Pushshift {
            add_submission_root(&thread, &mut records, &seen);
        }
        match DiscussionTree::build(&thread, records) {
            Ok(built) => {
                if built.orphans_dropped > 0 {
                    warn!(
                        "thread `{thread}`: dropped {} orphaned comments",
                        built.orphans_dropped
                    );
                }
                report.orphans_dropped += built.orphans_dropped;
                report.trees.extend(built.tree);
            }
            Err(Error::Thread { thread, reason }) => {
                warn!("thread `{thread}` rejected: {reason}");
                report.rejected.push((thread, reason));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

fn strip_fullname(id: &str) -> &str {
    id.strip_prefix("t1_")
        .or_else(|| id.strip_prefix("t3_"))
        .unwrap_or(id)
}

fn pushshift_record(line: &str, lineno: usize) -> Result<Record> {
    let bad = |reason: &str| Error::Record {
        line: lineno,
        reason: reason.to_owned(),
    };
    let v: Value = serde_json::from_str(line).map_err(|e| Error::Record {
        line: lineno,
        reason: e.to_string(),
    })?;
    let field = |k: &str| v.get(k).and_then(Value::as_str);
    let id = field("id").ok_or_else(|| bad("missing `id`"))?;
    let parent_id = field("parent_id").map(|p| strip_fullname(p).to_owned());
    let thread_id = match (field("link_id"), &parent_id) {
        (Some(link), _) => strip_fullname(link).to_owned(),
        // a submission is its own thread
        (None, None) => id.to_owned(),
        (None, Some(_)) => return Err(bad("comment without `link_id`")),
    };
    let body = match field("body") {
        Some(b) => b.to_owned(),
        None => {
            let title = field("title").unwrap_or_default();
            let selftext = field("selftext").unwrap_or_default();
            if selftext.is_empty() {
                title.to_owned()
            } else {
                format!("{title}\n{selftext}")
            }
        }
    };
    Ok(Record {
        id: id.to_owned(),
        parent_id,
        thread_id,
        body,
    })
}

/// Comment dumps rarely carry the submission itself; top-level comments point
/// at `t3_<thread>`, so an empty root is synthesized for them.
fn add_submission_root(thread: &str, records: &mut Vec<Record>, seen: &HashSet<String>) {
    let has_root = records.iter().any(|r| r.parent_id.is_none());
    let wants_root = records
        .iter()
        .any(|r| r.parent_id.as_deref() == Some(thread));
    if !has_root && wants_root && !seen.contains(thread) {
        records.insert(
            0,
            Record {
                id: thread.to_owned(),
                parent_id: None,
                thread_id: thread.to_owned(),
                body: String::new(),
            },
        );
    }
}

/// Writes trees as generic-jsonl.
pub fn write_threads<W: Write>(mut out: W, trees: &[DiscussionTree]) -> Result<()> {
    for tree in trees {
        for rec in tree.to_records() {
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")
                .map_err(|e| Error::io("<threads output>", e))?;
        }
    }
    Ok(())
}
