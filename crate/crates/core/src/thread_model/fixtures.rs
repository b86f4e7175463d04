//! Small hand-built threads used by tests, examples and the CLI smoke runs.

use super::tree::{DiscussionTree, Record};

fn record(thread: &str, id: &str, parent: Option<&str>, body: &str) -> Record {
    Record {
        id: id.to_owned(),
        parent_id: parent.map(str::to_owned),
        thread_id: thread.to_owned(),
        body: body.to_owned(),
    }
}

/// Ten-comment thread: root 0 with replies 1, 6 and 8; comment 9 is an
/// emoji-only reply.
pub fn emoji_thread_records() -> Vec<Record> {
    let t = "roads";
    vec![
        record(t, "0", None, "What concept completely blows your mind?"),
        record(
            t,
            "1",
            Some("0"),
            "How all roads work by being connected up to each other",
        ),
        record(
            t,
            "2",
            Some("1"),
            "Roads connected everywhere, you can drive from here to anywhere",
        ),
        record(t, "3", Some("2"), "Except islands, roads stop at the water"),
        record(
            t,
            "4",
            Some("1"),
            "Bridges and ferries connect those roads too",
        ),
        record(
            t,
            "5",
            Some("4"),
            "Ferries carry cars, so the roads keep working",
        ),
        record(
            t,
            "6",
            Some("0"),
            "The concept of infinity completely blows my mind",
        ),
        record(
            t,
            "7",
            Some("6"),
            "Some infinities are bigger than other infinities",
        ),
        record(t, "8", Some("0"), "Honestly the size of the universe"),
        record(t, "9", Some("8"), "\u{1F92F}\u{1F92F}"),
    ]
}

pub fn emoji_thread() -> DiscussionTree {
    DiscussionTree::build("roads", emoji_thread_records())
        .expect("fixture is a valid tree")
        .tree
        .expect("fixture has a root")
}

/// Four-level tree: 1 → {2, 3, 4}; 2 → 5 → 8; 3 → {6, 7}; 7 → 9.
pub fn four_level_records() -> Vec<Record> {
    let t = "levels";
    vec![
        record(t, "1", None, "alpha beta gamma"),
        record(t, "2", Some("1"), "alpha delta"),
        record(t, "3", Some("1"), "beta gamma"),
        record(t, "4", Some("1"), "epsilon"),
        record(t, "5", Some("2"), "delta alpha"),
        record(t, "6", Some("3"), "gamma"),
        record(t, "7", Some("3"), "beta"),
        record(t, "8", Some("5"), "delta"),
        record(t, "9", Some("7"), "beta gamma"),
    ]
}

pub fn four_level_thread() -> DiscussionTree {
    DiscussionTree::build("levels", four_level_records())
        .expect("fixture is a valid tree")
        .tree
        .expect("fixture has a root")
}
