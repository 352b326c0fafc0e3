//! JSON tree files.
//!
//! ```json
//! {"n": 2, "root": 0, "nodes": [
//!   {"id": 0, "var": 1, "left": 1, "right": 2},
//!   {"id": 1, "leaf": 0},
//!   {"id": 2, "leaf": 1}
//! ]}
//! ```
//!
//! Node ids are arbitrary integers; they are mapped to pool positions in the
//! order the records appear. Serialization writes ids equal to positions.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{DecisionTree, Node};

#[derive(Debug, Serialize, Deserialize)]
struct TreeFile {
    n: usize,
    root: i64,
    nodes: Vec<NodeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum NodeRecord {
    Internal {
        id: i64,
        var: usize,
        left: i64,
        right: i64,
    },
    Leaf {
        id: i64,
        leaf: u8,
    },
}

pub fn parse_tree(text: &str) -> Result<DecisionTree> {
    let file: TreeFile =
        serde_json::from_str(text).map_err(|e| Error::MalformedTree(e.to_string()))?;

    let mut index = HashMap::with_capacity(file.nodes.len());
    for (pos, record) in file.nodes.iter().enumerate() {
        let id = match *record {
            NodeRecord::Internal { id, .. } | NodeRecord::Leaf { id, .. } => id,
        };
        if index.insert(id, pos).is_some() {
            return Err(Error::DuplicateNodeId(id));
        }
    }
    let resolve = |node: i64, child: i64| -> Result<usize> {
        index.get(&child).copied().ok_or(Error::DanglingChild {
            node: node.max(0) as usize,
            child: child.max(0) as usize,
        })
    };

    let mut nodes = Vec::with_capacity(file.nodes.len());
    for record in &file.nodes {
        nodes.push(match *record {
            NodeRecord::Internal {
                id,
                var,
                left,
                right,
            } => Node::Internal {
                var,
                left: resolve(id, left)?,
                right: resolve(id, right)?,
            },
            NodeRecord::Leaf { leaf: 0, .. } => Node::Leaf(false),
            NodeRecord::Leaf { leaf: 1, .. } => Node::Leaf(true),
            NodeRecord::Leaf { id, leaf } => {
                return Err(Error::MalformedTree(format!(
                    "node {id} has leaf label {leaf}; expected 0 or 1"
                )))
            }
        });
    }
    let root = *index
        .get(&file.root)
        .ok_or(Error::MissingRoot(file.root.max(0) as usize))?;
    DecisionTree::new(file.n, nodes, root)
}

/// One node record per line, ids equal to pool positions.
pub fn serialize_tree(tree: &DecisionTree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"n\": {},", tree.n());
    let _ = writeln!(out, "  \"root\": {},", tree.root());
    let _ = writeln!(out, "  \"nodes\": [");
    let count = tree.nodes().len();
    for (id, node) in tree.nodes().iter().enumerate() {
        let record = match *node {
            Node::Internal { var, left, right } => NodeRecord::Internal {
                id: id as i64,
                var,
                left: left as i64,
                right: right as i64,
            },
            Node::Leaf(label) => NodeRecord::Leaf {
                id: id as i64,
                leaf: u8::from(label),
            },
        };
        let line = serde_json::to_string(&record).expect("node records always serialize");
        let sep = if id + 1 < count { "," } else { "" };
        let _ = writeln!(out, "    {line}{sep}");
    }
    let _ = writeln!(out, "  ]");
    out.push('}');
    out.push('\n');
    out
}

pub fn read_tree(path: impl AsRef<Path>) -> Result<DecisionTree> {
    parse_tree(&std::fs::read_to_string(path)?)
}

pub fn write_tree(tree: &DecisionTree, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serialize_tree(tree))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::cattleya;

    const SMALL: &str = r#"{"n": 2, "root": 10, "nodes": [
        {"id": 10, "var": 1, "left": 11, "right": 12},
        {"id": 11, "leaf": 0},
        {"id": 12, "leaf": 1}
    ]}"#;

    #[test]
    fn parses_arbitrary_ids() {
        let t = parse_tree(SMALL).unwrap();
        assert_eq!(t.size(), 3);
        assert_eq!(
            t.node(t.root()),
            Node::Internal {
                var: 1,
                left: 1,
                right: 2
            }
        );
    }

    #[test]
    fn round_trip_is_identity_on_canonical_files() {
        let text = serialize_tree(&cattleya());
        let back = parse_tree(&text).unwrap();
        assert_eq!(back, cattleya());
        assert_eq!(serialize_tree(&back), text);
    }

    #[test]
    fn diagnostics() {
        assert!(matches!(parse_tree("{"), Err(Error::MalformedTree(_))));
        let dangling = r#"{"n": 1, "root": 0, "nodes": [{"id": 0, "var": 0, "left": 1, "right": 2}, {"id": 1, "leaf": 0}]}"#;
        assert!(matches!(
            parse_tree(dangling),
            Err(Error::DanglingChild { node: 0, child: 2 })
        ));
        let repeated = r#"{"n": 1, "root": 0, "nodes": [
            {"id": 0, "var": 0, "left": 1, "right": 2},
            {"id": 1, "leaf": 0},
            {"id": 2, "var": 0, "left": 3, "right": 4},
            {"id": 3, "leaf": 0},
            {"id": 4, "leaf": 1}]}"#;
        assert!(matches!(
            parse_tree(repeated),
            Err(Error::ReadOnceViolation { var: 0, node: 2 })
        ));
        let bad_label = r#"{"n": 1, "root": 0, "nodes": [{"id": 0, "leaf": 2}]}"#;
        assert!(matches!(
            parse_tree(bad_label),
            Err(Error::MalformedTree(_))
        ));
        let dup = r#"{"n": 1, "root": 0, "nodes": [{"id": 0, "leaf": 1}, {"id": 0, "leaf": 0}]}"#;
        assert!(matches!(parse_tree(dup), Err(Error::DuplicateNodeId(0))));
    }
}
