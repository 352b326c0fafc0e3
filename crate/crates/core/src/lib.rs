//! Explanations for the decisions of Boolean decision trees: sufficient,
//! minimal and probable reasons, contrastive explanations, explanatory
//! features, and enumeration of all sufficient reasons.
//!
//! ```
//! use reasonkit::{abductive, restriction, tree};
//!
//! let t = tree::cattleya();
//! let x = "1111".parse().unwrap();
//! let g = restriction::restrict(&t, &x).unwrap();
//! assert_eq!(abductive::minimal_reason(&g).term.to_string(), "x0 & x3");
//! ```

pub mod abductive;
pub mod contrastive;
pub mod error;
mod hitting;
pub mod logic;
pub mod oracles;
pub mod pipeline;
pub mod restriction;
pub mod tree;
pub mod tree_format;
pub mod verify;

pub use error::{Error, Result};
pub use logic::{Clause, Instance, Literal, Term};
pub use restriction::{restrict, MonotoneClauseSet};
pub use tree::{DecisionTree, Node, NodeId, TreeBuilder};
