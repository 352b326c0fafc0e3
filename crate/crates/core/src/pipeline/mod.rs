//! Dataset ingestion, a Gini tree learner, cross-validation and batch
//! explanation with aggregate statistics.

pub mod batch;
pub mod cv;
pub mod dataset;
pub mod learner;

pub use batch::{
    batch_explain, explain_instance, BatchConfig, BatchOutput, BatchStats, ExplainKind,
    ReasonReport,
};
pub use cv::{cross_validate, fold_partition, FoldResult};
pub use dataset::{
    candidate_thresholds, ingest_csv, BinarizedDataset, Column, ColumnData, Dataset, FeatureMap,
    Predicate,
};
pub use learner::{learn_tree, LearnedTree};
