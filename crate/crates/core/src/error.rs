use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance has {got} values but the tree expects {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("variable x{var} appears with both polarities")]
    InconsistentLiterals { var: usize },

    #[error("variable x{var} is out of range for {n} features")]
    VariableOutOfRange { var: usize, n: usize },

    #[error("variable x{var} is repeated on a root-to-leaf path (node {node})")]
    ReadOnceViolation { var: usize, node: usize },

    #[error("node {node} refers to missing child {child}")]
    DanglingChild { node: usize, child: usize },

    #[error("root {0} does not exist")]
    MissingRoot(usize),

    #[error("node {node} has {parents} parents")]
    NotATree { node: usize, parents: usize },

    #[error("duplicate node id {0}")]
    DuplicateNodeId(i64),

    #[error("malformed tree file: {0}")]
    MalformedTree(String),

    #[error("the instance is classified 0; negate the tree first")]
    NegativeInstance,

    #[error("term is not a subset of the instance term")]
    NotSubsetOfAnchor,

    #[error("seed does not hit every clause, so it is not an implicant")]
    SeedNotImplicant,

    #[error("the variable universe does not contain x{0}")]
    UniverseTooSmall(usize),

    #[error("delta must lie in (0, 1], got {0}")]
    InvalidDelta(String),

    #[error("cap must be positive")]
    ZeroCap,

    #[error("{vars} variables exceed the oracle limit of {limit}")]
    OracleLimit { vars: usize, limit: usize },

    #[error("invalid instance string: {0}")]
    InvalidInstance(String),

    #[error("dataset error at row {row}, column {column}: {message}")]
    DatasetCell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("{folds} folds need at least {needed} rows, got {rows}")]
    TooFewRows {
        folds: usize,
        rows: usize,
        needed: usize,
    },

    #[error("cross-validation needs at least 2 folds, got {0}")]
    InvalidFolds(usize),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
