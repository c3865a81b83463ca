//! Error types shared across the library.

use thiserror::Error;

use crate::word::Word;

/// A string could not be parsed as a binary word.
#[derive(Debug, Clone, Error)]
#[error("invalid letter {offending:?}, expected '0' or '1'")]
pub struct WordParseError {
    pub offending: char,
}

/// Errors raised while validating or querying a context tree.
#[derive(Debug, Clone, Error)]
pub enum TreeError {
    /// Two finite contexts where one is a prefix of the other.
    #[error("contexts {shorter} and {longer} violate prefix-freeness")]
    NotPrefixFree { shorter: Word, longer: Word },

    /// An internal node with exactly one child.
    #[error("node {node} has exactly one child; the tree is not saturated")]
    NotSaturated { node: Word },

    /// The tree whose only context is the empty word.
    #[error("the trivial tree (root as only context) is not a context tree")]
    TrivialTree,

    /// An explicit tree needs at least one context.
    #[error("empty context set")]
    EmptyContextSet,

    /// `lpref` was asked for the context prefix of an internal word.
    #[error("word {word} is internal; it has no context prefix")]
    InternalWord { word: Word },

    /// A history suffix too short to reach a context.
    #[error("history suffix {word} does not reach a context; supply more history")]
    HistoryTooShort { word: Word },

    /// A family classifier disagreed with its own enumerator.
    #[error("family self-check failed at {word}: classifier says {classifier}, enumeration says {enumeration}")]
    FamilySelfCheck {
        word: Word,
        classifier: &'static str,
        enumeration: &'static str,
    },
}

/// Errors from lis/cascade computations.
#[derive(Debug, Clone, Error)]
pub enum CascadeError {
    #[error("the empty word has no lis decomposition")]
    EmptyWord,

    /// A cascade factor needed the `q` of an infinite branch prefix.
    /// Cannot happen on a valid saturated tree; signals a malformed family.
    #[error("cascade factor at shift {shift} of {word} has no finite context prefix")]
    InfiniteContextNeeded { word: Word, shift: usize },

    /// `kappa` was called on a word that is not the α-lis of any context
    /// within the inspected length range.
    #[error("{word} is not the α-lis of any context of length ≤ {max_len}")]
    NotAnAlis { word: Word, max_len: usize },

    /// A probability was requested for a word that is not a finite context.
    #[error("no q distribution: {word} is not a finite context")]
    NotAContext { word: Word },

    /// A q value outside [0,1] or a pair not summing to 1.
    #[error("invalid distribution for context {context}: q(1) = {q1}")]
    InvalidDistribution { context: Word, q1: f64 },

    /// Operation requires a stable tree.
    #[error("operation requires a stable context tree")]
    TreeNotStable,
}

/// Errors from the α-lis system (matrix Q, fixed vectors, recurrence).
#[derive(Debug, Clone, Error)]
pub enum AlisError {
    /// Some cascade series carries divergence evidence.
    #[error("cascade series for α-lis {alis} diverges: {evidence}")]
    CascadeDiverged { alis: Word, evidence: String },

    #[error("operation requires a stable context tree")]
    TreeNotStable,

    #[error("power iteration did not converge after {max_iter} iterations (residual {residual:.3e})")]
    DidNotConverge { max_iter: usize, residual: f64 },

    #[error(transparent)]
    Cascade(#[from] CascadeError),
}

/// Errors when deciding/constructing stationary measures.
#[derive(Debug, Clone, Error)]
pub enum MeasureError {
    /// Some context gives zero mass to a letter.
    #[error("probabilised tree is not non-null: q_{{{context}}}({letter}) = 0")]
    NotNonNull { context: Word, letter: u8 },

    /// The lazy extension sum cannot certify the requested tolerance.
    #[error("extension tail bound {bound:.3e} exceeds tolerance {tol:.3e} at max_len {max_len}")]
    TailBoundExceedsTol { bound: f64, tol: f64, max_len: usize },

    #[error(transparent)]
    Alis(#[from] AlisError),

    #[error(transparent)]
    Cascade(#[from] CascadeError),

    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Errors from simulation and the semi-Markov view.
#[derive(Debug, Clone, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    History(#[from] TreeError),

    #[error("jump decomposition requires a context sequence from a stable tree")]
    NonStableInput,

    #[error("trajectory of length {len} is shorter than the word ({word_len})")]
    TrajectoryTooShort { len: usize, word_len: usize },

    #[error("sampler requires a non-null probabilised tree: q_{{{context}}}({letter}) = 0")]
    NotNonNull { context: Word, letter: u8 },

    #[error(transparent)]
    Cascade(#[from] CascadeError),
}

/// Errors from family constructors.
#[derive(Debug, Clone, Error)]
pub enum FamilyError {
    #[error("bad family parameter {name} = {value}: {reason}")]
    BadParams {
        name: String,
        value: f64,
        reason: &'static str,
    },

    #[error("unknown family {0:?}")]
    UnknownFamily(String),

    #[error("matrix entry a[{i}][{j}] = {value} is not strictly positive")]
    NonPositiveEntry { i: usize, j: usize, value: f64 },

    #[error("matrix row {i} sums to {sum}, not 1")]
    RowNotStochastic { i: usize, sum: f64 },

    #[error("derived probability out of range at context 0^{i} 1 0^{j} 1: {value}")]
    DerivedProbabilityOutOfRange { i: usize, j: usize, value: f64 },

    #[error(transparent)]
    Tree(#[from] TreeError),
}
