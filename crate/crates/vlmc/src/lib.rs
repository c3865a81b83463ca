//! Stationary probability measures for Variable Length Markov Chains.
//!
//! A VLMC is a Markov chain on left-infinite binary sequences whose
//! next-letter law depends on the shortest suffix of the current sequence
//! that is a *context* (a leaf of a probabilised context tree). This crate
//! decides existence and uniqueness of stationary probability measures for
//! such chains, constructs the measures explicitly, evaluates them on
//! finite cylinders, and cross-validates everything by exact finite
//! identities and simulation.
//!
//! The pipeline:
//!
//! 1. [`context_tree`]: classify words against a tree, test shift
//!    stability, stabilize.
//! 2. [`cascade`]: lis/α-lis decomposition, cascade products, κ sums with
//!    controlled truncation, descent trees.
//! 3. [`alis`]: the α-lis matrix `Q`, left-fixed vectors, recurrence and
//!    transience bounds for countable truncations.
//! 4. [`stationary`]: the decision procedure and lazily extended cylinder
//!    measures with consistency reports.
//! 5. [`dynamics`]: exact simulation, the context chain, its semi-Markov
//!    α-lis decomposition and empirical validation.
//! 6. [`families`]: closed-form constructors for the built-in tree
//!    families used as golden-test substrate.

pub mod alis;
pub mod cascade;
pub mod context_tree;
pub mod dynamics;
pub mod error;
pub mod families;
pub mod io;
pub mod numeric;
pub mod probabilise;
pub mod report;
pub mod stationary;
pub mod word;

pub use context_tree::{ContextTree, NodeClass, StabilityVerdict, StabilizeOutcome};
pub use probabilise::{ProbabilisedTree, QRule};
pub use word::{Letter, Word};
