//! Context trees over the alphabet `{0, 1}`.
//!
//! A context tree is a saturated binary tree (every node has 0 or 2
//! children) with at most countably many infinite branches. Its leaves are
//! the contexts: finite leaves are *finite contexts*, infinite branches are
//! *infinite contexts*. A finite word is *internal* when it is a strict
//! inner node, a *finite context* when it is a finite leaf, and *strictly
//! external* otherwise.
//!
//! Trees come from two kinds of sources: an explicit finite context set
//! (validated eagerly) or a named parametric family with a closed-form
//! classifier (spot-validated at load, see [`crate::families`]).

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::TreeError;
use crate::word::{Letter, Word};

/// Classification of a finite word relative to a context tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    /// Strictly inside the tree (a proper prefix of a context or of an
    /// infinite branch).
    Internal,
    /// A finite leaf.
    FiniteContext,
    /// Strictly outside the tree.
    ExternalStrict,
}

impl NodeClass {
    /// Noninternal means context or external.
    pub fn is_noninternal(self) -> bool {
        !matches!(self, NodeClass::Internal)
    }
}

/// How much is known about the stability of a tree source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityKnowledge {
    /// Exact closed-form answer.
    ClosedForm(bool),
    /// Must be decided by enumeration (explicit trees: exact).
    Computed,
}

/// Result of a stability test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilityVerdict {
    Stable,
    /// Witness pair `(α, c)`: `c` is a finite context and `αc` is internal.
    Unstable { alpha: Letter, context: Word },
    /// A truncated search found no witness and no closed form is available.
    Inconclusive,
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        matches!(self, StabilityVerdict::Stable)
    }
}

/// Result of a stabilization request.
#[derive(Debug, Clone)]
pub enum StabilizeOutcome {
    /// The input was already stable.
    AlreadyStable,
    /// The smallest stable context tree containing the input.
    Stabilized(ContextTree),
    /// Closure did not stabilize within the budget (the input may or may
    /// not be stabilizable; no claim is made).
    BudgetExceeded,
}

/// Serializable description of where a tree came from.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceDescriptor {
    Explicit { contexts: Vec<String> },
    Family { name: String, params: serde_json::Value },
}

/// Closed-form knowledge about the α-lis set `S` of a tree source.
#[derive(Debug, Clone)]
pub enum SKnowledge {
    /// `S` is exactly this finite set.
    Finite(Vec<Word>),
    /// `S` is known to be infinite.
    Infinite,
    /// No closed form.
    Unknown,
}

/// Behaviour every tree source must provide.
///
/// Family sources answer `classify` exactly (never truncated) and must
/// enumerate their finite contexts exhaustively up to any length.
pub trait TreeShape: Send + Sync {
    /// Exact classification of a finite word.
    fn classify(&self, w: &Word) -> NodeClass;

    /// All finite contexts of length ≤ `max_len`, in (length, lex) order.
    fn contexts_up_to(&self, max_len: usize) -> Vec<Word>;

    /// Length of the longest finite context, when the tree is finite.
    fn height(&self) -> Option<usize>;

    fn stability(&self) -> StabilityKnowledge;

    fn descriptor(&self) -> SourceDescriptor;

    /// Hard-wired α-lis of a context, for families whose table is known in
    /// closed form. Used as a cross-check oracle against the computed
    /// decomposition, never as the computation itself.
    fn alis_oracle(&self, _context: &Word) -> Option<Word> {
        None
    }

    /// Closed-form knowledge about the set of context α-lis.
    fn s_knowledge(&self) -> SKnowledge {
        SKnowledge::Unknown
    }

    /// A documented stabilized form, for families that have one.
    fn stabilized_shape(&self) -> Option<Arc<dyn TreeShape>> {
        None
    }
}

/// A validated context tree.
#[derive(Clone)]
pub struct ContextTree {
    shape: Arc<dyn TreeShape>,
}

impl fmt::Debug for ContextTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContextTree({:?})", self.shape.descriptor())
    }
}

/// Validation findings worth surfacing (not errors).
#[derive(Debug, Clone, Default)]
pub struct ValidationNotes {
    /// Set when the tree is the complete tree of this depth, i.e. a plain
    /// order-d Markov chain. Admitted, but flagged.
    pub complete_tree_of_depth: Option<usize>,
}

impl ContextTree {
    /// Builds a tree from an explicit finite context set and validates it:
    /// prefix-freeness, saturation, nontriviality. For a finite tree these
    /// imply completeness (every word of length ≥ height has a context
    /// prefix).
    pub fn explicit(contexts: impl IntoIterator<Item = Word>) -> Result<Self, TreeError> {
        let shape = ExplicitShape::new(contexts)?;
        Ok(ContextTree { shape: Arc::new(shape) })
    }

    /// Like [`ContextTree::explicit`] but also reports validation notes.
    pub fn explicit_with_notes(
        contexts: impl IntoIterator<Item = Word>,
    ) -> Result<(Self, ValidationNotes), TreeError> {
        let shape = ExplicitShape::new(contexts)?;
        let notes = ValidationNotes {
            complete_tree_of_depth: shape.complete_tree_depth(),
        };
        Ok((ContextTree { shape: Arc::new(shape) }, notes))
    }

    /// Wraps a family source, running the load-time spot validation:
    /// enumerated contexts ≤ 12 must agree exhaustively with the
    /// classifier, plus pseudo-random probes up to depth 20.
    pub fn from_family_shape(shape: Arc<dyn TreeShape>) -> Result<Self, TreeError> {
        spot_validate(shape.as_ref())?;
        Ok(ContextTree { shape })
    }

    pub fn classify(&self, w: &Word) -> NodeClass {
        self.shape.classify(w)
    }

    pub fn is_internal(&self, w: &Word) -> bool {
        self.classify(w) == NodeClass::Internal
    }

    pub fn is_context(&self, w: &Word) -> bool {
        self.classify(w) == NodeClass::FiniteContext
    }

    pub fn contexts_up_to(&self, max_len: usize) -> Vec<Word> {
        self.shape.contexts_up_to(max_len)
    }

    pub fn height(&self) -> Option<usize> {
        self.shape.height()
    }

    pub fn descriptor(&self) -> SourceDescriptor {
        self.shape.descriptor()
    }

    pub fn alis_oracle(&self, context: &Word) -> Option<Word> {
        self.shape.alis_oracle(context)
    }

    pub fn s_knowledge(&self) -> SKnowledge {
        self.shape.s_knowledge()
    }

    /// The unique context prefix of a noninternal word.
    ///
    /// Word semantics: an internal argument is a contract error.
    pub fn lpref(&self, w: &Word) -> Result<Word, TreeError> {
        match self.scan_context_prefix(w) {
            Some(c) => Ok(c),
            None => {
                if self.classify(w) == NodeClass::Internal {
                    Err(TreeError::InternalWord { word: w.clone() })
                } else {
                    // Unreachable on a valid saturated tree.
                    Err(TreeError::HistoryTooShort { word: w.clone() })
                }
            }
        }
    }

    /// The context prefix of a (mirrored) history suffix.
    ///
    /// History semantics: when every prefix is internal the caller must
    /// supply more history.
    pub fn lpref_history(&self, w: &Word) -> Result<Word, TreeError> {
        self.scan_context_prefix(w)
            .ok_or(TreeError::HistoryTooShort { word: w.clone() })
    }

    fn scan_context_prefix(&self, w: &Word) -> Option<Word> {
        for k in 0..=w.len() {
            let p = w.prefix(k);
            if self.classify(&p) == NodeClass::FiniteContext {
                return Some(p);
            }
        }
        None
    }

    /// Tests shift-stability: stable iff `αc` is noninternal for every
    /// finite context `c` and letter `α`.
    ///
    /// Exact for explicit trees and for families with a closed-form answer;
    /// otherwise a witness search over contexts of length ≤ `probe_depth`.
    pub fn is_stable(&self, probe_depth: usize) -> StabilityVerdict {
        match self.shape.stability() {
            StabilityKnowledge::ClosedForm(true) => StabilityVerdict::Stable,
            StabilityKnowledge::ClosedForm(false) => self
                .find_instability_witness(probe_depth)
                // A closed-form-unstable family should give up a witness
                // quickly; not finding one within the probe is reported
                // honestly.
                .unwrap_or(StabilityVerdict::Inconclusive),
            StabilityKnowledge::Computed => {
                let depth = match self.height() {
                    Some(h) => h,
                    None => probe_depth,
                };
                match self.find_instability_witness(depth) {
                    Some(v) => v,
                    None if self.height().is_some() => StabilityVerdict::Stable,
                    None => StabilityVerdict::Inconclusive,
                }
            }
        }
    }

    fn find_instability_witness(&self, probe_depth: usize) -> Option<StabilityVerdict> {
        for c in self.contexts_up_to(probe_depth) {
            for alpha in [0u8, 1u8] {
                if self.classify(&c.prepend(alpha)) == NodeClass::Internal {
                    return Some(StabilityVerdict::Unstable { alpha, context: c });
                }
            }
        }
        None
    }

    /// The smallest stable context tree containing this one, i.e. the tree
    /// whose node set is `⋃_n σ^n(T)`.
    ///
    /// Exact and finite for explicit trees. Families return their
    /// documented stabilized form when one exists. `BudgetExceeded` makes
    /// no claim of non-stabilizability.
    pub fn stabilize(&self, depth_budget: usize) -> StabilizeOutcome {
        if self.is_stable(depth_budget).is_stable() {
            return StabilizeOutcome::AlreadyStable;
        }
        if let Some(shape) = self.shape.stabilized_shape() {
            return StabilizeOutcome::Stabilized(ContextTree { shape });
        }
        if let Some(h) = self.height() {
            let contexts = self.contexts_up_to(h);
            let closed = sigma_closure_contexts(&contexts);
            match ContextTree::explicit(closed) {
                Ok(tree) => StabilizeOutcome::Stabilized(tree),
                Err(_) => StabilizeOutcome::BudgetExceeded,
            }
        } else {
            StabilizeOutcome::BudgetExceeded
        }
    }
}

/// The finite contexts of the σ-closure `⋃_n σ^n(T)` of a finite context
/// set: all suffixes of all nodes are collected and the childless nodes
/// returned. Brute force, intended for cross-checks against
/// [`ContextTree::stabilize`].
pub fn sigma_closure_contexts(contexts: &[Word]) -> Vec<Word> {
    let mut nodes: HashSet<Word> = HashSet::new();
    for c in contexts {
        // Every suffix of every prefix. Suffixes of a prefix-closed set
        // stay prefix-closed and the closure of a saturated tree stays
        // saturated.
        for start in 0..=c.len() {
            for end in start..=c.len() {
                nodes.insert(Word::from_letters(&c.letters()[start..end]));
            }
        }
    }
    let mut leaves: Vec<Word> = nodes
        .iter()
        .filter(|n| !nodes.contains(&n.append(0)) && !nodes.contains(&n.append(1)))
        .cloned()
        .collect();
    leaves.sort();
    leaves
}

/// Explicit finite context set.
pub(crate) struct ExplicitShape {
    contexts: BTreeSet<Word>,
    internals: HashSet<Word>,
    height: usize,
}

impl ExplicitShape {
    fn new(contexts: impl IntoIterator<Item = Word>) -> Result<Self, TreeError> {
        let contexts: BTreeSet<Word> = contexts.into_iter().collect();
        if contexts.is_empty() {
            return Err(TreeError::EmptyContextSet);
        }
        if contexts.contains(&Word::empty()) {
            if contexts.len() == 1 {
                return Err(TreeError::TrivialTree);
            }
            // ∅ as a context together with others always breaks
            // prefix-freeness.
            let longer = contexts.iter().find(|c| !c.is_empty()).unwrap().clone();
            return Err(TreeError::NotPrefixFree { shorter: Word::empty(), longer });
        }

        let mut internals: HashSet<Word> = HashSet::new();
        for c in &contexts {
            for k in 0..c.len() {
                internals.insert(c.prefix(k));
            }
        }
        // Prefix-freeness: no context is an inner node.
        for c in &contexts {
            if internals.contains(c) {
                let longer = contexts
                    .iter()
                    .find(|other| c.is_strict_prefix_of(other))
                    .unwrap()
                    .clone();
                return Err(TreeError::NotPrefixFree { shorter: c.clone(), longer });
            }
        }
        // Saturation: every inner node has both children in the tree.
        for node in &internals {
            for a in [0u8, 1u8] {
                let child = node.append(a);
                if !internals.contains(&child) && !contexts.contains(&child) {
                    return Err(TreeError::NotSaturated { node: node.clone() });
                }
            }
        }
        let height = contexts.iter().map(Word::len).max().unwrap();
        Ok(ExplicitShape { contexts, internals, height })
    }

    fn complete_tree_depth(&self) -> Option<usize> {
        let d = self.height;
        if self.contexts.len() == 1usize << d && self.contexts.iter().all(|c| c.len() == d) {
            Some(d)
        } else {
            None
        }
    }
}

impl TreeShape for ExplicitShape {
    fn classify(&self, w: &Word) -> NodeClass {
        if self.contexts.contains(w) {
            NodeClass::FiniteContext
        } else if self.internals.contains(w) {
            NodeClass::Internal
        } else {
            NodeClass::ExternalStrict
        }
    }

    fn contexts_up_to(&self, max_len: usize) -> Vec<Word> {
        self.contexts.iter().filter(|c| c.len() <= max_len).cloned().collect()
    }

    fn height(&self) -> Option<usize> {
        Some(self.height)
    }

    fn stability(&self) -> StabilityKnowledge {
        StabilityKnowledge::Computed
    }

    fn descriptor(&self) -> SourceDescriptor {
        SourceDescriptor::Explicit {
            contexts: self.contexts.iter().map(|c| c.to_string()).collect(),
        }
    }
}

/// Spot validation of a family source: exhaustive agreement between
/// classifier and enumerator up to depth 12, pseudo-random probes up to
/// depth 20, and saturation probes around enumerated contexts.
fn spot_validate(shape: &dyn TreeShape) -> Result<(), TreeError> {
    const EXHAUSTIVE_DEPTH: usize = 12;
    const SPOT_DEPTH: usize = 20;

    let enumerated: BTreeSet<Word> = shape.contexts_up_to(SPOT_DEPTH).into_iter().collect();
    if enumerated.contains(&Word::empty()) {
        return Err(TreeError::TrivialTree);
    }
    // Prefix-freeness of the enumeration.
    let listed: Vec<&Word> = enumerated.iter().collect();
    for (i, c) in listed.iter().enumerate() {
        for other in listed.iter().skip(i + 1) {
            if c.is_strict_prefix_of(other) {
                return Err(TreeError::NotPrefixFree {
                    shorter: (*c).clone(),
                    longer: (*other).clone(),
                });
            }
        }
    }
    // Every enumerated context must classify as a finite context.
    for c in &enumerated {
        if shape.classify(c) != NodeClass::FiniteContext {
            return Err(TreeError::FamilySelfCheck {
                word: c.clone(),
                classifier: "noncontext",
                enumeration: "context",
            });
        }
    }
    // Exhaustive sweep: classification vs. the explicit prefix structure of
    // the enumeration, for all words up to depth 12.
    let deep_contexts: BTreeSet<Word> =
        shape.contexts_up_to(EXHAUSTIVE_DEPTH + 1).into_iter().collect();
    let mut queue = vec![Word::empty()];
    while let Some(word) = queue.pop() {
        let class = shape.classify(&word);
        if deep_contexts.contains(&word) && class != NodeClass::FiniteContext {
            return Err(TreeError::FamilySelfCheck {
                word,
                classifier: "noncontext",
                enumeration: "context",
            });
        }
        if class == NodeClass::FiniteContext && word.len() <= EXHAUSTIVE_DEPTH
            && !deep_contexts.contains(&word)
        {
            return Err(TreeError::FamilySelfCheck {
                word,
                classifier: "context",
                enumeration: "noncontext",
            });
        }
        if word.len() < EXHAUSTIVE_DEPTH {
            match class {
                NodeClass::Internal => {
                    // Saturation: children may not be exactly one external.
                    let c0 = shape.classify(&word.append(0));
                    let c1 = shape.classify(&word.append(1));
                    let ext =
                        [c0, c1].iter().filter(|&&c| c == NodeClass::ExternalStrict).count();
                    if ext == 1 {
                        return Err(TreeError::NotSaturated { node: word.clone() });
                    }
                    queue.push(word.append(0));
                    queue.push(word.append(1));
                }
                NodeClass::FiniteContext => {
                    // Children of a leaf must be external.
                    for a in [0u8, 1u8] {
                        if shape.classify(&word.append(a)) != NodeClass::ExternalStrict {
                            return Err(TreeError::FamilySelfCheck {
                                word: word.append(a),
                                classifier: "non-external",
                                enumeration: "below a leaf",
                            });
                        }
                    }
                }
                NodeClass::ExternalStrict => {}
            }
        }
    }
    // Pseudo-random probes at depths 13..=20: externals must have a context
    // prefix, contexts must be enumerated.
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    for _ in 0..2000 {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let len = EXHAUSTIVE_DEPTH + 1 + (state >> 33) as usize % (SPOT_DEPTH - EXHAUSTIVE_DEPTH);
        let mut letters = Vec::with_capacity(len);
        let mut bits = state;
        for _ in 0..len {
            bits = bits.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            letters.push((bits >> 62) as u8 & 1);
        }
        let word = Word::from_letters(&letters);
        match shape.classify(&word) {
            NodeClass::FiniteContext => {
                if !enumerated.contains(&word) {
                    return Err(TreeError::FamilySelfCheck {
                        word,
                        classifier: "context",
                        enumeration: "noncontext",
                    });
                }
            }
            NodeClass::ExternalStrict => {
                let has_context_prefix = (0..=word.len())
                    .any(|k| shape.classify(&word.prefix(k)) == NodeClass::FiniteContext);
                if !has_context_prefix {
                    return Err(TreeError::FamilySelfCheck {
                        word,
                        classifier: "external without context prefix",
                        enumeration: "saturated tree",
                    });
                }
            }
            NodeClass::Internal => {}
        }
    }
    Ok(())
}
