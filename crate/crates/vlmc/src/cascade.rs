//! lis/α-lis decomposition, cascades, κ sums and descent trees.
//!
//! Every nonempty word `w` factors uniquely as `w = β_1…β_p · α · s` where
//! `s` is the longest internal strict suffix of `w` (its *lis*) and `αs` its
//! *α-lis*. The cascade of `w` is the product of the transition
//! probabilities collected while stripping `w` from the left down to its
//! α-lis. Summing cascades over all contexts sharing an α-lis gives the κ
//! numbers that drive the existence criteria for stationary measures.

use std::collections::BTreeSet;

use crate::context_tree::{ContextTree, NodeClass};
use crate::error::CascadeError;
use crate::numeric::KahanSum;
use crate::probabilise::ProbabilisedTree;
use crate::word::{Letter, Word};

/// The decomposition `w = head · alpha · lis`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlisDecomposition {
    pub head: Word,
    pub alpha: Letter,
    pub lis: Word,
}

impl AlisDecomposition {
    /// The α-lis `alpha · lis`.
    pub fn alis(&self) -> Word {
        self.lis.prepend(self.alpha)
    }

    /// Number of letters stripped before reaching the α-lis.
    pub fn p(&self) -> usize {
        self.head.len()
    }

    /// Reassembles the original word.
    pub fn word(&self) -> Word {
        self.head.concat(&self.alis())
    }
}

/// Decomposes a nonempty word: strips letters from the left until the
/// remaining suffix is internal.
pub fn alpha_lis(tree: &ContextTree, w: &Word) -> Result<AlisDecomposition, CascadeError> {
    if w.is_empty() {
        return Err(CascadeError::EmptyWord);
    }
    // The first internal suffix found while stripping is the longest one;
    // the empty suffix is internal in every nontrivial tree, so the scan
    // terminates.
    for k in 1..=w.len() {
        let suffix = w.shift_n(k);
        if tree.classify(&suffix) == NodeClass::Internal {
            return Ok(AlisDecomposition {
                head: w.prefix(k - 1),
                alpha: w.get(k - 1),
                lis: suffix,
            });
        }
    }
    unreachable!("the empty suffix of a nontrivial context tree is internal");
}

/// The symbolic cascade factors of `w`: pairs `(lpref(σ^k(w)), β_k)` for
/// `k = 1..=p`. The numeric cascade is the product of `q_{c}(β)` over them.
pub fn cascade_factors(
    tree: &ContextTree,
    w: &Word,
) -> Result<Vec<(Word, Letter)>, CascadeError> {
    if w.is_empty() {
        return Ok(Vec::new());
    }
    let dec = alpha_lis(tree, w)?;
    let mut factors = Vec::with_capacity(dec.p());
    for k in 1..=dec.p() {
        let suffix = w.shift_n(k);
        let context = tree
            .lpref(&suffix)
            .map_err(|_| CascadeError::InfiniteContextNeeded { word: w.clone(), shift: k })?;
        factors.push((context, w.get(k - 1)));
    }
    Ok(factors)
}

/// The cascade of `w`: an empty product is 1, so `casc(∅) = 1` and
/// `casc(αs) = 1` for any α-lis.
pub fn cascade(ptree: &ProbabilisedTree, w: &Word) -> Result<f64, CascadeError> {
    let mut product = 1.0;
    for (context, beta) in cascade_factors(ptree.tree(), w)? {
        product *= ptree.q_letter(&context, beta)?;
    }
    Ok(product)
}

/// Convergence status of a cascade series.
#[derive(Debug, Clone, PartialEq)]
pub enum KappaStatus {
    /// Frontier mass fell below the tolerance.
    Converged { tol: f64 },
    /// Divergence evidence (never a proof unless closed-form).
    Diverged { evidence: String },
    /// Neither: the truncated sum is all we know.
    Truncated,
}

/// Truncated sum of a cascade series.
#[derive(Debug, Clone)]
pub struct KappaSum {
    pub alis: Word,
    /// Sum of cascades over contexts of length ≤ the truncation length.
    pub partial: f64,
    /// Frontier cascade mass at the truncation boundary. For a stable tree
    /// this is the exact mass of the deepest layer of the descent tree
    /// (zero exactly when the descent tree has been exhausted, since layer
    /// masses are σ-chained and nonincreasing). For a non-stable tree it is
    /// conservative bookkeeping over the deepest explored layers.
    pub tail_bound: f64,
    pub status: KappaStatus,
    /// Cascade mass per context length, for diagnostics.
    pub masses: Vec<(usize, f64)>,
    pub max_len: usize,
}

/// Knobs for κ computation. `max_len` and `tol` are CLI-overridable.
#[derive(Debug, Clone, Copy)]
pub struct KappaConfig {
    pub max_len: usize,
    pub tol: f64,
    /// Partial sums beyond this are flagged as divergence evidence.
    pub explosion_threshold: f64,
    /// Window (in context lengths) over which non-decaying frontier mass
    /// counts as divergence evidence.
    pub divergence_window: usize,
}

impl Default for KappaConfig {
    fn default() -> Self {
        KappaConfig {
            max_len: 64,
            tol: 1e-12,
            explosion_threshold: 1e6,
            divergence_window: 16,
        }
    }
}

/// Sum of the cascade series of `alis`, truncated at contexts of length
/// `max_len`, with default divergence knobs.
pub fn kappa(
    ptree: &ProbabilisedTree,
    alis: &Word,
    max_len: usize,
    tol: f64,
) -> Result<KappaSum, CascadeError> {
    kappa_with(ptree, alis, &KappaConfig { max_len, tol, ..KappaConfig::default() })
}

pub fn kappa_with(
    ptree: &ProbabilisedTree,
    alis: &Word,
    cfg: &KappaConfig,
) -> Result<KappaSum, CascadeError> {
    let tree = ptree.tree();
    let mut group = Vec::new();
    for c in tree.contexts_up_to(cfg.max_len) {
        if alpha_lis(tree, &c)?.alis() == *alis {
            let casc = cascade(ptree, &c)?;
            group.push((c.len(), casc));
        }
    }
    if group.is_empty() {
        return Err(CascadeError::NotAnAlis { word: alis.clone(), max_len: cfg.max_len });
    }
    let stable = tree.is_stable(cfg.max_len).is_stable();
    Ok(kappa_from_lengths(alis.clone(), &group, stable, cfg))
}

/// Core κ bookkeeping given `(context length, cascade)` pairs.
pub(crate) fn kappa_from_lengths(
    alis: Word,
    group: &[(usize, f64)],
    stable: bool,
    cfg: &KappaConfig,
) -> KappaSum {
    let base = alis.len();
    let mut by_len = vec![KahanSum::new(); cfg.max_len.saturating_sub(base) + 1];
    let mut total = KahanSum::new();
    for &(len, casc) in group {
        by_len[len - base].add(casc);
        total.add(casc);
    }
    let masses: Vec<(usize, f64)> =
        by_len.iter().enumerate().map(|(i, s)| (base + i, s.value())).collect();
    let partial = total.value();

    let tail_bound = if stable {
        // Layer masses are nonincreasing and σ-chained: a zero layer means
        // the descent tree is exhausted.
        if masses.iter().skip(1).any(|&(_, m)| m == 0.0) {
            0.0
        } else {
            masses.last().map_or(0.0, |&(_, m)| m)
        }
    } else {
        let window = cfg.divergence_window.min(masses.len());
        masses[masses.len() - window..]
            .iter()
            .map(|&(_, m)| m)
            .fold(0.0, f64::max)
    };

    let status = if partial > cfg.explosion_threshold {
        KappaStatus::Diverged {
            evidence: format!(
                "partial sum {partial:.3e} exceeds explosion threshold {:.1e}",
                cfg.explosion_threshold
            ),
        }
    } else if non_decaying(&masses, cfg) {
        KappaStatus::Diverged {
            evidence: format!(
                "frontier mass not decaying over the last {} context lengths (≈ {:.3e})",
                cfg.divergence_window, tail_bound
            ),
        }
    } else if tail_bound <= cfg.tol {
        KappaStatus::Converged { tol: cfg.tol }
    } else {
        KappaStatus::Truncated
    };

    KappaSum { alis, partial, tail_bound, status, masses, max_len: cfg.max_len }
}

fn non_decaying(masses: &[(usize, f64)], cfg: &KappaConfig) -> bool {
    let w = cfg.divergence_window;
    if masses.len() < w + 1 {
        return false;
    }
    let last = masses[masses.len() - 1].1;
    let earlier = masses[masses.len() - 1 - w].1;
    last >= 1e-6 && last >= 0.999 * earlier
}

/// Descent tree of an α-lis in a stable context tree: the contexts sharing
/// that α-lis, organized by the prepend-one-letter child relation (node
/// labels read right to left).
#[derive(Debug, Clone)]
pub struct DescentTree {
    root: Word,
    depth: usize,
    nodes: BTreeSet<Word>,
}

pub fn descent_tree(
    ptree: &ProbabilisedTree,
    alis: &Word,
    depth: usize,
) -> Result<DescentTree, CascadeError> {
    let tree = ptree.tree();
    if !tree.is_stable(alis.len() + depth).is_stable() {
        return Err(CascadeError::TreeNotStable);
    }
    let mut nodes = BTreeSet::new();
    for c in tree.contexts_up_to(alis.len() + depth) {
        if alpha_lis(tree, &c)?.alis() == *alis {
            nodes.insert(c);
        }
    }
    if !nodes.contains(alis) {
        // In a stable tree every context α-lis is itself a context.
        return Err(CascadeError::NotAnAlis {
            word: alis.clone(),
            max_len: alis.len() + depth,
        });
    }
    Ok(DescentTree { root: alis.clone(), depth, nodes })
}

impl DescentTree {
    pub fn root(&self) -> &Word {
        &self.root
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Contexts with the root as α-lis, in (length, lex) order.
    pub fn nodes(&self) -> &BTreeSet<Word> {
        &self.nodes
    }

    /// Children of a node in the descent tree (prepend one letter).
    pub fn children(&self, node: &Word) -> Vec<Word> {
        [0u8, 1u8]
            .iter()
            .map(|&a| node.prepend(a))
            .filter(|c| self.nodes.contains(c))
            .collect()
    }

    /// Leaves of the saturated descent tree truncated at relative depth
    /// `n`: daughters `βc ∉ D` of nodes within the cap plus the nodes at
    /// the cap itself. Their cascades sum to 1 exactly.
    pub fn truncated_saturated_leaves(&self, n: usize) -> Vec<Word> {
        assert!(n <= self.depth, "truncation beyond constructed depth");
        let cap = self.root.len() + n;
        let mut leaves = Vec::new();
        for c in &self.nodes {
            if c.len() == cap {
                leaves.push(c.clone());
            } else if c.len() < cap {
                for a in [0u8, 1u8] {
                    let d = c.prepend(a);
                    if !self.nodes.contains(&d) {
                        leaves.push(d);
                    }
                }
            }
        }
        leaves.sort();
        leaves
    }

    /// Σ casc over the leaves of the n-truncated saturated descent tree.
    pub fn truncated_leaf_cascade_sum(
        &self,
        ptree: &ProbabilisedTree,
        n: usize,
    ) -> Result<f64, CascadeError> {
        let mut sum = KahanSum::new();
        for leaf in self.truncated_saturated_leaves(n) {
            sum.add(cascade(ptree, &leaf)?);
        }
        Ok(sum.value())
    }
}
