//! Probabilised context trees: a tree plus a Bernoulli distribution `q_c`
//! attached to every finite context.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::context_tree::{ContextTree, NodeClass, StabilizeOutcome};
use crate::error::{CascadeError, MeasureError};
use crate::word::Word;

/// Serializable description of a q assignment.
#[derive(Debug, Clone, PartialEq)]
pub enum QDescriptor {
    /// Constant `q_c(1) = p1` for every context.
    Uniform { p1: f64 },
    /// Explicit per-context table of `q_c(1)`.
    Table { q1: BTreeMap<String, f64> },
    /// Deterministic per-context pseudo-random values in `[lo, hi]`.
    HashRandom { seed: u64, lo: f64, hi: f64 },
    /// A named closed-form rule (family parameter forms, induced q̂ of a
    /// stabilized tree, realized matrices, ...).
    Named { name: String, params: serde_json::Value },
}

/// Assignment of `q_c(1)` to contexts. `q_c(0)` is the complement.
#[derive(Clone)]
pub struct QRule {
    descriptor: QDescriptor,
    eval: Arc<dyn Fn(&Word) -> Option<f64> + Send + Sync>,
    /// Closed-form lower bound on `min(q_c(0), q_c(1))` over all contexts,
    /// when the rule knows one. Used to certify divergence thresholds.
    global_min: Option<f64>,
}

impl fmt::Debug for QRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QRule({:?})", self.descriptor)
    }
}

impl QRule {
    pub fn uniform(p1: f64) -> Self {
        assert!((0.0..=1.0).contains(&p1));
        QRule {
            descriptor: QDescriptor::Uniform { p1 },
            eval: Arc::new(move |_| Some(p1)),
            global_min: Some(p1.min(1.0 - p1)),
        }
    }

    pub fn table(q1: BTreeMap<Word, f64>) -> Self {
        let descriptor = QDescriptor::Table {
            q1: q1.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        };
        let global_min = q1
            .values()
            .map(|&p| p.min(1.0 - p))
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))));
        QRule {
            descriptor,
            eval: Arc::new(move |c| q1.get(c).copied()),
            global_min,
        }
    }

    /// Deterministic pseudo-random q values: `q_c(1)` is a splitmix64 hash
    /// of `(seed, c)` mapped into `[lo, hi]`. Reproducible by construction.
    pub fn hash_random(seed: u64, lo: f64, hi: f64) -> Self {
        assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
        QRule {
            descriptor: QDescriptor::HashRandom { seed, lo, hi },
            eval: Arc::new(move |c| {
                let mut h = seed ^ 0x51_7c_c1_b7_27_22_0a_95;
                for &a in c.letters() {
                    h = splitmix64(h ^ (a as u64 + 1));
                }
                h = splitmix64(h ^ c.len() as u64);
                let u = (h >> 11) as f64 / (1u64 << 53) as f64;
                Some(lo + (hi - lo) * u)
            }),
            global_min: Some(lo.min(1.0 - hi)),
        }
    }

    /// A named closed-form rule.
    pub fn named(
        name: impl Into<String>,
        params: serde_json::Value,
        global_min: Option<f64>,
        eval: impl Fn(&Word) -> Option<f64> + Send + Sync + 'static,
    ) -> Self {
        QRule {
            descriptor: QDescriptor::Named { name: name.into(), params },
            eval: Arc::new(eval),
            global_min,
        }
    }

    pub fn descriptor(&self) -> &QDescriptor {
        &self.descriptor
    }

    pub fn global_min(&self) -> Option<f64> {
        self.global_min
    }

    fn eval(&self, c: &Word) -> Option<f64> {
        (self.eval)(c)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A context tree together with its q assignment.
#[derive(Debug, Clone)]
pub struct ProbabilisedTree {
    tree: ContextTree,
    q: QRule,
}

impl ProbabilisedTree {
    pub fn new(tree: ContextTree, q: QRule) -> Self {
        ProbabilisedTree { tree, q }
    }

    pub fn tree(&self) -> &ContextTree {
        &self.tree
    }

    pub fn q_rule(&self) -> &QRule {
        &self.q
    }

    /// The distribution `[q_c(0), q_c(1)]` of a finite context.
    pub fn q(&self, c: &Word) -> Result<[f64; 2], CascadeError> {
        if self.tree.classify(c) != NodeClass::FiniteContext {
            return Err(CascadeError::NotAContext { word: c.clone() });
        }
        let q1 = self
            .q
            .eval(c)
            .ok_or_else(|| CascadeError::NotAContext { word: c.clone() })?;
        if !(0.0..=1.0).contains(&q1) || !q1.is_finite() {
            return Err(CascadeError::InvalidDistribution { context: c.clone(), q1 });
        }
        Ok([1.0 - q1, q1])
    }

    /// Probability that the letter after context `c` is `a`.
    pub fn q_letter(&self, c: &Word, a: u8) -> Result<f64, CascadeError> {
        Ok(self.q(c)?[a as usize])
    }

    /// Verifies non-nullness on every context of length ≤ `scan_len`.
    pub fn verify_non_null(&self, scan_len: usize) -> Result<(), MeasureError> {
        for c in self.tree.contexts_up_to(scan_len) {
            let q = self.q(&c)?;
            for a in [0u8, 1u8] {
                if q[a as usize] == 0.0 {
                    return Err(MeasureError::NotNonNull { context: c, letter: a });
                }
            }
        }
        Ok(())
    }

    /// True when the rule itself guarantees strictly positive q values.
    pub fn non_null_by_rule(&self) -> bool {
        self.q.global_min().is_some_and(|m| m > 0.0)
    }

    /// Stabilizes the underlying tree and carries the induced assignment
    /// `q̂_c = q_{lpref(c)}`, `lpref` taken in the original tree; the
    /// original and stabilized probabilised trees define the same chain.
    pub fn stabilize(&self, depth_budget: usize) -> StabilizedPTree {
        match self.tree.stabilize(depth_budget) {
            StabilizeOutcome::AlreadyStable => StabilizedPTree::AlreadyStable,
            StabilizeOutcome::BudgetExceeded => StabilizedPTree::BudgetExceeded,
            StabilizeOutcome::Stabilized(stable_tree) => {
                let original = self.clone();
                let rule = QRule::named(
                    "lpref-induced",
                    serde_json::json!({ "from": format!("{:?}", self.tree.descriptor()) }),
                    self.q.global_min(),
                    move |c| {
                        let base = original.tree.lpref(c).ok()?;
                        original.q.eval(&base)
                    },
                );
                StabilizedPTree::Stabilized(ProbabilisedTree::new(stable_tree, rule))
            }
        }
    }
}

/// Outcome of stabilizing a probabilised tree.
#[derive(Debug, Clone)]
pub enum StabilizedPTree {
    AlreadyStable,
    Stabilized(ProbabilisedTree),
    BudgetExceeded,
}
