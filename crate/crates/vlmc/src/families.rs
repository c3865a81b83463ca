//! Built-in parametric tree families.
//!
//! Each family carries a closed-form classifier, an exhaustive context
//! enumerator, closed-form stability, and (where known) a hard-wired α-lis
//! table used as a cross-check oracle. Classifier and enumerator are
//! validated against each other at load time; disagreement is a hard error.
//!
//! Shapes:
//! - `left_comb`: contexts `0^p 1`.
//! - `comb_of_left_combs`: contexts `0^p 1 0^q 1`.
//! - `comb_of_right_combs`: contexts `0^p 1^q 0`, `q ≥ 1`.
//! - `comb_of_right_combs_cherry`: same with context `10` replaced by the
//!   cherry `{100, 101}`.
//! - `bamboo_blossom`: contexts `(01)^n 00` and `(01)^n 1`.
//! - `double_bamboo`: contexts `(01)^k 00`, `(10)^k 0`, `(10)^k 11`,
//!   `(01)^k 1`; the stabilized bamboo blossom.
//! - `brush`: contexts `1` and `0 1^p 0^q 1`, `q ≥ 1`.
//! - `tree_51`: contexts `00`, `1` and `0 1^p 0^q 1`, `p, q ≥ 1`.
//! - `tree_53`: contexts `0^q 1 0`, `0^q 1 1` (`q ≥ 1`) and `1 0^p 1`.
//! - `small_kappas`: contexts `0^m 1 0^k 1` (`k < m`), `0^m 1 0^m`,
//!   `1 0^m 1`.
//! - `example_1_tree`: contexts `(01)^p 00`, `(01)^r 1` (`r ≥ 2`),
//!   `0 1^r 0` (`r ≥ 2`), `1^q 00`, `1^q 01`.
//! - `complete`: all words of a fixed length `d`.
//! - `filament`: hairs along the host ray `0 1 00 11 000 111 …`
//!   (enumeration-only; stabilizable, but its stabilized form has no
//!   finite description here).

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde_json::json;

use crate::context_tree::{
    ContextTree, NodeClass, SKnowledge, SourceDescriptor, StabilityKnowledge, TreeShape,
};
use crate::error::FamilyError;
use crate::numeric::{bisect_increasing, KahanSum};
use crate::probabilise::{ProbabilisedTree, QRule};
use crate::word::{flip, Letter, Word};

/// Built-in family identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyName {
    LeftComb,
    CombOfLeftCombs,
    CombOfRightCombs,
    CombOfRightCombsCherry,
    BambooBlossom,
    DoubleBamboo,
    Brush,
    Tree51,
    Tree53,
    SmallKappas,
    Example1Tree,
    Complete,
    Filament,
}

impl FamilyName {
    pub fn all() -> &'static [FamilyName] {
        use FamilyName::*;
        &[
            LeftComb,
            CombOfLeftCombs,
            CombOfRightCombs,
            CombOfRightCombsCherry,
            BambooBlossom,
            DoubleBamboo,
            Brush,
            Tree51,
            Tree53,
            SmallKappas,
            Example1Tree,
            Complete,
            Filament,
        ]
    }

    pub fn id(self) -> &'static str {
        use FamilyName::*;
        match self {
            LeftComb => "left_comb",
            CombOfLeftCombs => "comb_of_left_combs",
            CombOfRightCombs => "comb_of_right_combs",
            CombOfRightCombsCherry => "comb_of_right_combs_cherry",
            BambooBlossom => "bamboo_blossom",
            DoubleBamboo => "double_bamboo",
            Brush => "brush",
            Tree51 => "tree_51",
            Tree53 => "tree_53",
            SmallKappas => "small_kappas",
            Example1Tree => "example_1_tree",
            Complete => "complete",
            Filament => "filament",
        }
    }

    pub fn parse(s: &str) -> Result<FamilyName, FamilyError> {
        FamilyName::all()
            .iter()
            .copied()
            .find(|f| f.id() == s)
            .ok_or_else(|| FamilyError::UnknownFamily(s.to_string()))
    }

    pub fn is_shift_stable(self) -> bool {
        use FamilyName::*;
        matches!(
            self,
            LeftComb
                | CombOfLeftCombs
                | CombOfRightCombs
                | CombOfRightCombsCherry
                | DoubleBamboo
                | Tree53
                | Complete
        )
    }

    /// One-line shape description for listings.
    pub fn describe(self) -> &'static str {
        use FamilyName::*;
        match self {
            LeftComb => "left comb: contexts 0^p 1",
            CombOfLeftCombs => "left comb of left combs: contexts 0^p 1 0^q 1",
            CombOfRightCombs => "left comb of right combs: contexts 0^p 1^q 0",
            CombOfRightCombsCherry => {
                "left comb of right combs with the context 10 replaced by the cherry {100, 101}"
            }
            BambooBlossom => "bamboo blossom: contexts (01)^n 00 and (01)^n 1",
            DoubleBamboo => "double bamboo: two opposite bamboos; stabilized bamboo blossom",
            Brush => "brush: contexts 1 and 0 1^p 0^q 1",
            Tree51 => "contexts 00, 1 and 0 1^p 0^q 1 (p, q >= 1)",
            Tree53 => "contexts 0^q 1 0, 0^q 1 1 and 1 0^p 1",
            SmallKappas => "tree of small kappas: contexts 0^m 1 0^k 1 (k < m), 0^m 1 0^m, 1 0^m 1",
            Example1Tree => "contexts (01)^p 00, (01)^r 1, 0 1^r 0 (r >= 2), 1^q 00, 1^q 01",
            Complete => "complete tree of depth d (order-d Markov chain)",
            Filament => "hairs along the host ray 0 1 00 11 000 111 ... (enumeration-only)",
        }
    }

    /// Parameter names of the default q rule with their default values.
    pub fn q_params(self) -> &'static [(&'static str, f64)] {
        use FamilyName::*;
        match self {
            LeftComb | CombOfLeftCombs | CombOfRightCombs => &[("q1", 0.5)],
            CombOfRightCombsCherry => {
                &[("q100", 0.35), ("q101", 0.55), ("q010", 0.45), ("q110", 0.6)]
            }
            BambooBlossom => &[("qa", 0.4), ("qb", 0.65)],
            DoubleBamboo => &[("qa", 0.4), ("qb", 0.65), ("qg", 0.55)],
            Brush => &[("q1_1", 0.6), ("spine_0", 0.4)],
            Tree51 => &[("q1_1", 0.6), ("q00_1", 0.3), ("spine_0", 0.4)],
            Tree53 => &[("q10", 0.45), ("q11", 0.6), ("q101", 0.5)],
            SmallKappas => &[("qa", 0.55), ("qb", 0.5), ("qc", 0.45)],
            Example1Tree => {
                &[("qa", 0.45), ("qb", 0.55), ("qc", 0.5), ("qd", 0.4), ("qe", 0.6)]
            }
            Complete => &[("p1", 0.5)],
            Filament => &[("q", 0.5)],
        }
    }
}

// ---------------------------------------------------------------------------
// Shapes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct FamilyShape {
    name: FamilyName,
    /// Depth of the complete tree; unused otherwise.
    depth: usize,
}

/// Longest run of `letter` starting at `i`.
fn run(w: &[Letter], i: usize, letter: Letter) -> usize {
    w[i..].iter().take_while(|&&a| a == letter).count()
}

fn all_equal(w: &[Letter], letter: Letter) -> bool {
    w.iter().all(|&a| a == letter)
}

/// `w` alternates starting with `first` (e.g. 0,1,0,1,… for `first = 0`).
fn alternates(w: &[Letter], first: Letter) -> bool {
    w.iter()
        .enumerate()
        .all(|(i, &a)| a == if i % 2 == 0 { first } else { flip(first) })
}

fn zeros_then(suffix: &[Letter], p: usize) -> Word {
    let mut letters = vec![0u8; p];
    letters.extend_from_slice(suffix);
    Word::from_letters(&letters)
}

fn alt_then(pairs: usize, first: Letter, suffix: &[Letter]) -> Word {
    let mut letters = Vec::with_capacity(2 * pairs + suffix.len());
    for _ in 0..pairs {
        letters.push(first);
        letters.push(flip(first));
    }
    letters.extend_from_slice(suffix);
    Word::from_letters(&letters)
}

/// Letter of the filament host ray `0 1 00 11 000 111 …` at position `i`.
fn filament_host(i: usize) -> Letter {
    // Block k (1-based) is 0^k 1^k; cumulative length after block k is
    // k(k+1).
    let mut k = 1usize;
    while k * (k + 1) <= i {
        k += 1;
    }
    let offset = i - (k - 1) * k;
    if offset < k {
        0
    } else {
        1
    }
}

impl FamilyShape {
    fn is_context(&self, w: &[Letter]) -> bool {
        use FamilyName::*;
        let n = w.len();
        match self.name {
            LeftComb => n >= 1 && w[n - 1] == 1 && all_equal(&w[..n - 1], 0),
            CombOfLeftCombs => {
                n >= 2 && w[n - 1] == 1 && w.iter().filter(|&&a| a == 1).count() == 2
            }
            CombOfRightCombs => {
                // 0^p 1^q 0, q ≥ 1.
                if n < 2 || w[n - 1] != 0 {
                    return false;
                }
                let p = run(w, 0, 0);
                let q = run(w, p, 1);
                q >= 1 && p + q + 1 == n
            }
            CombOfRightCombsCherry => {
                if w == [1, 0, 0] || w == [1, 0, 1] {
                    return true;
                }
                if w == [1, 0] {
                    return false;
                }
                FamilyShape { name: CombOfRightCombs, depth: 0 }.is_context(w)
            }
            BambooBlossom => {
                // (01)^n 00 or (01)^n 1.
                if n >= 2 && n % 2 == 0 && w[n - 2] == 0 && w[n - 1] == 0 {
                    return alternates(&w[..n - 2], 0);
                }
                n % 2 == 1 && w[n - 1] == 1 && alternates(&w[..n - 1], 0)
            }
            DoubleBamboo => {
                if n >= 2 && n % 2 == 0 {
                    // (01)^k 00 or (10)^k 11.
                    return (w[n - 2] == 0 && w[n - 1] == 0 && alternates(&w[..n - 2], 0))
                        || (w[n - 2] == 1 && w[n - 1] == 1 && alternates(&w[..n - 2], 1));
                }
                if n >= 3 && n % 2 == 1 {
                    // (10)^k 0 (k ≥ 1) or (01)^k 1 (k ≥ 1).
                    return (w[n - 1] == 0 && alternates(&w[..n - 1], 1))
                        || (w[n - 1] == 1 && alternates(&w[..n - 1], 0));
                }
                false
            }
            Brush => {
                // 1, or 0 1^p 0^q 1 with p ≥ 0, q ≥ 1.
                if w == [1] {
                    return true;
                }
                if n < 3 || w[0] != 0 || w[n - 1] != 1 {
                    return false;
                }
                let p = run(w, 1, 1);
                let q = run(w, 1 + p, 0);
                q >= 1 && 1 + p + q + 1 == n
            }
            Tree51 => {
                if w == [0, 0] || w == [1] {
                    return true;
                }
                // 0 1^p 0^q 1 with p, q ≥ 1.
                if n < 4 || w[0] != 0 || w[n - 1] != 1 {
                    return false;
                }
                let p = run(w, 1, 1);
                let q = run(w, 1 + p, 0);
                p >= 1 && q >= 1 && 1 + p + q + 1 == n
            }
            Tree53 => {
                if w.first() == Some(&1) {
                    // 1 0^p 1.
                    let p = run(w, 1, 0);
                    return n >= 2 && 1 + p + 1 == n && w[n - 1] == 1;
                }
                // 0^q 1 x, q ≥ 1.
                let q = run(w, 0, 0);
                q >= 1 && q + 2 == n && w[q] == 1
            }
            SmallKappas => {
                if w.first() == Some(&1) {
                    // 1 0^m 1.
                    let m = run(w, 1, 0);
                    return n >= 2 && 1 + m + 1 == n && w[n - 1] == 1;
                }
                let m = run(w, 0, 0);
                if m == 0 || m >= n || w[m] != 1 {
                    return false;
                }
                let k = run(w, m + 1, 0);
                if m + 1 + k == n {
                    // 0^m 1 0^m.
                    k == m
                } else {
                    // 0^m 1 0^k 1, k ≤ m − 1.
                    m + 1 + k + 1 == n && w[n - 1] == 1 && k <= m - 1
                }
            }
            Example1Tree => {
                // (01)^p 00.
                if n >= 2 && n % 2 == 0 && w[n - 2] == 0 && w[n - 1] == 0
                    && alternates(&w[..n - 2], 0)
                {
                    return true;
                }
                // (01)^r 1, r ≥ 2.
                if n >= 5 && n % 2 == 1 && w[n - 1] == 1 && alternates(&w[..n - 1], 0) {
                    return true;
                }
                // 0 1^r 0, r ≥ 2.
                if n >= 4 && w[0] == 0 && w[n - 1] == 0 && run(w, 1, 1) == n - 2 {
                    return true;
                }
                // 1^q 00 or 1^q 01, q ≥ 1.
                if n >= 3 && w[0] == 1 {
                    let q = run(w, 0, 1);
                    return q + 2 == n && w[q] == 0;
                }
                false
            }
            Complete => n == self.depth,
            Filament => {
                n >= 1
                    && (0..n - 1).all(|i| w[i] == filament_host(i))
                    && w[n - 1] == flip(filament_host(n - 1))
            }
        }
    }

    fn is_internal(&self, w: &[Letter]) -> bool {
        use FamilyName::*;
        let n = w.len();
        match self.name {
            LeftComb => all_equal(w, 0),
            CombOfLeftCombs => w.iter().filter(|&&a| a == 1).count() <= 1,
            CombOfRightCombs => {
                // 0^j, or 0^p 1^q with q ≥ 1.
                let p = run(w, 0, 0);
                p == n || p + run(w, p, 1) == n
            }
            CombOfRightCombsCherry => {
                w == [1, 0]
                    || FamilyShape { name: CombOfRightCombs, depth: 0 }.is_internal(w)
            }
            BambooBlossom => alternates(w, 0),
            DoubleBamboo => alternates(w, 0) || alternates(w, 1),
            Brush => {
                // ∅, 0^j, or 0 1^p 0^j with p ≥ 1.
                if all_equal(w, 0) {
                    return true;
                }
                if w[0] != 0 || n < 2 || w[1] != 1 {
                    return false;
                }
                let p = run(w, 1, 1);
                1 + p + run(w, 1 + p, 0) == n
            }
            Tree51 => {
                // ∅, 0, or 0 1^p 0^j with p ≥ 1.
                if n <= 1 {
                    return w.is_empty() || w == [0];
                }
                if w[0] != 0 || w[1] != 1 {
                    return false;
                }
                let p = run(w, 1, 1);
                1 + p + run(w, 1 + p, 0) == n
            }
            Tree53 => {
                // 0^j, 0^q 1 (q ≥ 1), or 1 0^p.
                if all_equal(w, 0) {
                    return true;
                }
                if w[0] == 0 {
                    let q = run(w, 0, 0);
                    return q + 1 == n && w[n - 1] == 1;
                }
                1 + run(w, 1, 0) == n
            }
            SmallKappas => {
                // 0^j, 1 0^j, or 0^m 1 0^j with j ≤ m − 1.
                if all_equal(w, 0) {
                    return true;
                }
                if w[0] == 1 {
                    return 1 + run(w, 1, 0) == n;
                }
                let m = run(w, 0, 0);
                if w[m] != 1 {
                    return false;
                }
                let j = run(w, m + 1, 0);
                m + 1 + j == n && j <= m - 1
            }
            Example1Tree => {
                // (01)^k or (01)^k 0; 0 1^j (j ≥ 2); 1^j; 1^q 0.
                if alternates(w, 0) {
                    return true;
                }
                if n >= 3 && w[0] == 0 && run(w, 1, 1) == n - 1 {
                    return true;
                }
                if w.first() == Some(&1) {
                    let q = run(w, 0, 1);
                    return q == n || q + 1 == n;
                }
                false
            }
            Complete => n < self.depth,
            Filament => (0..n).all(|i| w[i] == filament_host(i)),
        }
    }

    fn enumerate(&self, max_len: usize) -> Vec<Word> {
        use FamilyName::*;
        let mut out: Vec<Word> = Vec::new();
        let len_ok = |l: usize| l >= 1 && l <= max_len;
        match self.name {
            LeftComb => {
                for p in 0..max_len {
                    out.push(zeros_then(&[1], p));
                }
            }
            CombOfLeftCombs => {
                for p in 0..max_len {
                    for q in 0..max_len {
                        if len_ok(p + q + 2) {
                            let mut tail = vec![1u8];
                            tail.extend(vec![0u8; q]);
                            tail.push(1);
                            out.push(zeros_then(&tail, p));
                        }
                    }
                }
            }
            CombOfRightCombs | CombOfRightCombsCherry => {
                for p in 0..max_len {
                    for q in 1..=max_len {
                        if len_ok(p + q + 1) {
                            let mut tail = vec![1u8; q];
                            tail.push(0);
                            out.push(zeros_then(&tail, p));
                        }
                    }
                }
                if self.name == CombOfRightCombsCherry {
                    out.retain(|c| c.letters() != [1, 0]);
                    if max_len >= 3 {
                        out.push(Word::from_letters(&[1, 0, 0]));
                        out.push(Word::from_letters(&[1, 0, 1]));
                    }
                }
            }
            BambooBlossom => {
                for k in 0..max_len {
                    if len_ok(2 * k + 2) {
                        out.push(alt_then(k, 0, &[0, 0]));
                    }
                    if len_ok(2 * k + 1) {
                        out.push(alt_then(k, 0, &[1]));
                    }
                }
            }
            DoubleBamboo => {
                for k in 0..max_len {
                    if len_ok(2 * k + 2) {
                        out.push(alt_then(k, 0, &[0, 0]));
                        out.push(alt_then(k, 1, &[1, 1]));
                    }
                    if k >= 1 && len_ok(2 * k + 1) {
                        out.push(alt_then(k, 1, &[0]));
                        out.push(alt_then(k, 0, &[1]));
                    }
                }
            }
            Brush => {
                out.push(Word::single(1));
                for p in 0..max_len {
                    for q in 1..=max_len {
                        if len_ok(p + q + 2) {
                            let mut letters = vec![0u8];
                            letters.extend(vec![1u8; p]);
                            letters.extend(vec![0u8; q]);
                            letters.push(1);
                            out.push(Word::from_letters(&letters));
                        }
                    }
                }
            }
            Tree51 => {
                out.push(Word::single(1));
                out.push(Word::from_letters(&[0, 0]));
                for p in 1..max_len {
                    for q in 1..=max_len {
                        if len_ok(p + q + 2) {
                            let mut letters = vec![0u8];
                            letters.extend(vec![1u8; p]);
                            letters.extend(vec![0u8; q]);
                            letters.push(1);
                            out.push(Word::from_letters(&letters));
                        }
                    }
                }
            }
            Tree53 => {
                for q in 1..max_len {
                    if len_ok(q + 2) {
                        let mut tail = vec![1u8, 0];
                        out.push(zeros_then(&tail, q));
                        tail[1] = 1;
                        out.push(zeros_then(&tail, q));
                    }
                }
                for p in 0..max_len {
                    if len_ok(p + 2) {
                        let mut letters = vec![1u8];
                        letters.extend(vec![0u8; p]);
                        letters.push(1);
                        out.push(Word::from_letters(&letters));
                    }
                }
            }
            SmallKappas => {
                for m in 1..max_len {
                    for k in 0..m {
                        if len_ok(m + k + 2) {
                            let mut tail = vec![1u8];
                            tail.extend(vec![0u8; k]);
                            tail.push(1);
                            out.push(zeros_then(&tail, m));
                        }
                    }
                    if len_ok(2 * m + 1) {
                        let mut tail = vec![1u8];
                        tail.extend(vec![0u8; m]);
                        out.push(zeros_then(&tail, m));
                    }
                    if len_ok(m + 2) {
                        let mut letters = vec![1u8];
                        letters.extend(vec![0u8; m]);
                        letters.push(1);
                        out.push(Word::from_letters(&letters));
                    }
                }
                if len_ok(2) {
                    out.push(Word::from_letters(&[1, 1])); // 1 0^0 1
                }
            }
            Example1Tree => {
                for p in 0..max_len {
                    if len_ok(2 * p + 2) {
                        out.push(alt_then(p, 0, &[0, 0]));
                    }
                }
                for r in 2..max_len {
                    if len_ok(2 * r + 1) {
                        out.push(alt_then(r, 0, &[1]));
                    }
                    if len_ok(r + 2) {
                        let mut letters = vec![0u8];
                        letters.extend(vec![1u8; r]);
                        letters.push(0);
                        out.push(Word::from_letters(&letters));
                    }
                }
                for q in 1..max_len {
                    if len_ok(q + 2) {
                        let mut letters = vec![1u8; q];
                        letters.extend_from_slice(&[0, 0]);
                        out.push(Word::from_letters(&letters));
                        let mut letters = vec![1u8; q];
                        letters.extend_from_slice(&[0, 1]);
                        out.push(Word::from_letters(&letters));
                    }
                }
            }
            Complete => {
                if self.depth <= max_len {
                    for bits in 0..(1u64 << self.depth) {
                        let letters: Vec<u8> =
                            (0..self.depth).map(|i| ((bits >> i) & 1) as u8).collect();
                        out.push(Word::from_letters(&letters));
                    }
                }
            }
            Filament => {
                for n in 0..max_len {
                    let mut letters: Vec<u8> = (0..n).map(filament_host).collect();
                    letters.push(flip(filament_host(n)));
                    out.push(Word::from_letters(&letters));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Hard-wired α-lis table.
    fn alis_of(&self, c: &[Letter]) -> Option<Word> {
        use FamilyName::*;
        let n = c.len();
        let word = |s: &[Letter]| Some(Word::from_letters(s));
        match self.name {
            LeftComb => word(&[1]),
            CombOfLeftCombs => {
                // α-lis of 0^p 1 0^q 1 is 1 0^q 1.
                let p = run(c, 0, 0);
                Some(Word::from_letters(&c[p..]))
            }
            CombOfRightCombs => word(&[1, 0]),
            CombOfRightCombsCherry => {
                if c == [1, 0, 0] || c == [1, 0, 1] {
                    return Some(Word::from_letters(c));
                }
                let q = run(c, run(c, 0, 0), 1);
                if q == 1 {
                    word(&[0, 1, 0])
                } else {
                    word(&[1, 1, 0])
                }
            }
            BambooBlossom => {
                if c[n - 1] == 0 {
                    word(&[0, 0])
                } else {
                    word(&[1])
                }
            }
            DoubleBamboo => {
                if c[n - 1] == 0 {
                    word(&[0, 0])
                } else {
                    word(&[1, 1])
                }
            }
            Brush => {
                if c == [1] {
                    return word(&[1]);
                }
                let p = run(c, 1, 1);
                let q = run(c, 1 + p, 0);
                if p >= 1 && q == 1 {
                    word(&[1, 0, 1])
                } else {
                    word(&[0, 0, 1])
                }
            }
            Tree51 => {
                if c == [1] {
                    return word(&[1]);
                }
                if c == [0, 0] {
                    return word(&[0, 0]);
                }
                let p = run(c, 1, 1);
                if run(c, 1 + p, 0) == 1 {
                    word(&[1, 0, 1])
                } else {
                    word(&[0, 0, 1])
                }
            }
            Tree53 => {
                if c[0] == 0 {
                    if c[n - 1] == 1 {
                        word(&[1, 1])
                    } else {
                        word(&[0, 1, 0])
                    }
                } else if n == 2 {
                    word(&[1, 1])
                } else {
                    Some(Word::from_letters(c))
                }
            }
            SmallKappas => {
                if c[0] == 1 {
                    // 1 0^m 1: itself for m ≥ 1, else 11.
                    return Some(Word::from_letters(c));
                }
                let m = run(c, 0, 0);
                let k = run(c, m + 1, 0);
                if m + 1 + k == n {
                    // 0^m 1 0^m: α-lis is 0 1 0^m.
                    let mut letters = vec![0u8, 1];
                    letters.extend(vec![0u8; m]);
                    Some(Word::from_letters(&letters))
                } else {
                    // 0^m 1 0^k 1: α-lis is 1 0^k 1 (= 11 when k = 0).
                    let mut letters = vec![1u8];
                    letters.extend(vec![0u8; k]);
                    letters.push(1);
                    Some(Word::from_letters(&letters))
                }
            }
            Example1Tree => {
                if n >= 2 && c[n - 2] == 0 && c[n - 1] == 0 {
                    // (01)^p 00 and 1^q 00.
                    return word(&[0, 0]);
                }
                if c[0] == 1 {
                    // 1^q 0 1.
                    return word(&[1, 0, 1]);
                }
                if c[n - 1] == 0 {
                    // 0 1^r 0: its own α-lis.
                    return Some(Word::from_letters(c));
                }
                // (01)^r 1: longest internal strict suffix is 011.
                word(&[1, 0, 1, 1])
            }
            Complete => Some(Word::from_letters(c)),
            Filament => None,
        }
    }

    fn s_knowledge_impl(&self) -> SKnowledge {
        use FamilyName::*;
        let words = |ss: &[&[Letter]]| {
            let mut v: Vec<Word> = ss.iter().map(|s| Word::from_letters(s)).collect();
            v.sort();
            SKnowledge::Finite(v)
        };
        match self.name {
            LeftComb => words(&[&[1]]),
            CombOfRightCombs => words(&[&[1, 0]]),
            CombOfRightCombsCherry => {
                words(&[&[1, 0, 0], &[1, 0, 1], &[0, 1, 0], &[1, 1, 0]])
            }
            BambooBlossom => words(&[&[1], &[0, 0]]),
            DoubleBamboo => words(&[&[0, 0], &[1, 1]]),
            Brush => words(&[&[1], &[0, 0, 1], &[1, 0, 1]]),
            Tree51 => words(&[&[1], &[0, 0], &[0, 0, 1], &[1, 0, 1]]),
            Complete => {
                let mut v = Vec::new();
                for bits in 0..(1u64 << self.depth) {
                    let letters: Vec<u8> =
                        (0..self.depth).map(|i| ((bits >> i) & 1) as u8).collect();
                    v.push(Word::from_letters(&letters));
                }
                v.sort();
                SKnowledge::Finite(v)
            }
            CombOfLeftCombs | Tree53 | SmallKappas | Example1Tree => SKnowledge::Infinite,
            Filament => SKnowledge::Unknown,
        }
    }
}

impl TreeShape for FamilyShape {
    fn classify(&self, w: &Word) -> NodeClass {
        let letters = w.letters();
        if self.is_context(letters) {
            NodeClass::FiniteContext
        } else if self.is_internal(letters) {
            NodeClass::Internal
        } else {
            NodeClass::ExternalStrict
        }
    }

    fn contexts_up_to(&self, max_len: usize) -> Vec<Word> {
        self.enumerate(max_len)
    }

    fn height(&self) -> Option<usize> {
        match self.name {
            FamilyName::Complete => Some(self.depth),
            _ => None,
        }
    }

    fn stability(&self) -> StabilityKnowledge {
        StabilityKnowledge::ClosedForm(self.name.is_shift_stable())
    }

    fn descriptor(&self) -> SourceDescriptor {
        let params = match self.name {
            FamilyName::Complete => json!({ "depth": self.depth }),
            _ => json!({}),
        };
        SourceDescriptor::Family { name: self.name.id().to_string(), params }
    }

    fn alis_oracle(&self, context: &Word) -> Option<Word> {
        if self.is_context(context.letters()) {
            self.alis_of(context.letters())
        } else {
            None
        }
    }

    fn s_knowledge(&self) -> SKnowledge {
        self.s_knowledge_impl()
    }

    fn stabilized_shape(&self) -> Option<Arc<dyn TreeShape>> {
        match self.name {
            FamilyName::BambooBlossom => {
                Some(Arc::new(FamilyShape { name: FamilyName::DoubleBamboo, depth: 0 }))
            }
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// How to probabilise a family.
#[derive(Debug, Clone)]
pub enum QSpec {
    /// The family's named parameters, with defaults for missing keys.
    Params(BTreeMap<String, f64>),
    Uniform { p1: f64 },
    HashRandom { seed: u64, lo: f64, hi: f64 },
    Table(BTreeMap<Word, f64>),
}

impl QSpec {
    pub fn defaults() -> Self {
        QSpec::Params(BTreeMap::new())
    }
}

/// A family together with its parameters.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub name: FamilyName,
    /// Depth for the complete tree; ignored elsewhere.
    pub depth: Option<usize>,
    pub q: QSpec,
}

/// Builds the bare context tree of a family (spot-validated at load).
pub fn family_tree(name: FamilyName, depth: Option<usize>) -> Result<ContextTree, FamilyError> {
    let depth = match name {
        FamilyName::Complete => {
            let d = depth.unwrap_or(2);
            if d == 0 {
                return Err(FamilyError::BadParams {
                    name: "depth".into(),
                    value: 0.0,
                    reason: "complete tree needs depth ≥ 1",
                });
            }
            d
        }
        _ => 0,
    };
    let shape = Arc::new(FamilyShape { name, depth });
    Ok(ContextTree::from_family_shape(shape)?)
}

/// Builds a probabilised family tree.
pub fn make_family(spec: &FamilySpec) -> Result<ProbabilisedTree, FamilyError> {
    let tree = family_tree(spec.name, spec.depth)?;
    let rule = match &spec.q {
        QSpec::Uniform { p1 } => {
            check_prob("p1", *p1)?;
            QRule::uniform(*p1)
        }
        QSpec::HashRandom { seed, lo, hi } => {
            check_prob("lo", *lo)?;
            check_prob("hi", *hi)?;
            QRule::hash_random(*seed, *lo, *hi)
        }
        QSpec::Table(t) => QRule::table(t.clone()),
        QSpec::Params(params) => class_q_rule(spec.name, spec.depth, params)?,
    };
    Ok(ProbabilisedTree::new(tree, rule))
}

fn check_prob(name: &str, v: f64) -> Result<(), FamilyError> {
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(FamilyError::BadParams {
            name: name.into(),
            value: v,
            reason: "probability must lie in [0, 1]",
        });
    }
    Ok(())
}

/// The per-class q rule of a family: each structural class of contexts
/// gets one constant `q_c(1)`.
fn class_q_rule(
    name: FamilyName,
    depth: Option<usize>,
    params: &BTreeMap<String, f64>,
) -> Result<QRule, FamilyError> {
    let mut values: BTreeMap<String, f64> = name
        .q_params()
        .iter()
        .map(|&(k, v)| (k.to_string(), v))
        .collect();
    for (k, v) in params {
        if !values.contains_key(k.as_str()) {
            return Err(FamilyError::BadParams {
                name: k.clone(),
                value: *v,
                reason: "unknown parameter for this family",
            });
        }
        check_prob(k, *v)?;
        if *v == 0.0 || *v == 1.0 {
            return Err(FamilyError::BadParams {
                name: k.clone(),
                value: *v,
                reason: "class parameters must be strictly inside (0, 1)",
            });
        }
        values.insert(k.clone(), *v);
    }
    let get = |k: &str| values[k];
    let global_min = values
        .values()
        .map(|&p| p.min(1.0 - p))
        .fold(f64::INFINITY, f64::min);
    let shape = FamilyShape { name, depth: depth.unwrap_or(2) };
    let descriptor_params = serde_json::to_value(&values).expect("param map");

    let eval: Box<dyn Fn(&Word) -> Option<f64> + Send + Sync> = match name {
        FamilyName::LeftComb | FamilyName::CombOfLeftCombs | FamilyName::CombOfRightCombs => {
            let v = get("q1");
            Box::new(move |_| Some(v))
        }
        FamilyName::CombOfRightCombsCherry => {
            let (a, b, c, d) = (get("q100"), get("q101"), get("q010"), get("q110"));
            Box::new(move |w| {
                let l = w.letters();
                if l == [1, 0, 0] {
                    Some(a)
                } else if l == [1, 0, 1] {
                    Some(b)
                } else if run(l, run(l, 0, 0), 1) == 1 {
                    Some(c)
                } else {
                    Some(d)
                }
            })
        }
        FamilyName::BambooBlossom => {
            let (qa, qb) = (get("qa"), get("qb"));
            Box::new(move |w| {
                let l = w.letters();
                Some(if l[l.len() - 1] == 0 { qa } else { qb })
            })
        }
        FamilyName::DoubleBamboo => {
            let (qa, qb, qg) = (get("qa"), get("qb"), get("qg"));
            Box::new(move |w| {
                let l = w.letters();
                let n = l.len();
                // (01)^k 00 → qa, (01)^k 1 → qb, (10)^k 0 and (10)^k 11 → qg.
                if l[0] == 1 {
                    Some(qg)
                } else if l[n - 1] == 0 {
                    Some(qa)
                } else {
                    Some(qb)
                }
            })
        }
        FamilyName::Brush => {
            let (q1, spine0) = (get("q1_1"), get("spine_0"));
            Box::new(move |w| {
                if w.letters() == [1] {
                    Some(q1)
                } else {
                    Some(1.0 - spine0)
                }
            })
        }
        FamilyName::Tree51 => {
            let (q1, q00, spine0) = (get("q1_1"), get("q00_1"), get("spine_0"));
            Box::new(move |w| {
                let l = w.letters();
                if l == [1] {
                    Some(q1)
                } else if l == [0, 0] {
                    Some(q00)
                } else {
                    Some(1.0 - spine0)
                }
            })
        }
        FamilyName::Tree53 => {
            let (q10, q11, q101) = (get("q10"), get("q11"), get("q101"));
            Box::new(move |w| {
                let l = w.letters();
                if l[0] == 1 {
                    Some(q101)
                } else if l[l.len() - 1] == 0 {
                    Some(q10)
                } else {
                    Some(q11)
                }
            })
        }
        FamilyName::SmallKappas => {
            let (qa, qb, qc) = (get("qa"), get("qb"), get("qc"));
            Box::new(move |w| {
                let l = w.letters();
                if l[0] == 1 {
                    Some(qc)
                } else if l[l.len() - 1] == 0 {
                    Some(qb)
                } else {
                    Some(qa)
                }
            })
        }
        FamilyName::Example1Tree => {
            let (qa, qb, qc, qd, qe) = (get("qa"), get("qb"), get("qc"), get("qd"), get("qe"));
            Box::new(move |w| {
                let l = w.letters();
                let n = l.len();
                if l[0] == 1 {
                    Some(if l[n - 1] == 0 { qd } else { qe })
                } else if l[n - 1] == 1 {
                    Some(qb)
                } else if l[n - 2] == 0 {
                    Some(qa)
                } else {
                    Some(qc)
                }
            })
        }
        FamilyName::Complete => {
            let p1 = get("p1");
            Box::new(move |_| Some(p1))
        }
        FamilyName::Filament => {
            let q = get("q");
            Box::new(move |_| Some(q))
        }
    };

    // Class dispatch only makes sense on actual contexts.
    let eval = move |w: &Word| {
        if shape.is_context(w.letters()) {
            eval(w)
        } else {
            None
        }
    };
    Ok(QRule::named(
        format!("{}-classes", name.id()),
        descriptor_params,
        Some(global_min),
        eval,
    ))
}

/// A comb-of-right-combs whose teeth probabilities escalate to 1, making
/// the single cascade series diverge: `q_{1^k 0}(1) = 1 − rate^{−k}`, all
/// other contexts `q_c(1) = base`.
pub fn comb_of_right_combs_escalating(base: f64, rate: f64) -> Result<ProbabilisedTree, FamilyError> {
    check_prob("base", base)?;
    if rate <= 1.0 {
        return Err(FamilyError::BadParams {
            name: "rate".into(),
            value: rate,
            reason: "escalation rate must exceed 1",
        });
    }
    let tree = family_tree(FamilyName::CombOfRightCombs, None)?;
    let rule = QRule::named(
        "comb_of_right_combs-escalating",
        json!({ "base": base, "rate": rate }),
        None,
        move |w| {
            let l = w.letters();
            if l[0] == 1 {
                // Tooth context 1^q 0.
                let q = run(l, 0, 1);
                Some(1.0 - rate.powi(-(q as i32)))
            } else {
                Some(base)
            }
        },
    );
    Ok(ProbabilisedTree::new(tree, rule))
}

// ---------------------------------------------------------------------------
// Realization of a strictly positive stochastic matrix
// ---------------------------------------------------------------------------

/// Probabilises a left-comb of left-combs so that the α-lis matrix block
/// `Q_{1 0^i 1, 1 0^j 1}` for `i, j < n` reproduces the given strictly
/// positive row-stochastic matrix: the context `0^j 1 0^i 1` receives
/// `q(1) = a[i][j] / (1 − Σ_{k<j} a[i][k])`. Contexts outside the block
/// get q(1) = 1/2.
pub fn realise_q_from_matrix(a: &[Vec<f64>]) -> Result<ProbabilisedTree, FamilyError> {
    let n = a.len();
    let mut x = vec![vec![0.5f64; n]; n];
    for (i, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(FamilyError::RowNotStochastic { i, sum: f64::NAN });
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(FamilyError::RowNotStochastic { i, sum });
        }
        for (j, &v) in row.iter().enumerate() {
            if v <= 0.0 {
                return Err(FamilyError::NonPositiveEntry { i, j, value: v });
            }
        }
        let mut remaining = 1.0;
        for j in 0..n {
            let v = row[j] / remaining;
            if !(0.0..1.0).contains(&v) && !(j == n - 1 && (v - 1.0).abs() < 1e-9) {
                return Err(FamilyError::DerivedProbabilityOutOfRange { i, j, value: v });
            }
            // Keep strictly inside (0, 1): the last entry of a row solves
            // remaining = a[i][n-1] exactly, which would force q = 1.
            x[i][j] = v.min(1.0 - 1e-15);
            remaining -= row[j];
        }
    }
    let tree = family_tree(FamilyName::CombOfLeftCombs, None)?;
    let rule = QRule::named(
        "realized-matrix",
        json!({ "n": n }),
        None,
        move |w| {
            // Context 0^j 1 0^i 1 belongs to row i (its α-lis is 1 0^i 1)
            // and column position j.
            let l = w.letters();
            let j = run(l, 0, 0);
            let i = run(l, j + 1, 0);
            if i < n && j < n {
                Some(x[i][j])
            } else {
                Some(0.5)
            }
        },
    );
    Ok(ProbabilisedTree::new(tree, rule))
}

// ---------------------------------------------------------------------------
// The summable-fixed-vector counterexample
// ---------------------------------------------------------------------------

/// Left-comb of left-combs probabilised so that the vector
/// `v_q = 1/(q+1) − 1/(q+2)` is a summable left-fixed vector of `Q` while
/// the induced stationary measure has infinite total mass
/// (`Σ_p Σ_q v_q c_{q,p} = Σ_p 1/(p+1)` diverges harmonically).
///
/// Construction: `c_{q,p} = S^{-1}(R_p)^{1/(q+1)}` with
/// `S(x) = Σ_q v_q x^{1/(q+1)}` and `R_p = 1/(p+1)`. The series defining
/// `S` is lumped at index `q_max` (the final weight is `R_{q_max}`, the
/// whole tail), so that `S(1) = 1` exactly and every identity below holds
/// for the realized object itself, not just in the limit. The lumping
/// breaks the fixed-vector identity at the single index `q_max` and
/// nowhere below it.
pub struct Counterexample542 {
    qmax: usize,
    xs: Mutex<HashMap<usize, f64>>,
}

impl Counterexample542 {
    pub fn new(qmax: usize) -> Self {
        assert!(qmax >= 1);
        Counterexample542 { qmax, xs: Mutex::new(HashMap::new()) }
    }

    pub fn qmax(&self) -> usize {
        self.qmax
    }

    /// Lumped weights: `v_q` for `q < q_max`, the whole tail `R_{q_max}`
    /// at `q = q_max`, zero beyond.
    pub fn v(&self, q: usize) -> f64 {
        if q < self.qmax {
            1.0 / (q as f64 + 1.0) - 1.0 / (q as f64 + 2.0)
        } else if q == self.qmax {
            self.r(self.qmax)
        } else {
            0.0
        }
    }

    /// `R_p = Σ_{q ≥ p} v_q = 1/(p+1)`.
    pub fn r(&self, p: usize) -> f64 {
        1.0 / (p as f64 + 1.0)
    }

    /// `S(x) = Σ_q v_q x^{1/(q+1)}` over the lumped weights.
    pub fn s_eval(&self, x: f64) -> f64 {
        let mut sum = KahanSum::new();
        for q in 0..=self.qmax {
            sum.add(self.v(q) * x.powf(1.0 / (q as f64 + 1.0)));
        }
        sum.value()
    }

    /// `x_p = S^{-1}(R_p)`, memoized; bisection to 1e-14.
    pub fn x(&self, p: usize) -> f64 {
        if p == 0 {
            return 1.0;
        }
        if let Some(&x) = self.xs.lock().unwrap().get(&p) {
            return x;
        }
        let target = self.r(p);
        let x = bisect_increasing(|t| self.s_eval(t), 0.0, 1.0, target, 1e-14);
        self.xs.lock().unwrap().insert(p, x);
        x
    }

    /// `c_{q,p} = x_p^{1/(q+1)}`, the cascade of the context `0^p 1 0^q 1`.
    pub fn c(&self, q: usize, p: usize) -> f64 {
        self.x(p).powf(1.0 / (q as f64 + 1.0))
    }

    /// `Σ_q v_q c_{q,p}`, which the construction pins to `R_p`.
    pub fn left_fixed_sum(&self, p: usize) -> f64 {
        self.s_eval(self.x(p))
    }

    /// `Σ_{p ≤ n} Σ_q v_q c_{q,p}`: the total mass of the induced
    /// stationary measure truncated at column `n`; grows like the harmonic
    /// series.
    pub fn total_mass_truncated(&self, n: usize) -> f64 {
        let mut sum = KahanSum::new();
        for p in 0..=n {
            sum.add(self.left_fixed_sum(p));
        }
        sum.value()
    }

    /// The probabilised tree: `q_{0^p 1 0^q 1}(0) = c_{q,p+1} / c_{q,p}`.
    pub fn ptree(self: &Arc<Self>) -> Result<ProbabilisedTree, FamilyError> {
        let tree = family_tree(FamilyName::CombOfLeftCombs, None)?;
        let me = Arc::clone(self);
        let rule = QRule::named(
            "counterexample-542",
            json!({ "qmax": self.qmax }),
            None,
            move |w| {
                let l = w.letters();
                let p = run(l, 0, 0);
                let q = run(l, p + 1, 0);
                let ratio = (me.x(p + 1) / me.x(p)).powf(1.0 / (q as f64 + 1.0));
                Some(1.0 - ratio)
            },
        );
        Ok(ProbabilisedTree::new(tree, rule))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{alpha_lis, cascade};
    use crate::word::w;

    fn ptree(name: FamilyName) -> ProbabilisedTree {
        make_family(&FamilySpec { name, depth: Some(2), q: QSpec::defaults() }).unwrap()
    }

    #[test]
    fn all_families_pass_load_validation() {
        for &name in FamilyName::all() {
            ptree(name);
        }
    }

    #[test]
    fn stability_flags() {
        for &name in FamilyName::all() {
            let pt = ptree(name);
            let verdict = pt.tree().is_stable(24);
            assert_eq!(
                verdict.is_stable(),
                name.is_shift_stable(),
                "stability mismatch for {}",
                name.id()
            );
        }
    }

    #[test]
    fn unstable_families_give_witnesses() {
        for &name in FamilyName::all() {
            if name.is_shift_stable() {
                continue;
            }
            let pt = ptree(name);
            match pt.tree().is_stable(24) {
                crate::context_tree::StabilityVerdict::Unstable { alpha, context } => {
                    let word = context.prepend(alpha);
                    assert_eq!(pt.tree().classify(&word), NodeClass::Internal);
                }
                other => panic!("{} should expose a witness, got {:?}", name.id(), other),
            }
        }
    }

    #[test]
    fn alis_tables_match_computation() {
        for &name in FamilyName::all() {
            let pt = ptree(name);
            for c in pt.tree().contexts_up_to(20) {
                let Some(expected) = pt.tree().alis_oracle(&c) else { continue };
                let computed = alpha_lis(pt.tree(), &c).unwrap().alis();
                assert_eq!(
                    computed,
                    expected,
                    "α-lis mismatch for {} context {}",
                    name.id(),
                    c
                );
            }
        }
    }

    #[test]
    fn brush_context_pattern() {
        let pt = ptree(FamilyName::Brush);
        // Contexts are 1 and 0 1^p 0^q 1.
        assert!(pt.tree().is_context(&w("1")));
        assert!(pt.tree().is_context(&w("001")));
        assert!(pt.tree().is_context(&w("0101")));
        assert!(pt.tree().is_context(&w("011001")));
        assert!(!pt.tree().is_context(&w("01")));
        assert!(pt.tree().is_internal(&w("01")));
        assert!(pt.tree().is_internal(&w("0110")));
    }

    #[test]
    fn tree53_context_pattern() {
        let pt = ptree(FamilyName::Tree53);
        for s in ["010", "011", "0010", "0011", "11", "101", "1001"] {
            assert!(pt.tree().is_context(&w(s)), "{s} should be a context");
        }
        assert!(pt.tree().is_internal(&w("10")));
        assert!(pt.tree().is_internal(&w("001")));
    }

    #[test]
    fn small_kappas_alis_table() {
        let pt = ptree(FamilyName::SmallKappas);
        // 0^m 1 0^m has α-lis 0 1 0^m (a one-term cascade series).
        assert_eq!(alpha_lis(pt.tree(), &w("010")).unwrap().alis(), w("010"));
        assert_eq!(alpha_lis(pt.tree(), &w("00100")).unwrap().alis(), w("0100"));
        // 0^m 1 0^k 1 has α-lis 1 0^k 1.
        assert_eq!(alpha_lis(pt.tree(), &w("001001")).unwrap().alis(), w("1001"));
        assert_eq!(alpha_lis(pt.tree(), &w("0011")).unwrap().alis(), w("11"));
    }

    #[test]
    fn small_kappas_single_term_kappa() {
        // κ for the α-lis 0 1 0^m is the single cascade
        // Π_{j=1}^{m-1} q_{0^j 1 0^j}(0), strictly decreasing in m.
        let mut params = BTreeMap::new();
        params.insert("qb".to_string(), 0.3); // q_{0^m 1 0^m}(1)
        let pt = make_family(&FamilySpec {
            name: FamilyName::SmallKappas,
            depth: None,
            q: QSpec::Params(params),
        })
        .unwrap();
        let q0 = 0.7f64;
        for m in 1..=6usize {
            let mut alis = vec![0u8, 1];
            alis.extend(vec![0u8; m]);
            let alis = Word::from_letters(&alis);
            let k = crate::cascade::kappa(&pt, &alis, 40, 1e-12).unwrap();
            assert!((k.partial - q0.powi(m as i32 - 1)).abs() < 1e-12);
            assert_eq!(k.tail_bound, 0.0);
        }
    }

    #[test]
    fn example1_cascade_worked_example() {
        let pt = ptree(FamilyName::Example1Tree);
        let dec = alpha_lis(pt.tree(), &w("010100")).unwrap();
        assert_eq!(dec.lis, w("0"));
        assert_eq!(dec.alis(), w("00"));
        let factors = crate::cascade::cascade_factors(pt.tree(), &w("010100")).unwrap();
        let want = vec![(w("101"), 0), (w("0100"), 1), (w("100"), 0), (w("00"), 1)];
        assert_eq!(factors, want);
    }

    #[test]
    fn bamboo_blossom_stabilizes_to_double_bamboo() {
        let pt = ptree(FamilyName::BambooBlossom);
        let db = ptree(FamilyName::DoubleBamboo);
        match pt.tree().stabilize(40) {
            crate::context_tree::StabilizeOutcome::Stabilized(t) => {
                assert_eq!(t.contexts_up_to(40), db.tree().contexts_up_to(40));
            }
            other => panic!("expected Stabilized, got {:?}", other),
        }
    }

    #[test]
    fn realization_rejects_bad_matrices() {
        assert!(matches!(
            realise_q_from_matrix(&[vec![1.0, 0.0], vec![0.5, 0.5]]),
            Err(FamilyError::NonPositiveEntry { .. })
        ));
        assert!(matches!(
            realise_q_from_matrix(&[vec![0.9, 0.2], vec![0.5, 0.5]]),
            Err(FamilyError::RowNotStochastic { .. })
        ));
    }

    #[test]
    fn realization_cascade_matches_block() {
        // For the realized tree, casc(1 0^j 1 0^i 1) = a[i][j] must hold
        // entry by entry.
        let a = vec![
            vec![0.3, 0.45, 0.25],
            vec![0.2, 0.5, 0.3],
            vec![0.6, 0.15, 0.25],
        ];
        let pt = realise_q_from_matrix(&a).unwrap();
        for (i, row) in a.iter().enumerate() {
            for (j, &aij) in row.iter().enumerate() {
                // Word 1 0^j 1 0^i 1.
                let mut letters = vec![1u8];
                letters.extend(vec![0u8; j]);
                letters.push(1);
                letters.extend(vec![0u8; i]);
                letters.push(1);
                let word = Word::from_letters(&letters);
                let got = cascade(&pt, &word).unwrap();
                assert!(
                    (got - aij).abs() < 1e-12,
                    "casc mismatch at ({i},{j}): {got} vs {aij}"
                );
            }
        }
    }

    #[test]
    fn counterexample_telescoping_weights() {
        let ce = Counterexample542::new(200);
        let total: f64 = (0..=200).map(|q| ce.v(q)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(ce.v(201), 0.0);
    }

    #[test]
    fn counterexample_q_values_are_probabilities() {
        let ce = Arc::new(Counterexample542::new(50));
        let pt = ce.ptree().unwrap();
        for c in pt.tree().contexts_up_to(12) {
            let q = pt.q(&c).unwrap();
            assert!(q[0] > 0.0 && q[0] < 1.0, "q({c}) = {:?}", q);
        }
    }

    #[test]
    fn filament_host_prefix() {
        // Host ray starts 0 1 0 0 1 1 0 0 0 1 1 1.
        let want = [0u8, 1, 0, 0, 1, 1, 0, 0, 0, 1, 1, 1];
        for (i, &a) in want.iter().enumerate() {
            assert_eq!(filament_host(i), a, "host letter {i}");
        }
    }
}
