//! The α-lis system: the ordered set `S` of context α-lis, κ tables, the
//! matrix `Q`, its left-fixed vectors, and recurrence/transience bounds
//! for countable truncations.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::cascade::{alpha_lis, cascade, kappa_from_lengths, KappaConfig, KappaStatus, KappaSum};
use crate::context_tree::SKnowledge;
use crate::error::{AlisError, CascadeError};
use crate::numeric::KahanSum;
use crate::probabilise::ProbabilisedTree;
use crate::word::Word;

/// The ordered index of context α-lis, in (length, lex) order.
#[derive(Debug, Clone)]
pub struct AlisIndex {
    entries: Vec<Word>,
    truncation: usize,
    complete: bool,
}

impl AlisIndex {
    pub fn entries(&self) -> &[Word] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, alis: &Word) -> Option<usize> {
        self.entries.binary_search(alis).ok()
    }

    /// Max context length inspected to build the index.
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// True when the index provably exhausts `S` (explicit tree fully
    /// enumerated, or a family whose closed-form table is finite and fully
    /// present).
    pub fn complete(&self) -> bool {
        self.complete
    }
}

/// Per-context data shared by the Q assembly and the measure extension.
#[derive(Debug, Clone)]
pub struct ContextRecord {
    pub word: Word,
    pub casc: f64,
    pub alis_idx: usize,
    pub q: [f64; 2],
}

/// Enumerates the α-lis of all contexts of length ≤ `max_len`.
pub fn alis_set(ptree: &ProbabilisedTree, max_len: usize) -> Result<AlisIndex, CascadeError> {
    let (index, _) = alis_set_with_records(ptree, max_len)?;
    Ok(index)
}

pub(crate) fn alis_set_with_records(
    ptree: &ProbabilisedTree,
    max_len: usize,
) -> Result<(AlisIndex, Vec<ContextRecord>), CascadeError> {
    let tree = ptree.tree();
    let contexts = tree.contexts_up_to(max_len);
    let mut set: BTreeMap<Word, ()> = BTreeMap::new();
    let mut raw = Vec::with_capacity(contexts.len());
    for c in contexts {
        let alis = alpha_lis(tree, &c)?.alis();
        let casc = cascade(ptree, &c)?;
        let q = ptree.q(&c)?;
        set.insert(alis.clone(), ());
        raw.push((c, casc, alis, q));
    }
    let entries: Vec<Word> = set.into_keys().collect();
    let complete = match tree.s_knowledge() {
        SKnowledge::Finite(table) => {
            let mut sorted = table;
            sorted.sort();
            sorted == entries
        }
        _ => tree.height().is_some_and(|h| h <= max_len),
    };
    let index = AlisIndex { entries: entries.clone(), truncation: max_len, complete };
    let records = raw
        .into_iter()
        .map(|(word, casc, alis, q)| ContextRecord {
            word,
            casc,
            alis_idx: index.position(&alis).expect("alis indexed"),
            q,
        })
        .collect();
    Ok((index, records))
}

/// Computes κ for every index entry. Entries are independent; the work is
/// spread over `VLMC_THREADS` workers (each κ is summed sequentially in a
/// fixed order, so results are bit-identical regardless of thread count).
pub fn kappa_table(
    ptree: &ProbabilisedTree,
    index: &AlisIndex,
    records: &[ContextRecord],
    cfg: &KappaConfig,
) -> Vec<KappaSum> {
    let stable = ptree.tree().is_stable(cfg.max_len).is_stable();
    let mut groups: Vec<Vec<(usize, f64)>> = vec![Vec::new(); index.len()];
    for r in records {
        groups[r.alis_idx].push((r.word.len(), r.casc));
    }
    let workers = thread_budget().min(index.len().max(1));
    if workers <= 1 {
        return index
            .entries()
            .iter()
            .zip(&groups)
            .map(|(alis, group)| kappa_from_lengths(alis.clone(), group, stable, cfg))
            .collect();
    }
    let mut out: Vec<Option<KappaSum>> = vec![None; index.len()];
    let chunk = index.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (slot, work) in out.chunks_mut(chunk).zip(
            index
                .entries()
                .chunks(chunk)
                .zip(groups.chunks(chunk)),
        ) {
            let (entries, groups) = work;
            scope.spawn(move || {
                for ((o, alis), group) in slot.iter_mut().zip(entries).zip(groups) {
                    *o = Some(kappa_from_lengths(alis.clone(), group, stable, cfg));
                }
            });
        }
    });
    out.into_iter().map(|k| k.expect("filled")).collect()
}

fn thread_budget() -> usize {
    if let Ok(v) = std::env::var("VLMC_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(8)
}

/// The α-lis matrix `Q`, truncated at `max_len`:
/// `Q[αs][βt] = Σ casc(βc)` over finite contexts `c` with α-lis `αs` and
/// prefix `t`. Entries with no matching context are exactly zero.
#[derive(Debug, Clone)]
pub struct QMatrix {
    index: AlisIndex,
    kappas: Vec<KappaSum>,
    entries: Vec<Vec<f64>>,
    /// Per-row frontier mass: a bound for every entry of the row and for
    /// the row-sum defect.
    row_tail: Vec<f64>,
    records: Vec<ContextRecord>,
}

impl QMatrix {
    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn index(&self) -> &AlisIndex {
        &self.index
    }

    pub fn kappas(&self) -> &[KappaSum] {
        &self.kappas
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row][col]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        let mut s = KahanSum::new();
        for &x in &self.entries[row] {
            s.add(x);
        }
        s.value()
    }

    pub fn row_tail(&self, row: usize) -> f64 {
        self.row_tail[row]
    }

    pub(crate) fn records(&self) -> &[ContextRecord] {
        &self.records
    }

    /// Strong connectivity of the directed graph of strictly positive
    /// entries.
    pub fn positive_graph_strongly_connected(&self) -> bool {
        let n = self.dim();
        if n == 0 {
            return false;
        }
        let forward = |i: usize| -> Vec<usize> {
            (0..n).filter(|&j| self.entries[i][j] > 0.0).collect()
        };
        let backward = |i: usize| -> Vec<usize> {
            (0..n).filter(|&j| self.entries[j][i] > 0.0).collect()
        };
        reaches_all(n, forward) && reaches_all(n, backward)
    }

    /// CSV rendering: header row/column are the α-lis labels.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alis");
        for e in self.index.entries() {
            out.push(',');
            out.push_str(&e.to_string());
        }
        out.push('\n');
        for (i, row) in self.entries.iter().enumerate() {
            out.push_str(&self.index.entries()[i].to_string());
            for &x in row {
                out.push(',');
                out.push_str(&format!("{:.17e}", x));
            }
            out.push('\n');
        }
        out
    }
}

fn reaches_all(n: usize, neighbours: impl Fn(usize) -> Vec<usize>) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for j in neighbours(i) {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == n
}

/// Assembles the truncated `Q`. Errors when some cascade series carries
/// divergence evidence; rows whose κ is merely truncated are kept and
/// their frontier mass is reported per row.
pub fn build_q(ptree: &ProbabilisedTree, max_len: usize, tol: f64) -> Result<QMatrix, AlisError> {
    let cfg = KappaConfig { max_len, tol, ..KappaConfig::default() };
    build_q_with(ptree, &cfg)
}

pub fn build_q_with(ptree: &ProbabilisedTree, cfg: &KappaConfig) -> Result<QMatrix, AlisError> {
    let (index, records) = alis_set_with_records(ptree, cfg.max_len)?;
    let kappas = kappa_table(ptree, &index, &records, cfg);
    for k in &kappas {
        if let KappaStatus::Diverged { evidence } = &k.status {
            return Err(AlisError::CascadeDiverged {
                alis: k.alis.clone(),
                evidence: evidence.clone(),
            });
        }
    }
    let n = index.len();
    let mut acc = vec![vec![KahanSum::new(); n]; n];
    for r in &records {
        for (col, beta_t) in index.entries().iter().enumerate() {
            let t = beta_t.shift();
            let beta = beta_t.get(0);
            if t.is_prefix_of(&r.word) {
                acc[r.alis_idx][col].add(r.q[beta as usize] * r.casc);
            }
        }
    }
    let entries: Vec<Vec<f64>> =
        acc.into_iter().map(|row| row.into_iter().map(|s| s.value()).collect()).collect();
    let row_tail = kappas.iter().map(|k| k.tail_bound).collect();
    Ok(QMatrix { index, kappas, entries, row_tail, records })
}

/// Normalization of a fixed vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    UnitSum,
    /// `Σ v_{αs} κ_{αs} = 1`.
    KappaWeighted,
}

/// A left-fixed row vector of `Q` (`vQ = v`).
#[derive(Debug, Clone)]
pub struct FixedVector {
    /// Unit-sum normalized values, indexed like the α-lis index.
    pub values: Vec<f64>,
    /// κ-weighted renormalization, when every κ converged.
    pub kappa_weighted: Option<Vec<f64>>,
    /// `max |vQ − v|` for the unit-sum vector.
    pub residual: f64,
    pub normalization: Normalization,
}

/// Outcome of the fixed-vector search.
#[derive(Debug, Clone)]
pub enum FixedVectorOutcome {
    Unique(FixedVector),
    NoneFound,
    /// Nullspace dimension ≥ 2 within the rank tolerance.
    NotUniqueEvidence { nullity: usize },
}

/// Rank tolerance separating a genuine fixed direction from noise.
const NULLSPACE_TOL: f64 = 1e-9;

/// Finds left-fixed vectors of the truncated `Q`.
///
/// For dimensions ≤ 64 the singular system `(Qᵀ − I) x = 0` is solved
/// directly by SVD and the nullspace dimension is read off the singular
/// values; larger systems fall back to power iteration on `Qᵀ`.
pub fn left_fixed_vector(
    q: &QMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<FixedVectorOutcome, AlisError> {
    let n = q.dim();
    if n == 0 {
        return Ok(FixedVectorOutcome::NoneFound);
    }
    if n <= 64 {
        left_fixed_vector_svd(q)
    } else {
        left_fixed_vector_power(q, tol, max_iter)
    }
}

fn left_fixed_vector_svd(q: &QMatrix) -> Result<FixedVectorOutcome, AlisError> {
    let n = q.dim();
    // M = Qᵀ − I, so that M vᵀ = 0 ⟺ vQ = v.
    let m = DMatrix::from_fn(n, n, |i, j| {
        let qt = q.entry(j, i);
        if i == j {
            qt - 1.0
        } else {
            qt
        }
    });
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let threshold = NULLSPACE_TOL * sigma_max.max(1.0);
    let null_indices: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(i, _)| i)
        .collect();
    match null_indices.len() {
        0 => Ok(FixedVectorOutcome::NoneFound),
        1 => {
            let row = null_indices[0];
            let mut x: Vec<f64> = (0..n).map(|j| v_t[(row, j)]).collect();
            let sum: f64 = x.iter().sum();
            if sum < 0.0 {
                for v in &mut x {
                    *v = -*v;
                }
            }
            Ok(FixedVectorOutcome::Unique(finish_vector(q, x)))
        }
        k => Ok(FixedVectorOutcome::NotUniqueEvidence { nullity: k }),
    }
}

fn left_fixed_vector_power(
    q: &QMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<FixedVectorOutcome, AlisError> {
    let n = q.dim();
    let mut v = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let mut next = vec![0.0f64; n];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for j in 0..n {
                next[j] += vi * q.entry(i, j);
            }
        }
        let norm: f64 = next.iter().map(|x| x.abs()).sum();
        if norm == 0.0 {
            return Ok(FixedVectorOutcome::NoneFound);
        }
        for x in &mut next {
            *x /= norm;
        }
        residual =
            v.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if residual <= tol {
            return Ok(FixedVectorOutcome::Unique(finish_vector(q, v)));
        }
    }
    Err(AlisError::DidNotConverge { max_iter, residual })
}

fn finish_vector(q: &QMatrix, mut x: Vec<f64>) -> FixedVector {
    let n = q.dim();
    // Unit-sum normalization; crush sign noise.
    for v in &mut x {
        if v.abs() < 1e-14 {
            *v = 0.0;
        }
    }
    let sum: f64 = x.iter().sum();
    let values: Vec<f64> = x.iter().map(|v| v / sum).collect();
    let mut residual = 0.0f64;
    for j in 0..n {
        let mut col = KahanSum::new();
        for i in 0..n {
            col.add(values[i] * q.entry(i, j));
        }
        residual = residual.max((col.value() - values[j]).abs());
    }
    let all_converged = q
        .kappas()
        .iter()
        .all(|k| matches!(k.status, KappaStatus::Converged { .. }));
    let kappa_weighted = if all_converged {
        let mut mass = KahanSum::new();
        for (v, k) in values.iter().zip(q.kappas()) {
            mass.add(v * k.partial);
        }
        let mass = mass.value();
        if mass > 0.0 {
            Some(values.iter().map(|v| v / mass).collect())
        } else {
            None
        }
    } else {
        None
    };
    FixedVector { values, kappa_weighted, residual, normalization: Normalization::UnitSum }
}

// ---------------------------------------------------------------------------
// Recurrence / transience bounds
// ---------------------------------------------------------------------------

/// Certified bounds for the countable chain read off truncations of `Q`.
#[derive(Debug, Clone)]
pub enum RecurrenceOutcome {
    /// Lower bound on the return probability to the first state; `1` means
    /// recurrence is certified (finite complete case).
    RecurrentEvidence { return_prob_lower: f64, per_level: Vec<(usize, f64)> },
    /// Certified positive lower bound on the escape probability, which
    /// proves transience.
    TransientEvidence { escape_prob_lower: f64 },
    /// Neither certificate; carries the per-level return bounds.
    Inconclusive { per_level: Vec<(usize, f64)>, note: String },
}

/// Lower bound on the probability of returning to state `0` for the chain
/// whose transition probabilities are `entry(i, j)`: excursions beyond the
/// first `n` states are counted as failures (sub-stochastic truncation),
/// so the bound is monotone in `n`.
pub fn return_probability_lower(entry: &dyn Fn(usize, usize) -> f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return entry(0, 0);
    }
    let m = n - 1;
    let b = DMatrix::from_fn(m, m, |i, j| {
        let (si, sj) = (i + 1, j + 1);
        if si == sj {
            1.0 - entry(si, sj)
        } else {
            -entry(si, sj)
        }
    });
    let rhs = nalgebra::DVector::from_fn(m, |i, _| entry(i + 1, 0));
    match b.full_piv_lu().solve(&rhs) {
        Some(h) => {
            let mut total = KahanSum::new();
            total.add(entry(0, 0));
            for j in 0..m {
                total.add(entry(0, j + 1) * h[j].clamp(0.0, 1.0));
            }
            total.value().min(1.0)
        }
        None => 0.0,
    }
}

/// Lower bound on the escape probability via the monotone never-returning
/// path `0 → 1 → 2 → ⋯`: the product of the first `horizon` superdiagonal
/// entries times `1 − tail_deficit`, where `tail_deficit` must bound
/// `Σ_{i ≥ horizon} (1 − a_{i,i+1})` (Weierstrass). A positive result
/// certifies transience.
pub fn escape_probability_lower(
    superdiag: &dyn Fn(usize) -> f64,
    horizon: usize,
    tail_deficit: f64,
) -> f64 {
    let mut product = 1.0f64;
    for i in 0..horizon {
        product *= superdiag(i);
    }
    (product * (1.0 - tail_deficit)).max(0.0)
}

/// Ingredients for the transience certificate: walk the superdiagonal for
/// `horizon` steps, then bound the rest of the product through a caller-
/// supplied bound on `Σ_{i ≥ horizon} (1 − a_{i,i+1})`.
#[derive(Debug, Clone, Copy)]
pub struct EscapeSpec {
    pub horizon: usize,
    pub superdiag_tail_deficit: f64,
}

/// Recurrence analysis of an abstract countable row-stochastic matrix
/// given by an entry oracle. Return-probability lower bounds are computed
/// at each truncation level; an [`EscapeSpec`] enables the transience
/// certificate.
pub fn recurrence_bounds_matrix(
    entry: &dyn Fn(usize, usize) -> f64,
    return_levels: &[usize],
    escape: Option<EscapeSpec>,
) -> RecurrenceOutcome {
    let per_level: Vec<(usize, f64)> = return_levels
        .iter()
        .map(|&n| (n, return_probability_lower(entry, n)))
        .collect();
    let best_return = per_level.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    if best_return >= 1.0 - 1e-9 {
        return RecurrenceOutcome::RecurrentEvidence { return_prob_lower: best_return, per_level };
    }
    if let Some(spec) = escape {
        let bound = escape_probability_lower(
            &|i| entry(i, i + 1),
            spec.horizon,
            spec.superdiag_tail_deficit,
        );
        if bound > 0.0 {
            return RecurrenceOutcome::TransientEvidence { escape_prob_lower: bound };
        }
    }
    RecurrenceOutcome::Inconclusive {
        per_level,
        note: "no certificate from the inspected truncations".into(),
    }
}

/// Recurrence bounds for the α-lis chain of a stable probabilised tree,
/// read off nested truncations of `Q`.
pub fn recurrence_bounds(
    ptree: &ProbabilisedTree,
    levels: &[usize],
    cfg: &KappaConfig,
) -> Result<RecurrenceOutcome, AlisError> {
    if !ptree.tree().is_stable(cfg.max_len).is_stable() {
        return Err(AlisError::TreeNotStable);
    }
    let q = build_q_with(ptree, cfg)?;
    // A complete finite index of a stable non-null tree is an irreducible
    // finite stochastic chain: recurrent outright.
    if q.index().complete() {
        let levels = vec![(q.dim(), 1.0)];
        return Ok(RecurrenceOutcome::RecurrentEvidence {
            return_prob_lower: 1.0,
            per_level: levels,
        });
    }
    let entry = |i: usize, j: usize| {
        if i < q.dim() && j < q.dim() {
            q.entry(i, j)
        } else {
            0.0
        }
    };
    let levels: Vec<usize> = levels.iter().map(|&n| n.min(q.dim())).collect();
    Ok(recurrence_bounds_matrix(&entry, &levels, None))
}

/// Rebuilds `Q` from a tree constructed by
/// [`crate::families::realise_q_from_matrix`] and returns the maximum
/// absolute deviation from the target block.
pub fn verify_realization(
    ptree: &ProbabilisedTree,
    a: &[Vec<f64>],
    max_len: usize,
    tol: f64,
) -> Result<f64, AlisError> {
    let q = build_q(ptree, max_len, tol)?;
    let n = a.len();
    let mut dev = 0.0f64;
    for i in 0..n {
        // Row index of the α-lis 1 0^i 1.
        let mut letters = vec![1u8];
        letters.extend(vec![0u8; i]);
        letters.push(1);
        let alis = Word::from_letters(&letters);
        let row = q
            .index()
            .position(&alis)
            .ok_or(AlisError::Cascade(CascadeError::NotAnAlis {
                word: alis.clone(),
                max_len,
            }))?;
        for (j, &aij) in a[i].iter().enumerate() {
            let mut letters = vec![1u8];
            letters.extend(vec![0u8; j]);
            letters.push(1);
            let col_alis = Word::from_letters(&letters);
            let col = q.index().position(&col_alis).ok_or(AlisError::Cascade(
                CascadeError::NotAnAlis { word: col_alis.clone(), max_len },
            ))?;
            dev = dev.max((q.entry(row, col) - aij).abs());
        }
    }
    Ok(dev)
}

/// CSV rendering of a κ table: `alis,partial,tail_bound,status`.
pub fn kappa_table_csv(kappas: &[KappaSum]) -> String {
    let mut out = String::from("alis,partial,tail_bound,status\n");
    for k in kappas {
        let status = match &k.status {
            KappaStatus::Converged { .. } => "converged".to_string(),
            KappaStatus::Diverged { .. } => "diverged".to_string(),
            KappaStatus::Truncated => "truncated".to_string(),
        };
        out.push_str(&format!(
            "{},{:.17e},{:.17e},{}\n",
            k.alis, k.partial, k.tail_bound, status
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context_tree::ContextTree;
    use crate::families::{make_family, FamilyName, FamilySpec, QSpec};
    use crate::probabilise::QRule;
    use crate::word::w;

    fn complete1(q0: f64, q1: f64) -> ProbabilisedTree {
        let tree = ContextTree::explicit([w("0"), w("1")]).unwrap();
        let mut t = std::collections::BTreeMap::new();
        t.insert(w("0"), q0);
        t.insert(w("1"), q1);
        ProbabilisedTree::new(tree, QRule::table(t))
    }

    #[test]
    fn depth1_q_is_the_transition_matrix() {
        // On the complete depth-1 tree each context is its own α-lis and
        // Q_{a,b} = q_a(b).
        let pt = complete1(0.7, 0.4);
        let q = build_q(&pt, 8, 1e-12).unwrap();
        assert_eq!(q.dim(), 2);
        assert_eq!(q.index().entries(), &[w("0"), w("1")]);
        assert!((q.entry(0, 0) - 0.3).abs() < 1e-15);
        assert!((q.entry(0, 1) - 0.7).abs() < 1e-15);
        assert!((q.entry(1, 0) - 0.6).abs() < 1e-15);
        assert!((q.entry(1, 1) - 0.4).abs() < 1e-15);
        assert!(q.index().complete());
    }

    #[test]
    fn doubly_stochastic_2x2_fixed_vector() {
        let pt = complete1(0.5, 0.5);
        let q = build_q(&pt, 8, 1e-12).unwrap();
        match left_fixed_vector(&q, 1e-12, 1000).unwrap() {
            FixedVectorOutcome::Unique(v) => {
                assert!((v.values[0] - 0.5).abs() < 1e-12);
                assert!((v.values[1] - 0.5).abs() < 1e-12);
                assert!(v.residual < 1e-12);
            }
            other => panic!("expected Unique, got {:?}", other),
        }
    }

    #[test]
    fn alis_set_for_builtin_families() {
        let brush = make_family(&FamilySpec {
            name: FamilyName::Brush,
            depth: None,
            q: QSpec::defaults(),
        })
        .unwrap();
        let index = alis_set(&brush, 32).unwrap();
        assert_eq!(index.entries(), &[w("1"), w("001"), w("101")]);
        assert!(index.complete());

        let t51 = make_family(&FamilySpec {
            name: FamilyName::Tree51,
            depth: None,
            q: QSpec::defaults(),
        })
        .unwrap();
        let index = alis_set(&t51, 32).unwrap();
        assert_eq!(index.entries(), &[w("1"), w("00"), w("001"), w("101")]);
    }

    #[test]
    fn kappa_table_handles_thread_budget() {
        let pt = make_family(&FamilySpec {
            name: FamilyName::DoubleBamboo,
            depth: None,
            q: QSpec::defaults(),
        })
        .unwrap();
        let (index, records) = alis_set_with_records(&pt, 40).unwrap();
        let cfg = KappaConfig { max_len: 40, ..KappaConfig::default() };
        let table = kappa_table(&pt, &index, &records, &cfg);
        assert_eq!(table.len(), 2);
        for k in &table {
            assert!(k.partial > 1.0, "κ ≥ 1 on a stable tree, got {}", k.partial);
        }
    }

    #[test]
    fn return_probability_is_monotone_in_truncation() {
        // Simple reflecting random walk on {0, 1, 2, ..}: p(i→i+1) = 0.4,
        // p(i→i−1 or 0→0) = 0.6. Recurrent; bounds must increase.
        let entry = |i: usize, j: usize| -> f64 {
            if j == i + 1 {
                0.4
            } else if (i > 0 && j == i - 1) || (i == 0 && j == 0) {
                0.6
            } else {
                0.0
            }
        };
        let r8 = return_probability_lower(&entry, 8);
        let r16 = return_probability_lower(&entry, 16);
        let r32 = return_probability_lower(&entry, 32);
        assert!(r8 < r16 && r16 < r32);
        assert!(r32 > 0.99, "recurrent walk should approach 1, got {r32}");
    }

    #[test]
    fn escape_bound_is_certified() {
        // Constant superdiagonal 0.9 with geometric deficit tail.
        let escape = escape_probability_lower(&|_| 0.9, 20, 0.05);
        assert!(escape > 0.0 && escape < 0.9f64.powi(20));
    }
}
