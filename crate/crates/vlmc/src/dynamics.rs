//! Simulation of the chain, the context process, and its semi-Markov
//! α-lis decomposition.
//!
//! The sampler keeps a finite history suffix in reading order (most recent
//! letter last) and mirrors it at the classification boundary: the next
//! letter is drawn from `q_{lpref(mirror(history))}`. Histories are never
//! guessed; if the retained window cannot resolve a context the step fails
//! loudly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alis::build_q;
use crate::cascade::{alpha_lis, cascade};
use crate::error::{CascadeError, DynamicsError};
use crate::numeric::KahanSum;
use crate::probabilise::ProbabilisedTree;
use crate::word::{Letter, Word};

/// How to initialize the history.
#[derive(Debug, Clone)]
pub enum SamplerInit {
    /// A user-supplied finite suffix, reading order (most recent last).
    /// Must already resolve a context.
    History(Word),
    /// Start from the (length, lex)-smallest context and discard `burn_in`
    /// steps.
    BurnIn { burn_in: usize },
}

/// Exact sampler for the chain of a probabilised tree.
///
/// Single-owner; independent samplers with independent seeds may run in
/// parallel.
#[derive(Debug)]
pub struct Sampler {
    ptree: ProbabilisedTree,
    /// Reading order: oldest letter first, most recent letter last.
    history: Vec<Letter>,
    rng: ChaCha8Rng,
    seed: u64,
    longest_context_seen: usize,
}

impl Sampler {
    pub fn new(
        ptree: ProbabilisedTree,
        init: SamplerInit,
        seed: u64,
    ) -> Result<Self, DynamicsError> {
        let history = match &init {
            SamplerInit::History(w) => w.letters().to_vec(),
            SamplerInit::BurnIn { .. } => {
                let c = ptree
                    .tree()
                    .contexts_up_to(64)
                    .into_iter()
                    .next()
                    .ok_or(DynamicsError::NonStableInput)?;
                c.mirror().letters().to_vec()
            }
        };
        let mut sampler =
            Sampler { ptree, history, rng: ChaCha8Rng::seed_from_u64(seed), seed, longest_context_seen: 0 };
        // The initial history must already resolve a context.
        sampler.current_context()?;
        if let SamplerInit::BurnIn { burn_in } = init {
            for _ in 0..burn_in {
                sampler.step()?;
            }
        }
        Ok(sampler)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The context of the current history: `lpref(mirror(history))`.
    pub fn current_context(&self) -> Result<Word, DynamicsError> {
        let mirrored = Word::from_letters(
            &self.history.iter().rev().copied().collect::<Vec<_>>(),
        );
        Ok(self.ptree.tree().lpref_history(&mirrored)?)
    }

    /// Draws the next letter and appends it to the history.
    pub fn step(&mut self) -> Result<Letter, DynamicsError> {
        let context = self.current_context()?;
        self.longest_context_seen = self.longest_context_seen.max(context.len());
        let q = self.ptree.q(&context)?;
        for a in [0u8, 1u8] {
            if q[a as usize] == 0.0 {
                return Err(DynamicsError::NotNonNull { context, letter: a });
            }
        }
        let u: f64 = self.rng.gen();
        let letter = if u < q[1] { 1 } else { 0 };
        self.history.push(letter);
        self.trim();
        Ok(letter)
    }

    /// Retention policy: keep the last
    /// `max(64, longest context seen + 16)` letters. Contexts can be
    /// unbounded (combs), so the window adapts upward.
    fn trim(&mut self) {
        let window = 64usize.max(self.longest_context_seen + 16);
        if self.history.len() > 2 * window {
            let drop = self.history.len() - window;
            self.history.drain(..drop);
        }
    }

    /// Runs `n` steps and returns the emitted letters in reading order.
    pub fn run(&mut self, n: usize) -> Result<Vec<Letter>, DynamicsError> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.step()?);
        }
        Ok(out)
    }

    /// Emits the context before each of `n` steps: `C_k = lpref(mirror
    /// (history))` for `k = 0, …, n−1`. The context process is a Markov
    /// chain exactly when the tree is stable; the `markov` flag records
    /// that.
    pub fn context_process(&mut self, n: usize) -> Result<ContextProcess, DynamicsError> {
        let mut contexts = Vec::with_capacity(n);
        for _ in 0..n {
            contexts.push(self.current_context()?);
            self.step()?;
        }
        let markov = self.ptree.tree().is_stable(64).is_stable();
        Ok(ContextProcess { contexts, markov })
    }
}

/// A context trajectory together with its Markov-property tag.
#[derive(Debug, Clone)]
pub struct ContextProcess {
    pub contexts: Vec<Word>,
    pub markov: bool,
}

/// The jump structure of the α-lis process along a context trajectory:
/// `S_0 = 0`, and `S_{n+1}` is the next time the context equals its own
/// α-lis (equivalently, the next time the context length fails to grow).
/// `J_n` is the α-lis occupied on `[S_n, S_{n+1})`.
#[derive(Debug, Clone)]
pub struct JumpRecord {
    /// Pairs `(S_n, J_n)`, starting with `S_0 = 0`.
    pub jumps: Vec<(usize, Word)>,
    pub trajectory_len: usize,
}

impl JumpRecord {
    /// Completed sojourns as `(J_n, S_{n+1} − S_n, J_{n+1})` triples.
    pub fn sojourns(&self) -> Vec<(Word, usize, Word)> {
        self.jumps
            .windows(2)
            .map(|w| (w[0].1.clone(), w[1].0 - w[0].0, w[1].1.clone()))
            .collect()
    }
}

/// Decomposes a context trajectory from a stable tree into jumps.
///
/// Both characterizations of jump times (context equals its own α-lis;
/// context length does not grow) are computed and cross-asserted.
pub fn jump_decomposition(
    ptree: &ProbabilisedTree,
    contexts: &[Word],
) -> Result<JumpRecord, DynamicsError> {
    if !ptree.tree().is_stable(64).is_stable() {
        return Err(DynamicsError::NonStableInput);
    }
    if contexts.is_empty() {
        return Ok(JumpRecord { jumps: Vec::new(), trajectory_len: 0 });
    }
    let tree = ptree.tree();
    let mut jumps = Vec::new();
    let first_alis = alpha_lis(tree, &contexts[0])?.alis();
    jumps.push((0usize, first_alis));
    for k in 1..contexts.len() {
        let alis = alpha_lis(tree, &contexts[k])?.alis();
        let is_jump_by_alis = alis == contexts[k];
        let is_jump_by_length = contexts[k].len() <= contexts[k - 1].len();
        if is_jump_by_alis != is_jump_by_length {
            // The two characterizations agree on every stable-tree
            // trajectory; disagreement means the input is not such a
            // trajectory.
            return Err(DynamicsError::NonStableInput);
        }
        if is_jump_by_alis {
            jumps.push((k, alis));
        }
    }
    Ok(JumpRecord { jumps, trajectory_len: contexts.len() })
}

/// Semi-Markov kernel of the α-lis chain on a stable tree:
/// the probability, starting from the α-lis `from`, that the next jump
/// happens after exactly `k` steps and lands on `to`. It is the sum of
/// `casc(β c)` over contexts `c` with α-lis `from`, prefix `t` (where
/// `to = βt`), and `|c| = |from| + k − 1`: the jump leaves from the
/// depth-(k−1) node of the descent tree reached after `k − 1` descents.
pub fn semi_markov_kernel(
    ptree: &ProbabilisedTree,
    from: &Word,
    to: &Word,
    k: usize,
) -> Result<f64, DynamicsError> {
    let tree = ptree.tree();
    if !tree.is_stable(from.len() + k + 8).is_stable() {
        return Err(DynamicsError::Cascade(CascadeError::TreeNotStable));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let beta = to.get(0);
    let t = to.shift();
    let target_len = from.len() + k - 1;
    let mut sum = KahanSum::new();
    for c in tree.contexts_up_to(target_len) {
        if c.len() != target_len || !t.is_prefix_of(&c) {
            continue;
        }
        if alpha_lis(tree, &c)?.alis() != *from {
            continue;
        }
        sum.add(ptree.q_letter(&c, beta)? * cascade(ptree, &c)?);
    }
    Ok(sum.value())
}

/// Sums the semi-Markov kernel over sojourn lengths; equals the `Q` entry
/// within the truncation tail.
pub fn kernel_row_sum(
    ptree: &ProbabilisedTree,
    from: &Word,
    to: &Word,
    max_k: usize,
) -> Result<f64, DynamicsError> {
    let mut sum = KahanSum::new();
    for k in 1..=max_k {
        sum.add(semi_markov_kernel(ptree, from, to, k)?);
    }
    Ok(sum.value())
}

/// Empirical frequency (with binomial standard error) of the cylinder
/// `L·mirror(w)` in a letter trajectory: the fraction of sliding windows
/// spelling `mirror(w)` in reading order. The standard error treats
/// windows as independent; for a correlated chain it is a diagnostic, not
/// a confidence interval.
pub fn empirical_cylinder(
    trajectory: &[Letter],
    w: &Word,
) -> Result<(f64, f64), DynamicsError> {
    if w.is_empty() {
        return Ok((1.0, 0.0));
    }
    if trajectory.len() < w.len() {
        return Err(DynamicsError::TrajectoryTooShort {
            len: trajectory.len(),
            word_len: w.len(),
        });
    }
    let pattern = w.mirror();
    let pat = pattern.letters();
    let n = trajectory.len() - w.len() + 1;
    let count = trajectory.windows(w.len()).filter(|win| *win == pat).count();
    let p = count as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    Ok((p, se))
}

/// Cross-check helper: total kernel mass
/// `Σ_k Σ_{βt} kernel(αs, βt, k)` over the truncated index, which must
/// approach 1 for a stable converged tree.
pub fn kernel_total_mass(
    ptree: &ProbabilisedTree,
    from: &Word,
    max_len: usize,
    tol: f64,
) -> Result<f64, DynamicsError> {
    let q = build_q(ptree, max_len, tol).map_err(|e| match e {
        crate::error::AlisError::Cascade(c) => DynamicsError::Cascade(c),
        _ => DynamicsError::Cascade(CascadeError::TreeNotStable),
    })?;
    let row = q.index().position(from).ok_or_else(|| {
        DynamicsError::Cascade(CascadeError::NotAnAlis { word: from.clone(), max_len })
    })?;
    Ok(q.row_sum(row))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context_tree::ContextTree;
    use crate::probabilise::QRule;
    use crate::word::w;
    use std::collections::BTreeMap;

    fn depth1(q0_1: f64, q1_1: f64) -> ProbabilisedTree {
        let tree = ContextTree::explicit([w("0"), w("1")]).unwrap();
        let mut t = BTreeMap::new();
        t.insert(w("0"), q0_1);
        t.insert(w("1"), q1_1);
        ProbabilisedTree::new(tree, QRule::table(t))
    }

    #[test]
    fn seed_determinism() {
        let pt = depth1(0.7, 0.4);
        let mut a = Sampler::new(pt.clone(), SamplerInit::History(w("0")), 42).unwrap();
        let mut b = Sampler::new(pt, SamplerInit::History(w("0")), 42).unwrap();
        assert_eq!(a.run(2000).unwrap(), b.run(2000).unwrap());
    }

    #[test]
    fn depth1_conditional_frequencies() {
        // P(1 | last = 0) = 0.7 within ±0.01 over 10^6 steps.
        let pt = depth1(0.7, 0.4);
        let mut s = Sampler::new(pt, SamplerInit::History(w("0")), 7).unwrap();
        let traj = s.run(1_000_000).unwrap();
        let mut after_zero = 0usize;
        let mut ones_after_zero = 0usize;
        for win in traj.windows(2) {
            if win[0] == 0 {
                after_zero += 1;
                if win[1] == 1 {
                    ones_after_zero += 1;
                }
            }
        }
        let p = ones_after_zero as f64 / after_zero as f64;
        assert!((p - 0.7).abs() < 0.01, "empirical P(1|0) = {p}");
    }

    #[test]
    fn history_too_short_fails_loudly() {
        // The left-comb-like finite tree {1, 01, 001, 000} cannot resolve
        // a context from the history "0".
        let tree = ContextTree::explicit([w("1"), w("01"), w("001"), w("000")]).unwrap();
        let pt = ProbabilisedTree::new(tree, QRule::uniform(0.5));
        assert!(Sampler::new(pt, SamplerInit::History(w("0")), 1).is_err());
    }

    #[test]
    fn empirical_cylinder_edge_cases() {
        assert_eq!(empirical_cylinder(&[0, 0, 0], &w("1")).unwrap().0, 0.0);
        assert!(matches!(
            empirical_cylinder(&[0, 1], &w("101")),
            Err(DynamicsError::TrajectoryTooShort { .. })
        ));
        // w = "10" (most recent first) means reading-order windows "01".
        let (p, _) = empirical_cylinder(&[0, 1, 0, 1, 0], &w("10")).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn context_process_emits_n_and_tags_markov() {
        let pt = depth1(0.7, 0.4);
        let mut s = Sampler::new(pt, SamplerInit::History(w("0")), 5).unwrap();
        let cp = s.context_process(10).unwrap();
        assert_eq!(cp.contexts.len(), 10);
        assert!(cp.markov);
        let empty = s.context_process(0).unwrap();
        assert!(empty.contexts.is_empty());
    }

    #[test]
    fn jump_decomposition_on_depth1_jumps_every_step() {
        // Every depth-1 context equals its own α-lis, so every time is a
        // jump time.
        let pt = depth1(0.6, 0.5);
        let mut s = Sampler::new(pt.clone(), SamplerInit::History(w("0")), 11).unwrap();
        let cp = s.context_process(50).unwrap();
        let jr = jump_decomposition(&pt, &cp.contexts).unwrap();
        assert_eq!(jr.jumps.len(), 50);
        for (i, (s_n, _)) in jr.jumps.iter().enumerate() {
            assert_eq!(*s_n, i);
        }
    }

    #[test]
    fn kernel_matches_q_on_depth1() {
        let pt = depth1(0.7, 0.4);
        // kernel(a, b, 1) = q_a(b); zero for k ≥ 2.
        let k1 = semi_markov_kernel(&pt, &w("0"), &w("1"), 1).unwrap();
        assert!((k1 - 0.7).abs() < 1e-15);
        assert_eq!(semi_markov_kernel(&pt, &w("0"), &w("1"), 2).unwrap(), 0.0);
        let total = kernel_row_sum(&pt, &w("0"), &w("1"), 8).unwrap();
        assert!((total - 0.7).abs() < 1e-15);
    }
}
