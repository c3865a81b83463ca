//! Decision and construction of stationary probability measures.
//!
//! The decision procedure follows the characterization through the α-lis
//! matrix: divergent cascade series rule a measure out, convergent series
//! with a complete α-lis index reduce the problem to the left-fixed
//! vectors of `Q` normalized by `Σ v_{αs} κ_{αs} = 1`, and a truncated
//! (infinite) index yields certified partial data but no verdict.
//!
//! A constructed measure answers arbitrary finite-cylinder queries
//! lazily: `π(L·mirror(w)) = casc(w) · μ(α_w s_w)`, where `μ` on `α`-lis
//! words outside the index is the extension sum
//! `Σ_{c = s_w ⋯} casc(α_w c) · v_{α_c s_c}` over enumerated contexts,
//! with a certified tail budget.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::alis::{
    alis_set_with_records, kappa_table, left_fixed_vector, AlisIndex, FixedVectorOutcome,
    QMatrix,
};
use crate::cascade::{alpha_lis, cascade, KappaConfig, KappaStatus, KappaSum};
use crate::error::MeasureError;
use crate::numeric::KahanSum;
use crate::probabilise::ProbabilisedTree;
use crate::word::Word;

/// Tuning of the decision procedure and measure queries.
#[derive(Debug, Clone)]
pub struct MeasureConfig {
    pub max_len: usize,
    pub tol: f64,
    /// Capacity of the cylinder extension cache.
    pub cache_capacity: usize,
    pub solver_max_iter: usize,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            max_len: 64,
            tol: 1e-12,
            cache_capacity: 1 << 20,
            solver_max_iter: 100_000,
        }
    }
}

impl MeasureConfig {
    fn kappa(&self) -> KappaConfig {
        KappaConfig { max_len: self.max_len, tol: self.tol, ..KappaConfig::default() }
    }
}

/// Outcome of [`decide_and_build`].
#[derive(Debug)]
pub enum Decision {
    /// Exactly one stationary probability measure; here it is.
    Unique(StationaryMeasure),
    /// Certified absence of a stationary probability measure.
    NoMeasure { reason: String, kappas: Vec<KappaSum> },
    /// No verdict from the inspected truncation.
    Undecided {
        reason: String,
        kappas: Vec<KappaSum>,
        /// Certified value of `Σ v_{αs} κ_{αs}` over the truncation and
        /// the accumulated tail bound, when a truncated fixed vector
        /// exists.
        certified_mass: Option<(f64, f64)>,
    },
}

impl Decision {
    pub fn unique(&self) -> Option<&StationaryMeasure> {
        match self {
            Decision::Unique(m) => Some(m),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Decision::Unique(_) => "unique_measure",
            Decision::NoMeasure { .. } => "no_measure",
            Decision::Undecided { .. } => "undecided",
        }
    }
}

/// Decides existence/uniqueness and constructs the measure when unique.
pub fn decide_and_build(
    ptree: &ProbabilisedTree,
    cfg: &MeasureConfig,
) -> Result<Decision, MeasureError> {
    if !ptree.non_null_by_rule() {
        ptree.verify_non_null(cfg.max_len)?;
    }
    let (index, records) = alis_set_with_records(ptree, cfg.max_len)?;
    let kcfg = cfg.kappa();
    let kappas = kappa_table(ptree, &index, &records, &kcfg);

    // Certified divergence: a stationary measure forces
    // κ_{αs} ≤ δ^{-|αs|} where δ is a global lower bound on the q values,
    // so a partial sum beyond that threshold rules the measure out.
    if let Some(delta) = ptree.q_rule().global_min() {
        if delta > 0.0 {
            for k in &kappas {
                let threshold = (1.0 / delta).powi(k.alis.len() as i32);
                if k.partial > threshold {
                    return Ok(Decision::NoMeasure {
                        reason: format!(
                            "cascade series diverge: partial κ for {} is {:.6e}, above the \
                             certified ceiling {:.6e} that any stationary probability measure \
                             would impose",
                            k.alis, k.partial, threshold
                        ),
                        kappas,
                    });
                }
            }
        }
    }
    let diverged: Vec<&KappaSum> = kappas
        .iter()
        .filter(|k| matches!(k.status, KappaStatus::Diverged { .. }))
        .collect();
    if !diverged.is_empty() {
        let names: Vec<String> = diverged.iter().map(|k| k.alis.to_string()).collect();
        return Ok(Decision::Undecided {
            reason: format!(
                "divergence evidence for the cascade series of {{{}}} (evidence, not proof)",
                names.join(", ")
            ),
            kappas,
            certified_mass: None,
        });
    }

    let q = crate::alis::build_q_with(ptree, &kcfg).map_err(MeasureError::Alis)?;

    if !index.complete() {
        // Infinite or unexhausted S: report certified partials only.
        let certified_mass = match left_fixed_vector(&q, cfg.tol, cfg.solver_max_iter) {
            Ok(FixedVectorOutcome::Unique(fv)) => {
                let mut mass = KahanSum::new();
                let mut tail = KahanSum::new();
                for (v, k) in fv.values.iter().zip(q.kappas()) {
                    mass.add(v * k.partial);
                    tail.add(v * k.tail_bound);
                }
                Some((mass.value(), tail.value()))
            }
            _ => None,
        };
        return Ok(Decision::Undecided {
            reason: "α-lis index not provably exhausted at this truncation".into(),
            kappas,
            certified_mass,
        });
    }

    let all_converged =
        kappas.iter().all(|k| matches!(k.status, KappaStatus::Converged { .. }));
    if !all_converged {
        return Ok(Decision::Undecided {
            reason: "some cascade series are only truncated at this max_len".into(),
            kappas,
            certified_mass: None,
        });
    }

    match left_fixed_vector(&q, cfg.tol, cfg.solver_max_iter).map_err(MeasureError::Alis)? {
        FixedVectorOutcome::NoneFound => Ok(Decision::NoMeasure {
            reason: "Q has no left-fixed direction".into(),
            kappas,
        }),
        FixedVectorOutcome::NotUniqueEvidence { nullity } => Ok(Decision::Undecided {
            reason: format!(
                "left-fixed space of Q has numerical dimension {nullity}; every \
                 normalized direction would give a distinct stationary measure"
            ),
            kappas,
            certified_mass: None,
        }),
        FixedVectorOutcome::Unique(fv) => {
            if fv.values.iter().any(|&v| v < -1e-9) {
                return Ok(Decision::Undecided {
                    reason: "fixed direction has negative coordinates".into(),
                    kappas,
                    certified_mass: None,
                });
            }
            let Some(values) = fv.kappa_weighted.clone() else {
                return Ok(Decision::Undecided {
                    reason: "κ-weighted normalization unavailable".into(),
                    kappas,
                    certified_mass: None,
                });
            };
            let mut tail_budget = KahanSum::new();
            for (v, k) in values.iter().zip(q.kappas()) {
                tail_budget.add(v * k.tail_bound);
            }
            Ok(Decision::Unique(StationaryMeasure {
                ptree: ptree.clone(),
                q,
                values,
                unit_values: fv.values,
                residual: fv.residual,
                tail_budget: tail_budget.value(),
                cfg: cfg.clone(),
                cache: Mutex::new(LruCache::new(cfg.cache_capacity)),
            }))
        }
    }
}

/// A constructed stationary measure, exposed through finite cylinders.
/// Single infinite rays carry zero mass and are not queryable.
#[derive(Debug)]
pub struct StationaryMeasure {
    ptree: ProbabilisedTree,
    q: QMatrix,
    /// κ-weighted fixed vector: `values[i] = π(L·mirror(αs_i))`.
    values: Vec<f64>,
    unit_values: Vec<f64>,
    residual: f64,
    /// Certified bound on any extension-sum tail:
    /// `Σ_{βt} v_{βt} · κ-frontier(βt)`.
    tail_budget: f64,
    cfg: MeasureConfig,
    cache: Mutex<LruCache>,
}

impl StationaryMeasure {
    pub fn ptree(&self) -> &ProbabilisedTree {
        &self.ptree
    }

    pub fn index(&self) -> &AlisIndex {
        self.q.index()
    }

    pub fn q_matrix(&self) -> &QMatrix {
        &self.q
    }

    pub fn kappas(&self) -> &[KappaSum] {
        self.q.kappas()
    }

    /// κ-weighted fixed-vector values, aligned with the index.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Unit-sum fixed-vector values, aligned with the index.
    pub fn unit_values(&self) -> &[f64] {
        &self.unit_values
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn tail_budget(&self) -> f64 {
        self.tail_budget
    }

    /// `|Σ v_{αs} κ_{αs} − 1|`, the normalization defect.
    pub fn normalization_defect(&self) -> f64 {
        let mut mass = KahanSum::new();
        for (v, k) in self.values.iter().zip(self.q.kappas()) {
            mass.add(v * k.partial);
        }
        (mass.value() - 1.0).abs()
    }

    /// `π(L·mirror(w))`: the stationary mass of histories whose most
    /// recent letters spell `w` (most recent first). `π(L) = 1`.
    pub fn pi_cylinder(&self, w: &Word) -> Result<f64, MeasureError> {
        if w.is_empty() {
            return Ok(1.0);
        }
        let dec = alpha_lis(self.ptree.tree(), w)?;
        let casc = cascade(&self.ptree, w)?;
        Ok(casc * self.mu_alis(dec.alpha, &dec.lis)?)
    }

    /// `μ(α·s)` for internal `s`: the fixed-vector value when `αs` is an
    /// indexed α-lis, otherwise the extension sum over contexts with
    /// prefix `s`.
    fn mu_alis(&self, alpha: u8, s: &Word) -> Result<f64, MeasureError> {
        let alis = s.prepend(alpha);
        if let Some(i) = self.q.index().position(&alis) {
            return Ok(self.values[i]);
        }
        if let Some(v) = self.cache.lock().unwrap().get(&alis) {
            return Ok(v);
        }
        if self.tail_budget > self.cfg.tol {
            return Err(MeasureError::TailBoundExceedsTol {
                bound: self.tail_budget,
                tol: self.cfg.tol,
                max_len: self.cfg.max_len,
            });
        }
        let mut sum = KahanSum::new();
        for r in self.q.records() {
            if s.is_prefix_of(&r.word) {
                sum.add(r.q[alpha as usize] * r.casc * self.values[r.alis_idx]);
            }
        }
        let value = sum.value();
        self.cache.lock().unwrap().insert_if_absent(alis, value);
        Ok(value)
    }

    /// Exact finite identities on all words up to `depth`:
    /// K1 `μ(w0) + μ(w1) = μ(w)`, K2 `μ(0w) + μ(1w) = μ(w)`, and K3
    /// `μ(αw) = q_{lpref(w)}(α) · μ(w)` for noninternal `w`. Reports the
    /// largest absolute violation of each.
    pub fn consistency_report(&self, depth: usize) -> Result<ConsistencyReport, MeasureError> {
        let mut report = ConsistencyReport { depth, ..ConsistencyReport::default() };
        let mut stack = vec![Word::empty()];
        while let Some(word) = stack.pop() {
            let mu = self.pi_cylinder(&word)?;
            let mu0 = self.pi_cylinder(&word.append(0))?;
            let mu1 = self.pi_cylinder(&word.append(1))?;
            report.track_k1((mu0 + mu1 - mu).abs(), &word);
            let nu0 = self.pi_cylinder(&word.prepend(0))?;
            let nu1 = self.pi_cylinder(&word.prepend(1))?;
            report.track_k2((nu0 + nu1 - mu).abs(), &word);
            if !word.is_empty() && self.ptree.tree().classify(&word).is_noninternal() {
                let c = self.ptree.tree().lpref(&word)?;
                let q = self.ptree.q(&c)?;
                for (alpha, nu) in [(0u8, nu0), (1u8, nu1)] {
                    report.track_k3((nu - q[alpha as usize] * mu).abs(), &word);
                }
            }
            if word.len() < depth {
                stack.push(word.append(0));
                stack.push(word.append(1));
            }
        }
        Ok(report)
    }

    /// Positivity of all cylinders up to `depth` and the context-mass
    /// partial sums `Σ_{|c| ≤ L} π(L·mirror(c))`, which must approach 1:
    /// no stationary mass escapes along infinite branches.
    pub fn positivity_and_ray_mass_check(
        &self,
        depth: usize,
        mass_levels: &[usize],
    ) -> Result<RayMassReport, MeasureError> {
        let mut min_cylinder = f64::INFINITY;
        let mut at = Word::empty();
        let mut stack = vec![Word::empty()];
        while let Some(word) = stack.pop() {
            let mu = self.pi_cylinder(&word)?;
            if mu < min_cylinder {
                min_cylinder = mu;
                at = word.clone();
            }
            if word.len() < depth {
                stack.push(word.append(0));
                stack.push(word.append(1));
            }
        }
        let mut partials = Vec::with_capacity(mass_levels.len());
        for &level in mass_levels {
            let mut mass = KahanSum::new();
            for r in self.q.records() {
                if r.word.len() <= level {
                    mass.add(r.casc * self.values[r.alis_idx]);
                }
            }
            partials.push((level, mass.value()));
        }
        Ok(RayMassReport { min_cylinder, min_at: at, context_mass_partials: partials })
    }
}

#[derive(Debug, Default, Clone)]
pub struct ConsistencyReport {
    pub depth: usize,
    pub k1_max: f64,
    pub k2_max: f64,
    pub k3_max: f64,
    pub k1_worst: Option<Word>,
    pub k2_worst: Option<Word>,
    pub k3_worst: Option<Word>,
}

impl ConsistencyReport {
    fn track_k1(&mut self, v: f64, w: &Word) {
        if v > self.k1_max {
            self.k1_max = v;
            self.k1_worst = Some(w.clone());
        }
    }
    fn track_k2(&mut self, v: f64, w: &Word) {
        if v > self.k2_max {
            self.k2_max = v;
            self.k2_worst = Some(w.clone());
        }
    }
    fn track_k3(&mut self, v: f64, w: &Word) {
        if v > self.k3_max {
            self.k3_max = v;
            self.k3_worst = Some(w.clone());
        }
    }
}

#[derive(Debug, Clone)]
pub struct RayMassReport {
    pub min_cylinder: f64,
    pub min_at: Word,
    pub context_mass_partials: Vec<(usize, f64)>,
}

/// Bounded cache with least-recently-used eviction, amortized: when full,
/// the older half (by access stamp) is dropped. Insertions are
/// insert-if-absent; reads bump the stamp.
#[derive(Debug)]
struct LruCache {
    capacity: usize,
    stamp: u64,
    map: HashMap<Word, (f64, u64)>,
}

impl LruCache {
    fn new(capacity: usize) -> Self {
        LruCache { capacity: capacity.max(2), stamp: 0, map: HashMap::new() }
    }

    fn get(&mut self, key: &Word) -> Option<f64> {
        self.stamp += 1;
        let stamp = self.stamp;
        self.map.get_mut(key).map(|entry| {
            entry.1 = stamp;
            entry.0
        })
    }

    fn insert_if_absent(&mut self, key: Word, value: f64) {
        if self.map.contains_key(&key) {
            return;
        }
        if self.map.len() >= self.capacity {
            let mut stamps: Vec<u64> = self.map.values().map(|&(_, s)| s).collect();
            stamps.sort_unstable();
            let cutoff = stamps[stamps.len() / 2];
            self.map.retain(|_, &mut (_, s)| s > cutoff);
        }
        self.stamp += 1;
        self.map.insert(key, (value, self.stamp));
    }
}
