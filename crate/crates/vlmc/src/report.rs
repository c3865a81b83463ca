//! Machine-readable reports.
//!
//! Reports are JSON with `"report_version": 1`. Floating-point values are
//! rendered with 17 significant digits so identical runs produce
//! byte-identical reports.

use crate::alis::QMatrix;
use crate::cascade::{KappaStatus, KappaSum};
use crate::context_tree::{SourceDescriptor, StabilityVerdict};
use crate::stationary::{ConsistencyReport, Decision};

/// 17 significant digits, exponent form: enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else {
        // JSON has no literal for these; be explicit rather than silent.
        format!("\"{x}\"")
    }
}

/// Minimal ordered JSON builder. Keys appear in insertion order, floats go
/// through [`fmt_f64`].
#[derive(Debug, Default)]
pub struct JsonObject {
    fields: Vec<(String, String)>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn raw(mut self, key: &str, rendered: impl Into<String>) -> Self {
        self.fields.push((key.to_string(), rendered.into()));
        self
    }

    pub fn str(self, key: &str, value: &str) -> Self {
        self.raw(key, format!("{}", serde_json::Value::String(value.to_string())))
    }

    pub fn int(self, key: &str, value: u64) -> Self {
        self.raw(key, value.to_string())
    }

    pub fn float(self, key: &str, value: f64) -> Self {
        self.raw(key, fmt_f64(value))
    }

    pub fn bool(self, key: &str, value: bool) -> Self {
        self.raw(key, value.to_string())
    }

    pub fn finish(self) -> String {
        let mut out = String::from("{");
        for (i, (k, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}:{}", serde_json::Value::String(k.clone()), v));
        }
        out.push('}');
        out
    }
}

pub fn json_array(items: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from("[");
    for (i, item) in items.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&item);
    }
    out.push(']');
    out
}

fn json_str(s: &str) -> String {
    serde_json::Value::String(s.to_string()).to_string()
}

fn source_json(source: &SourceDescriptor) -> String {
    match source {
        SourceDescriptor::Explicit { contexts } => JsonObject::new()
            .str("kind", "explicit")
            .raw("contexts", json_array(contexts.iter().map(|c| json_str(c))))
            .finish(),
        SourceDescriptor::Family { name, params } => JsonObject::new()
            .str("kind", "family")
            .str("name", name)
            .raw("params", params.to_string())
            .finish(),
    }
}

fn kappa_json(kappas: &[KappaSum]) -> String {
    json_array(kappas.iter().map(|k| {
        let status = match &k.status {
            KappaStatus::Converged { tol } => JsonObject::new()
                .str("kind", "converged")
                .float("tol", *tol)
                .finish(),
            KappaStatus::Diverged { evidence } => JsonObject::new()
                .str("kind", "diverged")
                .str("evidence", evidence)
                .finish(),
            KappaStatus::Truncated => JsonObject::new().str("kind", "truncated").finish(),
        };
        JsonObject::new()
            .str("alis", &k.alis.to_string())
            .float("partial", k.partial)
            .float("tail_bound", k.tail_bound)
            .raw("status", status)
            .finish()
    }))
}

fn stability_json(verdict: &StabilityVerdict) -> String {
    match verdict {
        StabilityVerdict::Stable => JsonObject::new().str("verdict", "stable").finish(),
        StabilityVerdict::Unstable { alpha, context } => JsonObject::new()
            .str("verdict", "unstable")
            .str("witness_alpha", &alpha.to_string())
            .str("witness_context", &context.to_string())
            .finish(),
        StabilityVerdict::Inconclusive => {
            JsonObject::new().str("verdict", "inconclusive").finish()
        }
    }
}

/// The `analyze` report: α-lis set, κ table, Q with tail bounds, stability.
pub fn analyze_report(
    source: &SourceDescriptor,
    stability: &StabilityVerdict,
    q: &QMatrix,
    max_len: usize,
    tol: f64,
) -> String {
    let rows = json_array(
        q.rows()
            .iter()
            .map(|row| json_array(row.iter().map(|&x| fmt_f64(x)))),
    );
    let row_sums = json_array((0..q.dim()).map(|i| fmt_f64(q.row_sum(i))));
    let row_tails = json_array((0..q.dim()).map(|i| fmt_f64(q.row_tail(i))));
    JsonObject::new()
        .int("report_version", 1)
        .str("command", "analyze")
        .raw("source", source_json(source))
        .int("max_len", max_len as u64)
        .float("tol", tol)
        .raw("stability", stability_json(stability))
        .raw(
            "alis",
            json_array(q.index().entries().iter().map(|a| json_str(&a.to_string()))),
        )
        .bool("alis_index_complete", q.index().complete())
        .raw("kappa", kappa_json(q.kappas()))
        .raw(
            "q",
            JsonObject::new()
                .int("dim", q.dim() as u64)
                .raw("rows", rows)
                .raw("row_sums", row_sums)
                .raw("row_tails", row_tails)
                .finish(),
        )
        .finish()
}

/// The `stationary` report: decision, fixed vector, κ table, residual,
/// consistency checks.
pub fn stationary_report(
    source: &SourceDescriptor,
    decision: &Decision,
    checks: Option<&ConsistencyReport>,
    max_len: usize,
    tol: f64,
) -> String {
    let mut obj = JsonObject::new()
        .int("report_version", 1)
        .str("command", "stationary")
        .raw("source", source_json(source))
        .int("max_len", max_len as u64)
        .float("tol", tol)
        .str("decision", decision.label());
    match decision {
        Decision::Unique(m) => {
            let v = json_array(m.index().entries().iter().zip(m.values()).map(|(a, &x)| {
                JsonObject::new()
                    .str("alis", &a.to_string())
                    .float("value", x)
                    .finish()
            }));
            obj = obj
                .raw("v", v)
                .raw("kappa", kappa_json(m.kappas()))
                .float("residual", m.residual())
                .float("normalization_defect", m.normalization_defect())
                .float("extension_tail_budget", m.tail_budget());
        }
        Decision::NoMeasure { reason, kappas } => {
            obj = obj.str("reason", reason).raw("kappa", kappa_json(kappas));
        }
        Decision::Undecided { reason, kappas, certified_mass } => {
            obj = obj.str("reason", reason).raw("kappa", kappa_json(kappas));
            if let Some((mass, tail)) = certified_mass {
                obj = obj.raw(
                    "certified_mass",
                    JsonObject::new()
                        .float("partial", *mass)
                        .float("tail_bound", *tail)
                        .finish(),
                );
            }
        }
    }
    if let Some(c) = checks {
        obj = obj.raw(
            "checks",
            JsonObject::new()
                .int("depth", c.depth as u64)
                .float("K1", c.k1_max)
                .float("K2", c.k2_max)
                .float("K3", c.k3_max)
                .finish(),
        );
    }
    obj.finish()
}
