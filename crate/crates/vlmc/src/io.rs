//! Tree file format.
//!
//! ```json
//! {
//!   "version": 1,
//!   "source": {"kind": "explicit", "contexts": ["00", "010", "011", "1"]},
//!   "q": {"kind": "table", "q1": {"00": 0.3, "010": 0.5, "011": 0.5, "1": 0.6}}
//! }
//! ```
//!
//! or, for a built-in family,
//!
//! ```json
//! {
//!   "version": 1,
//!   "source": {"kind": "family", "name": "brush"},
//!   "q": {"kind": "params", "values": {"q1_1": 0.6, "spine_0": 0.4}}
//! }
//! ```
//!
//! Context strings read left to right. `q` maps each context to
//! `q_c(1)`; `q_c(0)` is the complement. The `q` member may be omitted for
//! families (their default parameters apply). The complete tree takes its
//! depth in `source.params.depth`.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::context_tree::{ContextTree, SourceDescriptor, ValidationNotes};
use crate::error::{FamilyError, TreeError, WordParseError};
use crate::families::{make_family, FamilyName, FamilySpec, QSpec};
use crate::probabilise::{ProbabilisedTree, QDescriptor, QRule};
use crate::word::Word;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Word(#[from] WordParseError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

fn schema(msg: impl Into<String>) -> IoError {
    IoError::Schema(msg.into())
}

/// A loaded, validated probabilised tree plus validation notes.
#[derive(Debug)]
pub struct LoadedTree {
    pub ptree: ProbabilisedTree,
    pub notes: ValidationNotes,
}

/// Parses and validates a tree file.
pub fn load_tree(text: &str) -> Result<LoadedTree, IoError> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value.as_object().ok_or_else(|| schema("top level must be an object"))?;
    match obj.get("version").and_then(Value::as_u64) {
        Some(1) => {}
        other => return Err(schema(format!("unsupported version {:?}", other))),
    }
    let source = obj
        .get("source")
        .and_then(Value::as_object)
        .ok_or_else(|| schema("missing source object"))?;
    let kind = source
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| schema("source.kind must be a string"))?;
    match kind {
        "explicit" => {
            let contexts = source
                .get("contexts")
                .and_then(Value::as_array)
                .ok_or_else(|| schema("explicit source needs a contexts array"))?;
            let mut words = Vec::with_capacity(contexts.len());
            for c in contexts {
                let s = c.as_str().ok_or_else(|| schema("contexts must be strings"))?;
                words.push(Word::from_str(s)?);
            }
            let (tree, notes) = ContextTree::explicit_with_notes(words)?;
            let q = parse_q_rule(
                obj.get("q")
                    .ok_or_else(|| schema("explicit trees require a q member"))?,
            )?;
            Ok(LoadedTree { ptree: ProbabilisedTree::new(tree, q), notes })
        }
        "family" => {
            let name = source
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| schema("family source needs a name"))?;
            let name = FamilyName::parse(name)?;
            let depth = source
                .get("params")
                .and_then(Value::as_object)
                .and_then(|p| p.get("depth"))
                .and_then(Value::as_u64)
                .map(|d| d as usize);
            let qspec = match obj.get("q") {
                None => QSpec::defaults(),
                Some(v) => parse_q_spec(v)?,
            };
            let ptree = make_family(&FamilySpec { name, depth, q: qspec })?;
            Ok(LoadedTree { ptree, notes: ValidationNotes::default() })
        }
        other => Err(schema(format!("unknown source kind {other:?}"))),
    }
}

fn parse_q_spec(value: &Value) -> Result<QSpec, IoError> {
    let obj = value.as_object().ok_or_else(|| schema("q must be an object"))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| schema("q.kind must be a string"))?;
    match kind {
        "uniform" => Ok(QSpec::Uniform { p1: get_f64(obj, "p1")? }),
        "hash_random" => Ok(QSpec::HashRandom {
            seed: obj.get("seed").and_then(Value::as_u64).unwrap_or(0),
            lo: get_f64(obj, "lo")?,
            hi: get_f64(obj, "hi")?,
        }),
        "table" => {
            let table = obj
                .get("q1")
                .and_then(Value::as_object)
                .ok_or_else(|| schema("q.table needs a q1 object"))?;
            let mut map = BTreeMap::new();
            for (k, v) in table {
                let p = v.as_f64().ok_or_else(|| schema("q1 values must be numbers"))?;
                map.insert(Word::from_str(k)?, p);
            }
            Ok(QSpec::Table(map))
        }
        "params" => {
            let values = obj
                .get("values")
                .and_then(Value::as_object)
                .map(|m| {
                    m.iter()
                        .map(|(k, v)| {
                            v.as_f64()
                                .map(|p| (k.clone(), p))
                                .ok_or_else(|| schema("param values must be numbers"))
                        })
                        .collect::<Result<BTreeMap<_, _>, _>>()
                })
                .transpose()?
                .unwrap_or_default();
            Ok(QSpec::Params(values))
        }
        other => Err(schema(format!("unknown q kind {other:?}"))),
    }
}

fn parse_q_rule(value: &Value) -> Result<QRule, IoError> {
    Ok(match parse_q_spec(value)? {
        QSpec::Uniform { p1 } => QRule::uniform(p1),
        QSpec::HashRandom { seed, lo, hi } => QRule::hash_random(seed, lo, hi),
        QSpec::Table(t) => QRule::table(t),
        QSpec::Params(_) => {
            return Err(schema("named q parameters only apply to family sources"))
        }
    })
}

fn get_f64(obj: &Map<String, Value>, key: &str) -> Result<f64, IoError> {
    obj.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| schema(format!("missing number {key:?}")))
}

/// Serializes a probabilised tree back into the file format.
pub fn save_tree(ptree: &ProbabilisedTree) -> String {
    let source = match ptree.tree().descriptor() {
        SourceDescriptor::Explicit { contexts } => json!({
            "kind": "explicit",
            "contexts": contexts,
        }),
        SourceDescriptor::Family { name, params } => json!({
            "kind": "family",
            "name": name,
            "params": params,
        }),
    };
    let q = match ptree.q_rule().descriptor() {
        QDescriptor::Uniform { p1 } => json!({"kind": "uniform", "p1": p1}),
        QDescriptor::Table { q1 } => json!({"kind": "table", "q1": q1}),
        QDescriptor::HashRandom { seed, lo, hi } => {
            json!({"kind": "hash_random", "seed": seed, "lo": lo, "hi": hi})
        }
        QDescriptor::Named { name, params } => {
            json!({"kind": "params", "rule": name, "values": params})
        }
    };
    serde_json::to_string_pretty(&json!({
        "version": 1,
        "source": source,
        "q": q,
    }))
    .expect("serializable")
}
