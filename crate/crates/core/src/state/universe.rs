//! Finite state universes, loaded from flat JSON (`.opu`).
//!
//! ```json
//! {
//!   "a": {"type": "array", "length": 3, "elem": {"type": "int", "lo": 0, "hi": 2}},
//!   "i": {"type": "int", "lo": 0, "hi": 2, "init": 0},
//!   "T": {"type": "ref", "record": "Node", "depth": 0},
//!   "fields": {"Node": {"key": {"type": "int", "lo": 1, "hi": 3}}},
//!   "heapBudget": 8,
//!   "enumerationCap": 100000
//! }
//! ```

use std::collections::BTreeMap;

use serde_json::Value as Json;
use sha2::{Digest, Sha256};

use super::value::{ElemDom, Value};
use super::StateError;
use crate::syntax::{Program, Type};

pub const DEFAULT_HEAP_BUDGET: usize = 16;
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    Int {
        lo: i64,
        hi: i64,
        init: Option<i64>,
    },
    Bool {
        init: Option<bool>,
    },
    Set {
        lo: i64,
        hi: i64,
        init: Option<Vec<i64>>,
    },
    Array {
        length: usize,
        elem: Box<Domain>,
    },
    /// Nil or a tree of fresh records, longest root path in `min_depth..=depth`.
    Ref {
        record: String,
        depth: usize,
        min_depth: usize,
    },
}

impl Domain {
    pub fn ty(&self) -> Type {
        match self {
            Domain::Int { .. } => Type::Int,
            Domain::Bool { .. } => Type::Bool,
            Domain::Set { .. } => Type::Set,
            Domain::Array { elem, .. } => Type::Array(Box::new(elem.ty())),
            Domain::Ref { record, .. } => Type::Ref(record.clone()),
        }
    }

    /// Whether a scalar value may be stored in a variable of this domain.
    /// References are unconstrained once execution starts.
    pub fn admits(&self, v: &Value) -> bool {
        match (self, v) {
            (Domain::Int { lo, hi, .. }, Value::Int(n)) => lo <= n && n <= hi,
            (Domain::Bool { .. }, Value::Bool(_)) => true,
            (Domain::Set { lo, hi, .. }, Value::Set(s)) => s.iter().all(|x| lo <= x && x <= hi),
            (Domain::Array { .. } | Domain::Ref { .. }, Value::Ref(_)) => true,
            _ => false,
        }
    }

    pub fn elem_dom(&self) -> ElemDom {
        match self {
            Domain::Int { lo, hi, .. } => ElemDom::Int(*lo, *hi),
            Domain::Set { lo, hi, .. } => ElemDom::Set(*lo, *hi),
            _ => ElemDom::Free,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    pub vars: BTreeMap<String, Domain>,
    /// Domains of record fields, used for initial trees and for writes.
    pub fields: BTreeMap<String, BTreeMap<String, Domain>>,
    pub heap_budget: usize,
    pub enumeration_cap: u64,
    /// Record declarations, taken from the program that uses the universe.
    pub records: Vec<crate::syntax::RecordDecl>,
    pub source_hash: String,
}

fn get_i64(obj: &serde_json::Map<String, Json>, key: &str, ctx: &str) -> Result<i64, StateError> {
    obj.get(key)
        .and_then(Json::as_i64)
        .ok_or_else(|| StateError::Universe(format!("`{}`: missing integer `{}`", ctx, key)))
}

fn parse_domain(name: &str, j: &Json) -> Result<Domain, StateError> {
    let obj = j
        .as_object()
        .ok_or_else(|| StateError::Universe(format!("`{}`: domain must be an object", name)))?;
    let ty = obj
        .get("type")
        .and_then(Json::as_str)
        .ok_or_else(|| StateError::Universe(format!("`{}`: missing `type`", name)))?;
    let d = match ty {
        "int" => {
            let (lo, hi) = (get_i64(obj, "lo", name)?, get_i64(obj, "hi", name)?);
            let init = match obj.get("init") {
                None => None,
                Some(v) => Some(
                    v.as_i64()
                        .ok_or_else(|| StateError::Universe(format!("`{}`: `init` must be an integer", name)))?,
                ),
            };
            Domain::Int { lo, hi, init }
        }
        "bool" => Domain::Bool {
            init: match obj.get("init") {
                None => None,
                Some(v) => Some(
                    v.as_bool()
                        .ok_or_else(|| StateError::Universe(format!("`{}`: `init` must be a boolean", name)))?,
                ),
            },
        },
        "set" => {
            let (lo, hi) = (get_i64(obj, "lo", name)?, get_i64(obj, "hi", name)?);
            let init = match obj.get("init") {
                None => None,
                Some(v) => Some(
                    v.as_array()
                        .and_then(|a| a.iter().map(Json::as_i64).collect::<Option<Vec<_>>>())
                        .ok_or_else(|| StateError::Universe(format!("`{}`: `init` must be an integer list", name)))?,
                ),
            };
            if hi - lo >= 20 {
                return Err(StateError::Universe(format!(
                    "`{}`: set universe wider than 20 elements",
                    name
                )));
            }
            Domain::Set { lo, hi, init }
        }
        "array" => {
            let length = get_i64(obj, "length", name)?;
            if length < 0 {
                return Err(StateError::Universe(format!("`{}`: negative length", name)));
            }
            let elem = parse_domain(name, obj.get("elem").unwrap_or(&Json::Null))?;
            if matches!(elem, Domain::Array { .. }) {
                return Err(StateError::Universe(format!(
                    "`{}`: nested arrays are not supported",
                    name
                )));
            }
            Domain::Array {
                length: length as usize,
                elem: Box::new(elem),
            }
        }
        "ref" => {
            let record = obj
                .get("record")
                .and_then(Json::as_str)
                .ok_or_else(|| StateError::Universe(format!("`{}`: missing `record`", name)))?
                .to_string();
            let depth = obj.get("depth").and_then(Json::as_u64).unwrap_or(0) as usize;
            let min_depth = obj.get("minDepth").and_then(Json::as_u64).unwrap_or(0) as usize;
            if min_depth > depth {
                return Err(StateError::Universe(format!("`{}`: minDepth exceeds depth", name)));
            }
            Domain::Ref {
                record,
                depth,
                min_depth,
            }
        }
        other => return Err(StateError::Universe(format!("`{}`: unknown type `{}`", name, other))),
    };
    match &d {
        Domain::Int { lo, hi, .. } | Domain::Set { lo, hi, .. } if lo > hi => {
            Err(StateError::Universe(format!("`{}`: empty range {}..{}", name, lo, hi)))
        }
        Domain::Int { lo, hi, init: Some(v) } if v < lo || v > hi => Err(StateError::Universe(format!(
            "`{}`: init {} outside {}..{}",
            name, v, lo, hi
        ))),
        Domain::Set { lo, hi, init: Some(vs) } if vs.iter().any(|v| v < lo || v > hi) => Err(StateError::Universe(
            format!("`{}`: init element outside {}..{}", name, lo, hi),
        )),
        _ => Ok(d),
    }
}

impl Universe {
    /// Parses `.opu` text. Record declarations are attached later with
    /// [`Universe::bind`].
    pub fn parse(text: &str) -> Result<Universe, StateError> {
        let j: Json = serde_json::from_str(text).map_err(|e| StateError::Universe(format!("invalid JSON: {}", e)))?;
        let obj = j
            .as_object()
            .ok_or_else(|| StateError::Universe("universe must be a JSON object".into()))?;
        let mut u = Universe {
            vars: BTreeMap::new(),
            fields: BTreeMap::new(),
            heap_budget: DEFAULT_HEAP_BUDGET,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            records: Vec::new(),
            source_hash: hex::encode(Sha256::digest(text.as_bytes())),
        };
        for (k, v) in obj {
            match k.as_str() {
                "heapBudget" => {
                    u.heap_budget = v
                        .as_u64()
                        .ok_or_else(|| StateError::Universe("`heapBudget` must be a non-negative integer".into()))?
                        as usize
                }
                "enumerationCap" => {
                    u.enumeration_cap = v
                        .as_u64()
                        .ok_or_else(|| StateError::Universe("`enumerationCap` must be a non-negative integer".into()))?
                }
                "fields" => {
                    let recs = v
                        .as_object()
                        .ok_or_else(|| StateError::Universe("`fields` must be an object".into()))?;
                    for (r, fs) in recs {
                        let fs = fs
                            .as_object()
                            .ok_or_else(|| StateError::Universe(format!("`fields.{}` must be an object", r)))?;
                        let mut m = BTreeMap::new();
                        for (f, d) in fs {
                            let dom = parse_domain(&format!("{}.{}", r, f), d)?;
                            if !matches!(dom, Domain::Int { .. } | Domain::Bool { .. } | Domain::Set { .. }) {
                                return Err(StateError::Universe(format!(
                                    "`{}.{}`: field domains must be int, bool or set",
                                    r, f
                                )));
                            }
                            m.insert(f.clone(), dom);
                        }
                        u.fields.insert(r.clone(), m);
                    }
                }
                name => {
                    u.vars.insert(name.to_string(), parse_domain(name, v)?);
                }
            }
        }
        Ok(u)
    }

    /// Builds a universe directly from domains, mainly for tests.
    pub fn from_vars(vars: impl IntoIterator<Item = (String, Domain)>) -> Universe {
        let vars: BTreeMap<String, Domain> = vars.into_iter().collect();
        Universe {
            source_hash: hex::encode(Sha256::digest(format!("{:?}", vars).as_bytes())),
            vars,
            fields: BTreeMap::new(),
            heap_budget: DEFAULT_HEAP_BUDGET,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            records: Vec::new(),
        }
    }

    /// Shorthand: integer variables with inclusive ranges.
    pub fn ints(ranges: &[(&str, i64, i64)]) -> Universe {
        Universe::from_vars(ranges.iter().map(|(n, lo, hi)| {
            (
                n.to_string(),
                Domain::Int {
                    lo: *lo,
                    hi: *hi,
                    init: None,
                },
            )
        }))
    }

    /// Attaches the record declarations of `prog` and checks that every
    /// referenced record and field exists.
    pub fn bind(mut self, prog: &Program) -> Result<Universe, StateError> {
        self.records = prog.records.clone();
        let check_record = |r: &str| {
            if prog.record(r).is_none() {
                Err(StateError::Universe(format!("unknown record type `{}`", r)))
            } else {
                Ok(())
            }
        };
        for d in self.vars.values() {
            match d {
                Domain::Ref { record, .. } => check_record(record)?,
                Domain::Array { elem, .. } => {
                    if let Domain::Ref { record, .. } = &**elem {
                        check_record(record)?
                    }
                }
                _ => {}
            }
        }
        for (r, fs) in &self.fields {
            let decl = prog
                .record(r)
                .ok_or_else(|| StateError::Universe(format!("`fields`: unknown record `{}`", r)))?;
            for (f, d) in fs {
                let (_, t) = decl
                    .fields
                    .iter()
                    .find(|(n, _)| n == f)
                    .ok_or_else(|| StateError::Universe(format!("`fields`: `{}` has no field `{}`", r, f)))?;
                if *t != d.ty() {
                    return Err(StateError::Universe(format!(
                        "`fields`: `{}.{}` declared as {}",
                        r, f, t
                    )));
                }
            }
        }
        Ok(self)
    }

    pub fn type_env(&self) -> BTreeMap<String, Type> {
        self.vars.iter().map(|(k, d)| (k.clone(), d.ty())).collect()
    }

    pub fn field_domain(&self, record: &str, field: &str) -> Option<&Domain> {
        self.fields.get(record).and_then(|m| m.get(field))
    }

    pub fn record(&self, name: &str) -> Option<&crate::syntax::RecordDecl> {
        self.records.iter().find(|r| r.name == name)
    }

    /// Hash of the universe source together with the bound record declarations.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.source_hash.as_bytes());
        for r in &self.records {
            h.update(crate::syntax::pretty::record(r).as_bytes());
        }
        hex::encode(h.finalize())
    }
}
