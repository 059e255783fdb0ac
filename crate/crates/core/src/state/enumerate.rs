//! Exhaustive enumeration of the initial states of a universe.
//!
//! Order: variables sorted by name, the first one varying slowest. Within a
//! domain: integers ascending; `false` before `true`; sets by binary counting
//! over the element range (bit `i` stands for `lo + i`); arrays
//! lexicographically with element 0 slowest; references nil first, then
//! record trees with fields varied in declaration order, the first slowest.
//! States whose trees together exceed the heap budget are skipped.

use std::collections::BTreeSet;

use super::universe::{Domain, Universe};
use super::value::{ElemDom, HeapObj, State, Value};
use super::StateError;
use crate::syntax::Type;

#[derive(Debug, Clone)]
enum Gen {
    Scalar(Value),
    Array(Vec<Gen>, ElemDom),
    Tree(Option<Box<Node>>),
}

#[derive(Debug, Clone)]
struct Node {
    record: String,
    fields: Vec<Gen>,
}

impl Gen {
    fn records(&self) -> usize {
        match self {
            Gen::Scalar(_) | Gen::Tree(None) => 0,
            Gen::Array(es, _) => es.iter().map(Gen::records).sum(),
            Gen::Tree(Some(n)) => 1 + n.fields.iter().map(Gen::records).sum::<usize>(),
        }
    }

    fn depth(&self) -> usize {
        match self {
            Gen::Tree(Some(n)) => 1 + n.fields.iter().map(Gen::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    fn materialize(&self, s: &mut State) -> Value {
        match self {
            Gen::Scalar(v) => v.clone(),
            Gen::Tree(None) => Value::Ref(None),
            Gen::Array(es, dom) => {
                let l = s.alloc_obj(HeapObj::Array {
                    elems: vec![],
                    dom: *dom,
                });
                let vals: Vec<Value> = es.iter().map(|e| e.materialize(s)).collect();
                *s.heap.get_mut(&l).expect("fresh").slots_mut() = vals;
                Value::Ref(Some(l))
            }
            Gen::Tree(Some(n)) => {
                let l = s.alloc_obj(HeapObj::Record {
                    ty: n.record.clone(),
                    fields: vec![],
                });
                let vals: Vec<Value> = n.fields.iter().map(|f| f.materialize(s)).collect();
                *s.heap.get_mut(&l).expect("fresh").slots_mut() = vals;
                Value::Ref(Some(l))
            }
        }
    }
}

fn sat_mul(a: u128, b: u128) -> u128 {
    a.saturating_mul(b)
}

fn sat_pow(a: u128, n: usize) -> u128 {
    (0..n).fold(1u128, |acc, _| sat_mul(acc, a))
}

/// Values an uninitialised scalar field takes inside enumerated trees.
fn field_scalars(u: &Universe, record: &str, field: &str, ty: &Type) -> Vec<Value> {
    match u.field_domain(record, field) {
        Some(d) => scalar_values(d),
        None => vec![default_value(ty)],
    }
}

pub fn default_value(ty: &Type) -> Value {
    match ty {
        Type::Int => Value::Int(0),
        Type::Bool => Value::Bool(false),
        Type::Set => Value::Set(BTreeSet::new()),
        _ => Value::Ref(None),
    }
}

fn scalar_values(d: &Domain) -> Vec<Value> {
    match d {
        Domain::Int { init: Some(v), .. } => vec![Value::Int(*v)],
        Domain::Int { lo, hi, .. } => (*lo..=*hi).map(Value::Int).collect(),
        Domain::Bool { init: Some(b) } => vec![Value::Bool(*b)],
        Domain::Bool { init: None } => vec![Value::Bool(false), Value::Bool(true)],
        Domain::Set { init: Some(vs), .. } => vec![Value::Set(vs.iter().copied().collect())],
        Domain::Set { lo, hi, .. } => {
            let w = (hi - lo + 1) as u32;
            (0u64..(1u64 << w))
                .map(|mask| Value::Set((0..w).filter(|i| mask >> i & 1 == 1).map(|i| lo + i as i64).collect()))
                .collect()
        }
        _ => vec![],
    }
}

fn tree_count(u: &Universe, record: &str, depth: usize) -> u128 {
    if depth == 0 {
        return 1;
    }
    let Some(decl) = u.record(record) else {
        return 1;
    };
    let mut prod = 1u128;
    for (f, t) in &decl.fields {
        let c = match t {
            Type::Ref(q) => tree_count(u, q, depth - 1),
            _ => field_scalars(u, record, f, t).len() as u128,
        };
        prod = sat_mul(prod, c);
    }
    prod.saturating_add(1)
}

fn domain_count(u: &Universe, d: &Domain) -> u128 {
    match d {
        Domain::Array { length, elem } => sat_pow(domain_count(u, elem), *length),
        Domain::Ref {
            record,
            depth,
            min_depth,
        } => {
            let all = tree_count(u, record, *depth);
            if *min_depth == 0 {
                all
            } else {
                all - tree_count(u, record, min_depth - 1)
            }
        }
        Domain::Set { lo, hi, init: None } => 1u128 << (hi - lo + 1),
        other => scalar_values(other).len() as u128,
    }
}

/// Upper bound on the number of initial states (before heap-budget filtering).
pub fn universe_size(u: &Universe) -> u128 {
    u.vars.values().fold(1u128, |acc, d| sat_mul(acc, domain_count(u, d)))
}

fn trees(u: &Universe, record: &str, depth: usize) -> Vec<Gen> {
    let mut out = vec![Gen::Tree(None)];
    if depth == 0 {
        return out;
    }
    let Some(decl) = u.record(record) else {
        return out;
    };
    let options: Vec<Vec<Gen>> = decl
        .fields
        .iter()
        .map(|(f, t)| match t {
            Type::Ref(q) => trees(u, q, depth - 1),
            _ => field_scalars(u, record, f, t).into_iter().map(Gen::Scalar).collect(),
        })
        .collect();
    for combo in product(&options) {
        out.push(Gen::Tree(Some(Box::new(Node {
            record: record.to_string(),
            fields: combo,
        }))));
    }
    out
}

/// Cartesian product, first list varying slowest.
fn product(options: &[Vec<Gen>]) -> Vec<Vec<Gen>> {
    let mut out = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for o in opts {
                let mut v = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn domain_gens(u: &Universe, d: &Domain) -> Vec<Gen> {
    match d {
        Domain::Array { length, elem } => {
            let elems = domain_gens(u, elem);
            let dom = elem.elem_dom();
            product(&vec![elems; *length])
                .into_iter()
                .map(|es| Gen::Array(es, dom))
                .collect()
        }
        Domain::Ref {
            record,
            depth,
            min_depth,
        } => trees(u, record, *depth)
            .into_iter()
            .filter(|g| g.depth() >= *min_depth)
            .collect(),
        other => scalar_values(other).into_iter().map(Gen::Scalar).collect(),
    }
}

/// All initial states of `u` in the documented order.
pub fn enumerate_states(u: &Universe) -> Result<Vec<State>, StateError> {
    let size = universe_size(u);
    if size > u.enumeration_cap as u128 {
        return Err(StateError::UniverseTooLarge {
            actual: size,
            cap: u.enumeration_cap,
        });
    }
    let names: Vec<&String> = u.vars.keys().collect();
    let gens: Vec<Vec<Gen>> = u.vars.values().map(|d| domain_gens(u, d)).collect();
    if gens.iter().any(Vec::is_empty) {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; gens.len()];
    loop {
        let records: usize = idx.iter().zip(&gens).map(|(&i, g)| g[i].records()).sum();
        if records <= u.heap_budget {
            let mut s = State::default();
            for (k, (&i, g)) in idx.iter().zip(&gens).enumerate() {
                let v = g[i].materialize(&mut s);
                s.store.insert(names[k].clone(), v);
            }
            out.push(s);
        }
        // Odometer increment, last variable fastest.
        let mut k = gens.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < gens[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}
