//! Canonical forms agree with a brute-force isomorphism search over small
//! heaps.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::rng;
use itertools::Itertools;
use optri::state::{canonicalize, HeapObj, Loc, State, Value};
use rand::seq::SliceRandom;
use rand::Rng;

const ROOTS: [&str; 2] = ["p", "q"];

fn random_ref(r: &mut impl Rng, n: u32) -> Value {
    if n == 0 || r.gen_bool(0.3) {
        Value::Ref(None)
    } else {
        Value::Ref(Some(r.gen_range(0..n)))
    }
}

fn random_state(r: &mut impl Rng) -> State {
    let n = r.gen_range(0..=5u32);
    let mut heap = BTreeMap::new();
    for l in 0..n {
        let (ty, fields) = if r.gen_bool(0.7) {
            (
                "Node",
                vec![Value::Int(r.gen_range(0..2)), random_ref(r, n), random_ref(r, n)],
            )
        } else {
            ("Leaf", vec![Value::Int(r.gen_range(0..2))])
        };
        heap.insert(l, HeapObj::Record { ty: ty.into(), fields });
    }
    let mut store: BTreeMap<String, Value> = ROOTS.iter().map(|x| (x.to_string(), random_ref(r, n))).collect();
    store.insert("k".into(), Value::Int(r.gen_range(0..2)));
    State { store, heap, alloc: n }
}

fn rename(v: &Value, m: &BTreeMap<Loc, Loc>) -> Value {
    match v {
        Value::Ref(Some(l)) => Value::Ref(Some(m[l])),
        other => other.clone(),
    }
}

fn apply(s: &State, m: &BTreeMap<Loc, Loc>) -> State {
    let heap = s
        .heap
        .iter()
        .map(|(l, o)| {
            let HeapObj::Record { ty, fields } = o else {
                unreachable!()
            };
            let fields = fields.iter().map(|v| rename(v, m)).collect();
            (m[l], HeapObj::Record { ty: ty.clone(), fields })
        })
        .collect();
    State {
        store: s.store.iter().map(|(k, v)| (k.clone(), rename(v, m))).collect(),
        heap,
        alloc: s.alloc,
    }
}

/// The same state with locations shuffled over a wider range.
fn relabel(r: &mut impl Rng, s: &State) -> State {
    let mut targets: Vec<Loc> = (0..10).collect();
    targets.shuffle(r);
    let m = s.heap.keys().copied().zip(targets).collect();
    apply(s, &m)
}

/// Changes one field or root at random.
fn mutate(r: &mut impl Rng, s: &State) -> State {
    let mut t = s.clone();
    let locs: Vec<Loc> = t.heap.keys().copied().collect();
    let pick_ref = |r: &mut dyn rand::RngCore| -> Value {
        if locs.is_empty() || r.gen_bool(0.3) {
            Value::Ref(None)
        } else {
            Value::Ref(Some(*locs.choose(r).unwrap()))
        }
    };
    if locs.is_empty() || r.gen_bool(0.3) {
        let x = *ROOTS.choose(r).unwrap();
        t.store.insert(x.into(), pick_ref(r));
    } else {
        let l = *locs.choose(r).unwrap();
        let Some(HeapObj::Record { fields, .. }) = t.heap.get_mut(&l) else {
            unreachable!()
        };
        let i = r.gen_range(0..fields.len());
        fields[i] = match fields[i] {
            Value::Int(v) => Value::Int(1 - v),
            _ => pick_ref(r),
        };
    }
    t
}

fn reachable(s: &State) -> BTreeSet<Loc> {
    let mut seen = BTreeSet::new();
    let mut todo: Vec<Loc> = s.store.values().filter_map(|v| v.as_ref().flatten()).collect();
    while let Some(l) = todo.pop() {
        if seen.insert(l) {
            todo.extend(s.heap[&l].refs());
        }
    }
    seen
}

fn garbage_free(s: &State) -> State {
    let keep = reachable(s);
    State {
        store: s.store.clone(),
        heap: s
            .heap
            .iter()
            .filter(|(l, _)| keep.contains(l))
            .map(|(l, o)| (*l, o.clone()))
            .collect(),
        alloc: s.alloc,
    }
}

/// Tries every bijection between the reachable parts of `a` and `b`.
fn isomorphic(a: &State, b: &State) -> bool {
    let (a, b) = (garbage_free(a), garbage_free(b));
    let la: Vec<Loc> = a.heap.keys().copied().collect();
    let lb: Vec<Loc> = b.heap.keys().copied().collect();
    if la.len() != lb.len() {
        return false;
    }
    lb.iter().copied().permutations(lb.len()).any(|perm| {
        let m: BTreeMap<Loc, Loc> = la.iter().copied().zip(perm).collect();
        apply(&a, &m) == b
    })
}

#[test]
fn canonical_forms_coincide_exactly_for_isomorphic_heaps() {
    let mut r = rng(21);
    let mut kinds = [0usize; 2];
    for i in 0..1500 {
        let a = random_state(&mut r);
        let b = match r.gen_range(0..3) {
            0 => relabel(&mut r, &a),
            1 => {
                let m = mutate(&mut r, &a);
                relabel(&mut r, &m)
            }
            _ => random_state(&mut r),
        };
        let iso = isomorphic(&a, &b);
        let same = canonicalize(&a) == canonicalize(&b);
        assert_eq!(iso, same, "pair {}: {:?} vs {:?}", i, a, b);
        kinds[iso as usize] += 1;
    }
    assert!(kinds.iter().all(|n| *n >= 300), "pair mix too skewed: {:?}", kinds);
}

#[test]
fn canonicalization_is_idempotent() {
    let mut r = rng(22);
    for _ in 0..500 {
        let a = canonicalize(&random_state(&mut r));
        assert_eq!(canonicalize(&a), a);
        assert!(a.heap.keys().copied().eq(0..a.heap.len() as Loc));
    }
}
