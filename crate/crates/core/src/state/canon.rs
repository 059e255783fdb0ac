//! Canonical form of states: unreachable heap objects are dropped and the
//! reachable ones renumbered `0..` in depth-first preorder from the roots.

use std::collections::BTreeMap;

use super::value::{HeapObj, Loc, State, Value};

fn remap(v: &Value, map: &BTreeMap<Loc, Loc>) -> Value {
    match v {
        Value::Ref(Some(l)) => Value::Ref(map.get(l).copied()),
        other => other.clone(),
    }
}

/// Canonicalizes with roots visited in store (name) order.
pub fn canonicalize(s: &State) -> State {
    let order: Vec<&str> = s.store.keys().map(String::as_str).collect();
    canonicalize_with(s, &order)
}

/// Canonicalizes with roots visited in `root_order`; store variables not
/// listed there follow in name order.
pub fn canonicalize_with(s: &State, root_order: &[&str]) -> State {
    if s.heap.is_empty() {
        return State {
            store: s.store.clone(),
            heap: BTreeMap::new(),
            alloc: 0,
        };
    }
    let mut roots: Vec<&Value> = root_order.iter().filter_map(|r| s.store.get(*r)).collect();
    roots.extend(
        s.store
            .iter()
            .filter(|(k, _)| !root_order.contains(&k.as_str()))
            .map(|(_, v)| v),
    );

    let mut map: BTreeMap<Loc, Loc> = BTreeMap::new();
    let mut stack: Vec<Loc> = Vec::new();
    for r in roots {
        let Value::Ref(Some(l)) = r else { continue };
        stack.push(*l);
        while let Some(l) = stack.pop() {
            if map.contains_key(&l) {
                continue;
            }
            let Some(obj) = s.heap.get(&l) else { continue };
            let id = map.len() as Loc;
            map.insert(l, id);
            let children: Vec<Loc> = obj.refs().collect();
            stack.extend(children.into_iter().rev());
        }
    }

    let mut heap = BTreeMap::new();
    for (old, new) in &map {
        let obj = &s.heap[old];
        let renamed = match obj {
            HeapObj::Record { ty, fields } => HeapObj::Record {
                ty: ty.clone(),
                fields: fields.iter().map(|v| remap(v, &map)).collect(),
            },
            HeapObj::Array { elems, dom } => HeapObj::Array {
                elems: elems.iter().map(|v| remap(v, &map)).collect(),
                dom: *dom,
            },
        };
        heap.insert(*new, renamed);
    }
    State {
        store: s.store.iter().map(|(k, v)| (k.clone(), remap(v, &map))).collect(),
        alloc: heap.len() as Loc,
        heap,
    }
}
