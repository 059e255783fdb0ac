use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde_json::json;

pub type Loc = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
    /// Reference to a record or an array; `None` is nil.
    Ref(Option<Loc>),
    Set(BTreeSet<i64>),
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&BTreeSet<i64>> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_ref(&self) -> Option<Option<Loc>> {
        match self {
            Value::Ref(r) => Some(*r),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{}", n),
            Value::Bool(true) => write!(f, "tt"),
            Value::Bool(false) => write!(f, "ff"),
            Value::Ref(None) => write!(f, "nil"),
            Value::Ref(Some(l)) => write!(f, "#{}", l),
            Value::Set(s) => {
                write!(f, "{{")?;
                for (i, x) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", x)?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Bounds applied when writing into an array element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElemDom {
    Int(i64, i64),
    Set(i64, i64),
    Free,
}

impl ElemDom {
    pub fn admits(&self, v: &Value) -> bool {
        match (self, v) {
            (ElemDom::Int(lo, hi), Value::Int(n)) => lo <= n && n <= hi,
            (ElemDom::Set(lo, hi), Value::Set(s)) => s.iter().all(|x| lo <= x && x <= hi),
            (ElemDom::Free, _) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeapObj {
    /// Field values in declaration order.
    Record {
        ty: String,
        fields: Vec<Value>,
    },
    Array {
        elems: Vec<Value>,
        dom: ElemDom,
    },
}

impl HeapObj {
    pub fn refs(&self) -> impl Iterator<Item = Loc> + '_ {
        let vals = match self {
            HeapObj::Record { fields, .. } => fields.as_slice(),
            HeapObj::Array { elems, .. } => elems.as_slice(),
        };
        vals.iter().filter_map(|v| match v {
            Value::Ref(Some(l)) => Some(*l),
            _ => None,
        })
    }

    pub fn slots(&self) -> &[Value] {
        match self {
            HeapObj::Record { fields, .. } => fields,
            HeapObj::Array { elems, .. } => elems,
        }
    }

    pub fn slots_mut(&mut self) -> &mut Vec<Value> {
        match self {
            HeapObj::Record { fields, .. } => fields,
            HeapObj::Array { elems, .. } => elems,
        }
    }

    pub fn is_record(&self) -> bool {
        matches!(self, HeapObj::Record { .. })
    }
}

/// Global variable valuation plus heap. `alloc` is the next fresh location
/// and takes no part in comparisons.
#[derive(Debug, Clone, Default)]
pub struct State {
    pub store: BTreeMap<String, Value>,
    pub heap: BTreeMap<Loc, HeapObj>,
    pub alloc: Loc,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.store == other.store && self.heap == other.heap
    }
}

impl Eq for State {}

impl Hash for State {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.store.hash(h);
        self.heap.hash(h);
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        self.store.cmp(&other.store).then_with(|| self.heap.cmp(&other.heap))
    }
}

impl State {
    pub fn get(&self, x: &str) -> Option<&Value> {
        self.store.get(x)
    }

    pub fn get_int(&self, x: &str) -> Option<i64> {
        self.store.get(x).and_then(Value::as_int)
    }

    pub fn record_count(&self) -> usize {
        self.heap.values().filter(|o| o.is_record()).count()
    }

    /// Allocates a heap object at the next free location.
    pub fn alloc_obj(&mut self, obj: HeapObj) -> Loc {
        while self.heap.contains_key(&self.alloc) {
            self.alloc += 1;
        }
        let l = self.alloc;
        self.heap.insert(l, obj);
        self.alloc += 1;
        l
    }

    /// Integer contents of the array referenced by variable `x`.
    pub fn int_array(&self, x: &str) -> Option<Vec<i64>> {
        let Value::Ref(Some(l)) = self.store.get(x)? else {
            return None;
        };
        match self.heap.get(l)? {
            HeapObj::Array { elems, .. } => elems.iter().map(Value::as_int).collect(),
            _ => None,
        }
    }

    /// Follows `x`, then the given slot indices, returning the value reached.
    pub fn follow(&self, x: &str, path: &[usize]) -> Option<Value> {
        let mut v = self.store.get(x)?.clone();
        for &i in path {
            let Value::Ref(Some(l)) = v else {
                return None;
            };
            v = self.heap.get(&l)?.slots().get(i)?.clone();
        }
        Some(v)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let store: serde_json::Map<String, serde_json::Value> =
            self.store.iter().map(|(k, v)| (k.clone(), value_json(v))).collect();
        let heap: serde_json::Map<String, serde_json::Value> = self
            .heap
            .iter()
            .map(|(l, o)| {
                let body = match o {
                    HeapObj::Record { ty, fields } => json!({
                        "record": ty,
                        "fields": fields.iter().map(value_json).collect::<Vec<_>>(),
                    }),
                    HeapObj::Array { elems, .. } => json!({
                        "array": elems.iter().map(value_json).collect::<Vec<_>>(),
                    }),
                };
                (format!("#{}", l), body)
            })
            .collect();
        json!({ "store": store, "heap": heap })
    }
}

fn value_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Int(n) => json!(n),
        Value::Bool(b) => json!(b),
        Value::Ref(None) => serde_json::Value::Null,
        Value::Ref(Some(l)) => json!(format!("#{}", l)),
        Value::Set(s) => json!({ "set": s.iter().collect::<Vec<_>>() }),
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.store.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}={}", k, v)?;
        }
        write!(f, "}}")?;
        if !self.heap.is_empty() {
            write!(f, " heap[")?;
            for (i, (l, o)) in self.heap.iter().enumerate() {
                if i > 0 {
                    write!(f, "; ")?;
                }
                match o {
                    HeapObj::Record { ty, fields } => {
                        write!(f, "#{}:{}(", l, ty)?;
                        for (j, v) in fields.iter().enumerate() {
                            if j > 0 {
                                write!(f, ",")?;
                            }
                            write!(f, "{}", v)?;
                        }
                        write!(f, ")")?;
                    }
                    HeapObj::Array { elems, .. } => {
                        write!(f, "#{}:[", l)?;
                        for (j, v) in elems.iter().enumerate() {
                            if j > 0 {
                                write!(f, ",")?;
                            }
                            write!(f, "{}", v)?;
                        }
                        write!(f, "]")?;
                    }
                }
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alloc_count_ignored_by_equality() {
        let mut a = State::default();
        a.store.insert("x".into(), Value::Int(1));
        let mut b = a.clone();
        b.alloc = 7;
        assert_eq!(a, b);
        assert_eq!(a.cmp(&b), Ordering::Equal);
    }

    #[test]
    fn display_is_compact() {
        let mut s = State::default();
        let l = s.alloc_obj(HeapObj::Array {
            elems: vec![Value::Int(2), Value::Int(0)],
            dom: ElemDom::Int(0, 2),
        });
        s.store.insert("a".into(), Value::Ref(Some(l)));
        s.store.insert("p".into(), Value::Set([1, 3].into()));
        assert_eq!(s.to_string(), "{a=#0, p={1,3}} heap[#0:[2,0]]");
        assert_eq!(s.int_array("a"), Some(vec![2, 0]));
    }
}
