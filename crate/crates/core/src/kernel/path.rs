//! Addressing subprograms.
//!
//! A path is a list of child indices. At a sequence the index picks a
//! component of the flattened sequence; elsewhere it picks a structural child
//! (`if` branches, loop and block bodies, choice operands). An optional span
//! `[i, j)` at the end selects a contiguous run of sequence components.

use std::collections::BTreeSet;

use crate::syntax::{Ident, Stat};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Path {
    pub path: Vec<usize>,
    pub span: Option<(usize, usize)>,
}

fn child(s: &Stat, i: usize) -> Option<&Stat> {
    if matches!(s, Stat::Seq(..)) {
        s.flatten_seq().get(i).copied()
    } else {
        s.children().get(i).copied()
    }
}

impl Path {
    pub fn root() -> Path {
        Path::default()
    }

    /// The addressed subprogram of a normalised program.
    pub fn get(&self, s: &Stat) -> Option<Stat> {
        let mut cur = s;
        for &i in &self.path {
            cur = child(cur, i)?;
        }
        match self.span {
            None => Some(cur.clone()),
            Some((i, j)) => {
                let items = cur.flatten_seq();
                if i >= j || j > items.len() {
                    return None;
                }
                Some(Stat::from_seq_list(items[i..j].iter().map(|s| (*s).clone()).collect()))
            }
        }
    }

    /// `s` with the addressed subprogram replaced by `new`, normalised.
    pub fn replace(&self, s: &Stat, new: &Stat) -> Option<Stat> {
        Some(replace_at(&s.normalize(), &self.path, self.span, new)?.normalize())
    }

    /// Variables declared by blocks enclosing the addressed subprogram.
    pub fn binders(&self, s: &Stat) -> Option<BTreeSet<Ident>> {
        let mut out = BTreeSet::new();
        let mut cur = s;
        for &i in &self.path {
            if let Stat::Block(b) = cur {
                out.extend(b.decls.iter().map(|d| d.name.clone()));
            }
            cur = child(cur, i)?;
        }
        if self.span.is_some() {
            if let Stat::Block(b) = cur {
                out.extend(b.decls.iter().map(|d| d.name.clone()));
            }
        }
        Some(out)
    }
}

fn replace_at(s: &Stat, path: &[usize], span: Option<(usize, usize)>, new: &Stat) -> Option<Stat> {
    match path.split_first() {
        None => match span {
            None => Some(new.clone()),
            Some((i, j)) => {
                let items = s.flatten_seq();
                if i >= j || j > items.len() {
                    return None;
                }
                let mut out: Vec<Stat> = items[..i].iter().map(|s| (*s).clone()).collect();
                // Replacing a run by `skip` deletes it.
                if *new != Stat::Skip {
                    out.extend(new.flatten_seq().into_iter().cloned());
                }
                out.extend(items[j..].iter().map(|s| (*s).clone()));
                Some(Stat::from_seq_list(out))
            }
        },
        Some((&i, rest)) => {
            if matches!(s, Stat::Seq(..)) {
                let mut items: Vec<Stat> = s.flatten_seq().into_iter().cloned().collect();
                let c = items.get(i)?;
                items[i] = replace_at(c, rest, span, new)?;
                Some(Stat::from_seq_list(items))
            } else {
                let c = s.children().get(i).copied()?;
                s.with_child(i, replace_at(c, rest, span, new)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_stat, pretty};

    #[test]
    fn get_and_replace_spans() {
        let s = parse_stat("a := 1; if tt then b := 1; c := 1; d := 1 fi")
            .unwrap()
            .normalize();
        let p = Path {
            path: vec![1, 0],
            span: Some((1, 3)),
        };
        assert_eq!(pretty::stat(&p.get(&s).unwrap()), "c := 1; d := 1");
        let r = p.replace(&s, &parse_stat("e := 1").unwrap()).unwrap();
        assert_eq!(pretty::stat(&r), "a := 1; if tt then b := 1; e := 1 fi");
    }

    #[test]
    fn binders_on_path() {
        let s = parse_stat("var x: int begin var y: int begin skip; skip end end")
            .unwrap()
            .normalize();
        let p = Path {
            path: vec![0, 0],
            span: Some((0, 1)),
        };
        let b = p.binders(&s).unwrap();
        assert_eq!(
            b.into_iter().collect::<Vec<_>>(),
            vec!["x".to_string(), "y".to_string()]
        );
        assert!(Path {
            path: vec![3],
            span: None
        }
        .get(&s)
        .is_none());
    }
}
