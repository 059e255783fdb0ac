//! Catalog of equivalence-preserving rewrites.
//!
//! Each rewrite maps a target subprogram to an equivalent one under syntactic
//! side conditions, valid in every state. A rewrite may also name variables
//! that must resolve to globals for the equivalence to hold (`pinned`).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::exec::desugar_for;
use crate::state::{Domain, Universe, Value};
use crate::syntax::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("unknown rewrite `{0}`")]
    Unknown(String),
    #[error("`{rewrite}` does not apply to `{target}`: {why}")]
    NotApplicable {
        rewrite: String,
        target: String,
        why: String,
    },
}

pub const CATALOG: &[&str] = &[
    "seq-assoc",
    "skip-elim-left",
    "skip-elim-right",
    "for-unwind-last",
    "for-unwind-first",
    "for-to-while",
    "while-unroll-once",
    "commute-independent-assigns",
    "dead-store-intro",
    "dead-store-elim",
    "seq-into-if",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewritten {
    pub result: Stat,
    pub pinned: BTreeSet<Ident>,
}

pub struct RewriteCtx<'a> {
    pub program: &'a Program,
    pub universe: &'a Universe,
    /// Variables bound by blocks around the target.
    pub locals: &'a BTreeSet<Ident>,
}

fn vars_of(e: &Expr) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    e.visit_vars(&mut |v| {
        out.insert(v.to_string());
    });
    out
}

fn plus(e: &Expr, k: i64) -> Expr {
    Expr::binary(BinOp::Add, e.clone(), Expr::Int(k))
}

fn minus(e: &Expr, k: i64) -> Expr {
    Expr::binary(BinOp::Sub, e.clone(), Expr::Int(k))
}

/// Literal expressions: evaluation cannot fail.
fn literal_value(e: &Expr) -> Option<Value> {
    match e {
        Expr::Int(n) => Some(Value::Int(*n)),
        Expr::Bool(b) => Some(Value::Bool(*b)),
        Expr::Nil => Some(Value::Ref(None)),
        Expr::SetLit(items) => {
            let mut set = BTreeSet::new();
            for i in items {
                set.insert(literal_value(i)?.as_int()?);
            }
            Some(Value::Set(set))
        }
        _ => None,
    }
}

pub fn apply_rewrite(
    name: &str,
    target: &Stat,
    value: Option<&Expr>,
    cx: &RewriteCtx,
) -> Result<Rewritten, RewriteError> {
    let fail = |why: &str| RewriteError::NotApplicable {
        rewrite: name.to_string(),
        target: pretty::stat(target),
        why: why.to_string(),
    };
    let ok = |result: Stat| {
        Ok(Rewritten {
            result,
            pinned: BTreeSet::new(),
        })
    };
    let items: Vec<Stat> = target.flatten_seq().into_iter().cloned().collect();
    // Loop bodies must leave the counter and the moving bound alone.
    let loop_guard = |x: &Ident, bound: &Expr, body: &Stat| -> Result<(), RewriteError> {
        let vs = stat_vars(body, cx.program);
        let bv = vars_of(bound);
        if vs.writes.contains(x) {
            return Err(fail("the body writes the loop variable"));
        }
        if bv.contains(x) {
            return Err(fail("the bound mentions the loop variable"));
        }
        if let Some(v) = bv.iter().find(|v| vs.writes.contains(*v)) {
            return Err(fail(&format!("the body writes `{}` used by the bound", v)));
        }
        if bound.reads_heap() && vs.heap_write {
            return Err(fail("the bound reads the heap and the body writes it"));
        }
        Ok(())
    };
    match name {
        "seq-assoc" => {
            if items.len() < 3 {
                return Err(fail("needs a sequence of at least three components"));
            }
            ok(target.clone())
        }
        "skip-elim-left" => match items.as_slice() {
            [Stat::Skip, rest @ ..] if !rest.is_empty() => ok(Stat::from_seq_list(rest.to_vec())),
            _ => Err(fail("expected `skip; S`")),
        },
        "skip-elim-right" => match items.as_slice() {
            [rest @ .., Stat::Skip] if !rest.is_empty() => ok(Stat::from_seq_list(rest.to_vec())),
            _ => Err(fail("expected `S; skip`")),
        },
        "for-to-while" => desugar_for(target).map_or_else(|| Err(fail("expected a counting for loop")), ok),
        "while-unroll-once" => match target {
            Stat::While(c, b) => ok(Stat::If(c.clone(), Box::new(Stat::seq((**b).clone(), target.clone())))),
            _ => Err(fail("expected a while loop")),
        },
        "for-unwind-last" => match target {
            Stat::ForUp(x, lo, hi, b) => {
                loop_guard(x, hi, b)?;
                let short = Stat::ForUp(x.clone(), lo.clone(), minus(hi, 1), b.clone());
                let last = Stat::If(
                    Expr::binary(BinOp::Lt, Expr::var(x), plus(hi, 1)),
                    Box::new(Stat::seq(
                        (**b).clone(),
                        Stat::Assign(LValue::Var(x.clone()), plus(&Expr::var(x), 1)),
                    )),
                );
                ok(Stat::seq(short, last))
            }
            Stat::ForDown(x, hi, lo, b) => {
                loop_guard(x, lo, b)?;
                let short = Stat::ForDown(x.clone(), hi.clone(), plus(lo, 1), b.clone());
                let last = Stat::If(
                    Expr::binary(BinOp::Lt, lo.clone(), plus(&Expr::var(x), 1)),
                    Box::new(Stat::seq(
                        (**b).clone(),
                        Stat::Assign(LValue::Var(x.clone()), minus(&Expr::var(x), 1)),
                    )),
                );
                ok(Stat::seq(short, last))
            }
            _ => Err(fail("expected a counting for loop")),
        },
        "for-unwind-first" => match target {
            Stat::ForUp(x, lo, hi, b) => {
                loop_guard(x, hi, b)?;
                let rest = Stat::ForUp(x.clone(), Expr::var(x), hi.clone(), b.clone());
                let first = Stat::If(
                    Expr::binary(BinOp::Lt, Expr::var(x), plus(hi, 1)),
                    Box::new(Stat::from_seq_list(vec![
                        (**b).clone(),
                        Stat::Assign(LValue::Var(x.clone()), plus(&Expr::var(x), 1)),
                        rest,
                    ])),
                );
                ok(Stat::seq(Stat::Assign(LValue::Var(x.clone()), lo.clone()), first))
            }
            Stat::ForDown(x, hi, lo, b) => {
                loop_guard(x, lo, b)?;
                let rest = Stat::ForDown(x.clone(), Expr::var(x), lo.clone(), b.clone());
                let first = Stat::If(
                    Expr::binary(BinOp::Lt, lo.clone(), plus(&Expr::var(x), 1)),
                    Box::new(Stat::from_seq_list(vec![
                        (**b).clone(),
                        Stat::Assign(LValue::Var(x.clone()), minus(&Expr::var(x), 1)),
                        rest,
                    ])),
                );
                ok(Stat::seq(Stat::Assign(LValue::Var(x.clone()), hi.clone()), first))
            }
            _ => Err(fail("expected a counting for loop")),
        },
        "commute-independent-assigns" => {
            let [a, b] = items.as_slice() else {
                return Err(fail("expected exactly two statements"));
            };
            let simple = |s: &Stat| {
                matches!(
                    s,
                    Stat::Assign(LValue::Var(_), _) | Stat::RangeAssign(..) | Stat::SelectIn(..)
                )
            };
            if !simple(a) || !simple(b) {
                return Err(fail("both statements must assign plain variables"));
            }
            let va = stat_vars(a, cx.program);
            let vb = stat_vars(b, cx.program);
            if va.writes.iter().any(|w| vb.all().contains(w)) || vb.writes.iter().any(|w| va.all().contains(w)) {
                return Err(fail("the statements share a written variable"));
            }
            ok(Stat::seq(b.clone(), a.clone()))
        }
        "dead-store-elim" | "dead-store-intro" => {
            let (x, dead, live) = match (name, items.as_slice()) {
                ("dead-store-elim", [Stat::Assign(LValue::Var(x), e), live @ Stat::Assign(LValue::Var(y), _)])
                    if x == y =>
                {
                    (x.clone(), e.clone(), live.clone())
                }
                ("dead-store-intro", [live @ Stat::Assign(LValue::Var(x), _)]) => {
                    let e = value.ok_or_else(|| fail("needs a `value` to store"))?;
                    (x.clone(), e.clone(), live.clone())
                }
                _ => return Err(fail("expected `x := e; x := f` (elim) or `x := f` (intro)")),
            };
            let Stat::Assign(_, f) = &live else { unreachable!() };
            if vars_of(f).contains(&x) {
                return Err(fail("the live store reads the variable"));
            }
            let v = literal_value(&dead).ok_or_else(|| fail("the dead value must be a literal"))?;
            let mut pinned = BTreeSet::new();
            if !cx.locals.contains(&x) {
                let Some(d) = cx.universe.vars.get(&x) else {
                    return Err(fail("the variable is neither local nor declared in the universe"));
                };
                if !admits_literal(d, &v) {
                    return Err(fail("the dead value lies outside the variable's domain"));
                }
                pinned.insert(x.clone());
            }
            let result = if name == "dead-store-elim" {
                live
            } else {
                Stat::seq(Stat::Assign(LValue::Var(x), dead), live)
            };
            Ok(Rewritten { result, pinned })
        }
        "seq-into-if" => {
            let [head, tail] = items.as_slice() else {
                return Err(fail("expected `if ... fi; S`"));
            };
            let tail = tail.clone();
            match head {
                Stat::IfElse(c, t, e) => ok(Stat::IfElse(
                    c.clone(),
                    Box::new(Stat::seq((**t).clone(), tail.clone())),
                    Box::new(Stat::seq((**e).clone(), tail)),
                )),
                Stat::If(c, t) => ok(Stat::IfElse(
                    c.clone(),
                    Box::new(Stat::seq((**t).clone(), tail.clone())),
                    Box::new(tail),
                )),
                _ => Err(fail("expected `if ... fi; S`")),
            }
        }
        other => Err(RewriteError::Unknown(other.to_string())),
    }
}

fn admits_literal(d: &Domain, v: &Value) -> bool {
    match (d, v) {
        (Domain::Int { lo, hi, .. }, Value::Int(n)) => lo <= n && n <= hi,
        (Domain::Bool { .. }, Value::Bool(_)) => true,
        (Domain::Set { lo, hi, .. }, Value::Set(s)) => s.iter().all(|n| lo <= n && n <= hi),
        (Domain::Ref { .. }, Value::Ref(None)) => true,
        _ => false,
    }
}
