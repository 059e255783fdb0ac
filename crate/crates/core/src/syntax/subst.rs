//! Capture-aware renaming of variables.

use std::collections::BTreeSet;

use super::ast::*;

pub fn rename_expr(e: &Expr, from: &str, to: &str) -> Expr {
    let r = |x: &Expr| Box::new(rename_expr(x, from, to));
    match e {
        Expr::Var(v) if v == from => Expr::Var(to.to_string()),
        Expr::Int(_) | Expr::Bool(_) | Expr::Nil | Expr::Var(_) => e.clone(),
        Expr::Index(a, i) => Expr::Index(r(a), r(i)),
        Expr::Field(o, f) => Expr::Field(r(o), f.clone()),
        Expr::Unary(op, x) => Expr::Unary(*op, r(x)),
        Expr::Binary(op, a, b) => Expr::Binary(*op, r(a), r(b)),
        Expr::SetRange(a, b) => Expr::SetRange(r(a), r(b)),
        Expr::SetLit(items) => Expr::SetLit(items.iter().map(|x| rename_expr(x, from, to)).collect()),
        Expr::Intrinsic(i, args) => Expr::Intrinsic(*i, args.iter().map(|x| rename_expr(x, from, to)).collect()),
    }
}

pub fn rename_lvalue(lv: &LValue, from: &str, to: &str) -> LValue {
    match lv {
        LValue::Var(v) if v == from => LValue::Var(to.to_string()),
        LValue::Var(_) => lv.clone(),
        LValue::Index(a, i) => LValue::Index(rename_expr(a, from, to), rename_expr(i, from, to)),
        LValue::Field(o, f) => LValue::Field(rename_expr(o, from, to), f.clone()),
    }
}

fn rename_ident(x: &str, from: &str, to: &str) -> Ident {
    if x == from {
        to.to_string()
    } else {
        x.to_string()
    }
}

/// Renames free occurrences of `from` in `s`. Blocks that redeclare `from`
/// shadow it; their initialisers are still renamed.
pub fn rename_stat(s: &Stat, from: &str, to: &str) -> Stat {
    let e = |x: &Expr| rename_expr(x, from, to);
    let st = |x: &Stat| Box::new(rename_stat(x, from, to));
    let args = |xs: &[Expr]| xs.iter().map(|x| rename_expr(x, from, to)).collect::<Vec<_>>();
    match s {
        Stat::Skip | Stat::Return(None) => s.clone(),
        Stat::Return(Some(x)) => Stat::Return(Some(e(x))),
        Stat::Seq(a, b) => Stat::Seq(st(a), st(b)),
        Stat::Choice(a, b) => Stat::Choice(st(a), st(b)),
        Stat::Assign(lv, x) => Stat::Assign(rename_lvalue(lv, from, to), e(x)),
        Stat::RangeAssign(x, lo, hi) => Stat::RangeAssign(rename_ident(x, from, to), e(lo), e(hi)),
        Stat::SelectIn(x, set) => Stat::SelectIn(rename_ident(x, from, to), e(set)),
        Stat::If(c, t) => Stat::If(e(c), st(t)),
        Stat::IfElse(c, t, f) => Stat::IfElse(e(c), st(t), st(f)),
        Stat::While(c, b) => Stat::While(e(c), st(b)),
        Stat::ForUp(x, lo, hi, b) => Stat::ForUp(rename_ident(x, from, to), e(lo), e(hi), st(b)),
        Stat::ForDown(x, hi, lo, b) => Stat::ForDown(rename_ident(x, from, to), e(hi), e(lo), st(b)),
        Stat::ForIn(x, set, b) => Stat::ForIn(rename_ident(x, from, to), e(set), st(b)),
        Stat::Call(p, xs) => Stat::Call(p.clone(), args(xs)),
        Stat::AssignCall(lv, p, xs) => Stat::AssignCall(rename_lvalue(lv, from, to), p.clone(), args(xs)),
        Stat::New(lv, r, inits) => Stat::New(
            rename_lvalue(lv, from, to),
            r.clone(),
            inits.iter().map(|(f, x)| (f.clone(), e(x))).collect(),
        ),
        Stat::Block(b) => {
            let decls = b
                .decls
                .iter()
                .map(|d| LocalDecl {
                    name: d.name.clone(),
                    ty: d.ty.clone(),
                    init: d.init.as_ref().map(e),
                })
                .collect();
            let shadowed = b.decls.iter().any(|d| d.name == from);
            Stat::Block(Block {
                decls,
                body: if shadowed { b.body.clone() } else { st(&b.body) },
                inline: b.inline,
            })
        }
    }
}

/// Every identifier mentioned anywhere in `s`, bound or free.
pub fn all_idents(s: &Stat) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    fn ex(e: &Expr, out: &mut BTreeSet<Ident>) {
        e.visit_vars(&mut |v| {
            out.insert(v.to_string());
        });
    }
    fn go(s: &Stat, out: &mut BTreeSet<Ident>) {
        match s {
            Stat::Return(Some(e)) => ex(e, out),
            Stat::Assign(lv, e) => {
                ex(&lv.to_expr(), out);
                ex(e, out);
            }
            Stat::RangeAssign(x, a, b) => {
                out.insert(x.clone());
                ex(a, out);
                ex(b, out);
            }
            Stat::SelectIn(x, e) => {
                out.insert(x.clone());
                ex(e, out);
            }
            Stat::If(c, _) | Stat::IfElse(c, _, _) | Stat::While(c, _) => ex(c, out),
            Stat::ForUp(x, a, b, _) | Stat::ForDown(x, a, b, _) => {
                out.insert(x.clone());
                ex(a, out);
                ex(b, out);
            }
            Stat::ForIn(x, e, _) => {
                out.insert(x.clone());
                ex(e, out);
            }
            Stat::Call(_, args) => args.iter().for_each(|a| ex(a, out)),
            Stat::AssignCall(lv, _, args) => {
                ex(&lv.to_expr(), out);
                args.iter().for_each(|a| ex(a, out));
            }
            Stat::New(lv, _, inits) => {
                ex(&lv.to_expr(), out);
                inits.iter().for_each(|(_, e)| ex(e, out));
            }
            Stat::Block(b) => {
                for d in &b.decls {
                    out.insert(d.name.clone());
                    if let Some(e) = &d.init {
                        ex(e, out);
                    }
                }
            }
            _ => {}
        }
        for c in s.children() {
            go(c, out);
        }
    }
    go(s, &mut out);
    out
}

/// `base`, or `base_1`, `base_2`, ... whichever is first not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Ident>) -> Ident {
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{}_{}", base, i))
        .find(|n| !avoid.contains(n))
        .expect("unbounded supply")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_stat, pretty};

    #[test]
    fn shadowing_stops_renaming() {
        let s = parse_stat("x := x+1; var x: int := x begin x := 0 end").unwrap();
        let r = rename_stat(&s, "x", "y");
        assert_eq!(pretty::stat(&r), "y := y+1; var x: int := y begin x := 0 end");
    }

    #[test]
    fn fresh() {
        let avoid: BTreeSet<Ident> = ["t".to_string(), "t_1".to_string()].into();
        assert_eq!(fresh_name("t", &avoid), "t_2");
        assert_eq!(fresh_name("u", &avoid), "u");
    }
}
