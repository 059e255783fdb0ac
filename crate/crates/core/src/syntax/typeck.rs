//! Static checks: expression typing, assignment compatibility, call arity,
//! record fields, and the conservative "every terminating path returns" rule
//! for non-void procedures.
//!
//! Globals are typed by the supplied environment. Without one (`check` with
//! no universe) unknown identifiers get a wildcard type and only local
//! consistency is enforced.

use std::collections::BTreeMap;

use super::ast::*;
use super::pretty;
use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Ty {
    T(Type),
    Nil,
    Any,
}

fn compatible(target: &Ty, value: &Ty) -> bool {
    match (target, value) {
        (Ty::Any, _) | (_, Ty::Any) => true,
        (Ty::T(Type::Ref(_)), Ty::Nil) | (Ty::T(Type::Array(_)), Ty::Nil) | (Ty::Nil, Ty::Nil) => true,
        (Ty::Nil, Ty::T(Type::Ref(_))) | (Ty::Nil, Ty::T(Type::Array(_))) => true,
        (Ty::T(a), Ty::T(b)) => a == b,
        _ => false,
    }
}

fn show(t: &Ty) -> String {
    match t {
        Ty::T(t) => t.to_string(),
        Ty::Nil => "nil".into(),
        Ty::Any => "?".into(),
    }
}

struct Checker<'a> {
    ctx: &'a Program,
    globals: Option<&'a BTreeMap<Ident, Type>>,
    scopes: Vec<BTreeMap<Ident, Type>>,
    /// Return type of the enclosing procedure, if any.
    ret: Option<Type>,
    /// Depth of enclosing inline blocks, which absorb `return`.
    inline_depth: usize,
}

type TResult<T> = Result<T, SyntaxError>;

fn err<T>(node: String, msg: impl Into<String>) -> TResult<T> {
    Err(SyntaxError::Type { node, msg: msg.into() })
}

impl<'a> Checker<'a> {
    fn lookup(&self, x: &str) -> Option<Ty> {
        for s in self.scopes.iter().rev() {
            if let Some(t) = s.get(x) {
                return Some(Ty::T(t.clone()));
            }
        }
        match self.globals {
            Some(g) => g.get(x).map(|t| Ty::T(t.clone())),
            None => Some(Ty::Any),
        }
    }

    fn check_type_exists(&self, t: &Type, node: &str) -> TResult<()> {
        match t {
            Type::Ref(r) if self.ctx.record(r).is_none() => err(node.into(), format!("unknown record type `{}`", r)),
            Type::Array(e) => self.check_type_exists(e, node),
            _ => Ok(()),
        }
    }

    fn expect_ty(&self, e: &Expr, want: Type) -> TResult<()> {
        let got = self.expr(e)?;
        if compatible(&Ty::T(want.clone()), &got) {
            Ok(())
        } else {
            err(pretty::expr(e), format!("expected {}, found {}", want, show(&got)))
        }
    }

    fn expr(&self, e: &Expr) -> TResult<Ty> {
        let node = || pretty::expr(e);
        match e {
            Expr::Int(_) => Ok(Ty::T(Type::Int)),
            Expr::Bool(_) => Ok(Ty::T(Type::Bool)),
            Expr::Nil => Ok(Ty::Nil),
            Expr::Var(x) => self.lookup(x).map_or_else(|| err(node(), "undeclared variable"), Ok),
            Expr::Index(a, i) => {
                self.expect_ty(i, Type::Int)?;
                match self.expr(a)? {
                    Ty::T(Type::Array(elem)) => Ok(Ty::T(*elem)),
                    Ty::Any => Ok(Ty::Any),
                    t => err(node(), format!("indexing a non-array of type {}", show(&t))),
                }
            }
            Expr::Field(o, f) => match self.expr(o)? {
                Ty::T(Type::Ref(r)) => {
                    let rec = self.ctx.record(&r).ok_or(SyntaxError::Type {
                        node: node(),
                        msg: format!("unknown record type `{}`", r),
                    })?;
                    match rec.fields.iter().find(|(n, _)| n == f) {
                        Some((_, t)) => Ok(Ty::T(t.clone())),
                        None => err(node(), format!("record `{}` has no field `{}`", r, f)),
                    }
                }
                Ty::Any => Ok(Ty::Any),
                t => err(node(), format!("field access on non-record type {}", show(&t))),
            },
            Expr::Unary(UnOp::Neg, x) => {
                self.expect_ty(x, Type::Int)?;
                Ok(Ty::T(Type::Int))
            }
            Expr::Unary(UnOp::Not, x) => {
                self.expect_ty(x, Type::Bool)?;
                Ok(Ty::T(Type::Bool))
            }
            Expr::Binary(op, l, r) => {
                let (lt, rt) = (self.expr(l)?, self.expr(r)?);
                let is = |t: &Ty, want: Type| compatible(&Ty::T(want), t);
                match op {
                    BinOp::Add | BinOp::Sub => {
                        if is(&lt, Type::Int) && is(&rt, Type::Int) && lt != Ty::T(Type::Set) && rt != Ty::T(Type::Set)
                        {
                            Ok(if lt == Ty::Any && rt == Ty::Any {
                                Ty::Any
                            } else {
                                Ty::T(Type::Int)
                            })
                        } else if is(&lt, Type::Set) && is(&rt, Type::Set) {
                            Ok(Ty::T(Type::Set))
                        } else {
                            err(node(), format!("operands {} and {} do not match", show(&lt), show(&rt)))
                        }
                    }
                    BinOp::Mul | BinOp::Min | BinOp::Lt => {
                        if !is(&lt, Type::Int) || !is(&rt, Type::Int) {
                            return err(node(), "integer operands required");
                        }
                        Ok(Ty::T(if *op == BinOp::Lt { Type::Bool } else { Type::Int }))
                    }
                    BinOp::And | BinOp::Or => {
                        if !is(&lt, Type::Bool) || !is(&rt, Type::Bool) {
                            return err(node(), "boolean operands required");
                        }
                        Ok(Ty::T(Type::Bool))
                    }
                    BinOp::Eq => {
                        if !compatible(&lt, &rt) {
                            return err(node(), format!("cannot compare {} with {}", show(&lt), show(&rt)));
                        }
                        Ok(Ty::T(Type::Bool))
                    }
                    BinOp::In => {
                        if !is(&lt, Type::Int) || !is(&rt, Type::Set) {
                            return err(node(), "membership needs an integer and a set");
                        }
                        Ok(Ty::T(Type::Bool))
                    }
                }
            }
            Expr::SetLit(items) => {
                for i in items {
                    self.expect_ty(i, Type::Int)?;
                }
                Ok(Ty::T(Type::Set))
            }
            Expr::SetRange(lo, hi) => {
                self.expect_ty(lo, Type::Int)?;
                self.expect_ty(hi, Type::Int)?;
                Ok(Ty::T(Type::Set))
            }
            Expr::Intrinsic(i, args) => {
                if args.len() != i.arity() {
                    return err(node(), "wrong number of intrinsic arguments");
                }
                let int_arr = Type::Array(Box::new(Type::Int));
                match i {
                    Intrinsic::FindMin => {
                        self.expect_ty(&args[0], int_arr)?;
                        self.expect_ty(&args[1], Type::Set)?;
                        Ok(Ty::T(Type::Int))
                    }
                    Intrinsic::FindRank => {
                        self.expect_ty(&args[0], int_arr)?;
                        self.expect_ty(&args[1], Type::Int)?;
                        Ok(Ty::T(Type::Int))
                    }
                    Intrinsic::Below | Intrinsic::Above => {
                        self.expect_ty(&args[0], Type::Set)?;
                        self.expect_ty(&args[1], Type::Int)?;
                        Ok(Ty::T(Type::Set))
                    }
                }
            }
        }
    }

    fn lvalue(&self, lv: &LValue) -> TResult<Ty> {
        self.expr(&lv.to_expr())
    }

    fn assignable(&self, lv: &LValue, value: &Ty, node: String) -> TResult<()> {
        let target = self.lvalue(lv)?;
        if compatible(&target, value) {
            Ok(())
        } else {
            err(node, format!("cannot assign {} to {}", show(value), show(&target)))
        }
    }

    fn int_var(&self, x: &str, node: String) -> TResult<()> {
        match self.lookup(x) {
            Some(t) if compatible(&Ty::T(Type::Int), &t) => Ok(()),
            Some(t) => err(node, format!("`{}` has type {}, expected int", x, show(&t))),
            None => err(node, format!("undeclared variable `{}`", x)),
        }
    }

    fn call(&self, name: &str, args: &[Expr], node: String) -> TResult<&'a ProcDef> {
        let Some(p) = self.ctx.proc(name) else {
            return err(node, format!("unknown procedure `{}`", name));
        };
        if p.params.len() != args.len() {
            return err(
                node,
                format!("`{}` takes {} arguments, got {}", name, p.params.len(), args.len()),
            );
        }
        for ((_, t), a) in p.params.iter().zip(args) {
            let at = self.expr(a)?;
            if !compatible(&Ty::T(t.clone()), &at) {
                return err(
                    pretty::expr(a),
                    format!("argument of type {} where {} is expected", show(&at), t),
                );
            }
        }
        Ok(p)
    }

    fn stat(&mut self, s: &Stat) -> TResult<()> {
        let node = || pretty::stat(s);
        match s {
            Stat::Skip => Ok(()),
            Stat::Seq(a, b) | Stat::Choice(a, b) => {
                self.stat(a)?;
                self.stat(b)
            }
            Stat::Assign(lv, e) => {
                let t = self.expr(e)?;
                self.assignable(lv, &t, node())
            }
            Stat::RangeAssign(x, lo, hi) => {
                self.int_var(x, node())?;
                self.expect_ty(lo, Type::Int)?;
                self.expect_ty(hi, Type::Int)
            }
            Stat::SelectIn(x, e) => {
                self.int_var(x, node())?;
                self.expect_ty(e, Type::Set)
            }
            Stat::If(c, t) => {
                self.expect_ty(c, Type::Bool)?;
                self.stat(t)
            }
            Stat::IfElse(c, t, e) => {
                self.expect_ty(c, Type::Bool)?;
                self.stat(t)?;
                self.stat(e)
            }
            Stat::While(c, b) => {
                self.expect_ty(c, Type::Bool)?;
                self.stat(b)
            }
            Stat::ForUp(x, a, b, body) | Stat::ForDown(x, a, b, body) => {
                self.int_var(x, node())?;
                self.expect_ty(a, Type::Int)?;
                self.expect_ty(b, Type::Int)?;
                self.stat(body)
            }
            Stat::ForIn(x, e, body) => {
                self.int_var(x, node())?;
                self.expect_ty(e, Type::Set)?;
                self.stat(body)
            }
            Stat::Call(p, args) => self.call(p, args, node()).map(|_| ()),
            Stat::AssignCall(lv, p, args) => {
                let def = self.call(p, args, node())?;
                if def.ret == Type::Void {
                    return err(node(), format!("`{}` returns no value", p));
                }
                self.assignable(lv, &Ty::T(def.ret.clone()), node())
            }
            Stat::New(lv, r, inits) => {
                let Some(rec) = self.ctx.record(r) else {
                    return err(node(), format!("unknown record type `{}`", r));
                };
                for (i, (f, e)) in inits.iter().enumerate() {
                    let Some((_, ft)) = rec.fields.iter().find(|(n, _)| n == f) else {
                        return err(node(), format!("record `{}` has no field `{}`", r, f));
                    };
                    if inits[..i].iter().any(|(g, _)| g == f) {
                        return err(node(), format!("field `{}` initialised twice", f));
                    }
                    let et = self.expr(e)?;
                    if !compatible(&Ty::T(ft.clone()), &et) {
                        return err(pretty::expr(e), format!("field `{}` needs {}", f, ft));
                    }
                }
                self.assignable(lv, &Ty::T(Type::Ref(r.clone())), node())
            }
            Stat::Return(e) => {
                if self.inline_depth > 0 {
                    return match e {
                        None => Ok(()),
                        Some(_) => err(node(), "inlined bodies return without a value"),
                    };
                }
                match (&self.ret, e) {
                    (None, _) => err(node(), "return outside of a procedure"),
                    (Some(Type::Void), None) => Ok(()),
                    (Some(Type::Void), Some(_)) => err(node(), "void procedure returns a value"),
                    (Some(_), None) => err(node(), "missing return value"),
                    (Some(t), Some(e)) => {
                        let t = t.clone();
                        self.expect_ty(e, t)
                    }
                }
            }
            Stat::Block(blk) => {
                let mut scope = BTreeMap::new();
                for d in &blk.decls {
                    self.check_type_exists(&d.ty, &node())?;
                    if scope.contains_key(&d.name) {
                        return err(node(), format!("`{}` declared twice", d.name));
                    }
                    if let Some(init) = &d.init {
                        let it = self.expr(init)?;
                        if !compatible(&Ty::T(d.ty.clone()), &it) {
                            return err(
                                pretty::expr(init),
                                format!("initialiser of `{}` needs {}", d.name, d.ty),
                            );
                        }
                    }
                    scope.insert(d.name.clone(), d.ty.clone());
                }
                self.scopes.push(scope);
                if blk.inline {
                    self.inline_depth += 1;
                }
                let r = self.stat(&blk.body);
                if blk.inline {
                    self.inline_depth -= 1;
                }
                self.scopes.pop();
                r
            }
        }
    }
}

/// Conservative: true only if every normally terminating path hits `return`.
pub fn always_returns(s: &Stat) -> bool {
    match s {
        Stat::Return(_) => true,
        Stat::Seq(a, b) => always_returns(a) || always_returns(b),
        Stat::IfElse(_, a, b) | Stat::Choice(a, b) => always_returns(a) && always_returns(b),
        Stat::Block(b) if !b.inline => always_returns(&b.body),
        _ => false,
    }
}

fn check_records(ctx: &Program) -> TResult<()> {
    for (i, r) in ctx.records.iter().enumerate() {
        if ctx.records[..i].iter().any(|q| q.name == r.name) {
            return err(pretty::record(r), "record declared twice");
        }
        for (j, (f, t)) in r.fields.iter().enumerate() {
            if r.fields[..j].iter().any(|(g, _)| g == f) {
                return err(pretty::record(r), format!("field `{}` declared twice", f));
            }
            match t {
                Type::Int | Type::Bool | Type::Set => {}
                Type::Ref(q) if ctx.record(q).is_some() => {}
                _ => return err(pretty::record(r), format!("field `{}` has unsupported type {}", f, t)),
            }
        }
    }
    Ok(())
}

fn check_proc(ctx: &Program, globals: Option<&BTreeMap<Ident, Type>>, p: &ProcDef) -> TResult<()> {
    let node = format!("proc {}", p.name);
    if ctx.procs.iter().filter(|q| q.name == p.name).count() > 1 {
        return err(node, "procedure declared twice");
    }
    let mut scope = BTreeMap::new();
    for (n, t) in p.params.iter().chain(p.locals.iter()) {
        if scope.insert(n.clone(), t.clone()).is_some() {
            return err(node, format!("`{}` declared twice", n));
        }
    }
    let mut c = Checker {
        ctx,
        globals,
        scopes: vec![scope],
        ret: Some(p.ret.clone()),
        inline_depth: 0,
    };
    for (_, t) in p.params.iter().chain(p.locals.iter()) {
        c.check_type_exists(t, &node)?;
    }
    c.check_type_exists(&p.ret, &node)?;
    c.stat(&p.body)?;
    if p.ret != Type::Void && !always_returns(&p.body) {
        return err(node, "some terminating path does not return a value");
    }
    Ok(())
}

/// Checks declarations, every procedure, and the top-level statement.
pub fn typecheck_program(p: &Program, globals: Option<&BTreeMap<Ident, Type>>) -> TResult<()> {
    check_records(p)?;
    if let Some(g) = globals {
        for (name, t) in g {
            let c = Checker {
                ctx: p,
                globals,
                scopes: vec![],
                ret: None,
                inline_depth: 0,
            };
            c.check_type_exists(t, name)?;
        }
    }
    for proc in &p.procs {
        check_proc(p, globals, proc)?;
    }
    if let Some(b) = &p.body {
        typecheck_stat(p, globals, b)?;
    }
    Ok(())
}

/// Checks a standalone statement against the declarations of `ctx`.
pub fn typecheck_stat(ctx: &Program, globals: Option<&BTreeMap<Ident, Type>>, s: &Stat) -> TResult<()> {
    Checker {
        ctx,
        globals,
        scopes: vec![],
        ret: None,
        inline_depth: 0,
    }
    .stat(s)
}

/// Checks a boolean condition against the global environment.
pub fn typecheck_cond(ctx: &Program, globals: Option<&BTreeMap<Ident, Type>>, e: &Expr) -> TResult<()> {
    Checker {
        ctx,
        globals,
        scopes: vec![],
        ret: None,
        inline_depth: 0,
    }
    .expect_ty(e, Type::Bool)
}
