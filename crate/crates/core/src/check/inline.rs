//! Replacing a procedure call by the procedure body.
//!
//! `x := p(a1, .., an)` becomes
//! `inline var f1: T1 := a1, .., fn: Tn := an, l1: L1, .. begin body' end`
//! where every `return e` in `body'` is `x := e; return`. Binders that would
//! capture a variable of the target are renamed first.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::syntax::subst::{all_idents, fresh_name, rename_stat};
use crate::syntax::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InlineError {
    #[error("`{0}` is recursive and cannot be unfolded by the non-recursive rule")]
    RecursiveCallee(String),
    #[error("`{name}` expects {expected} arguments, got {got}")]
    ArityMismatch { name: String, expected: usize, got: usize },
    #[error("unknown procedure `{0}`")]
    UnknownProcedure(String),
    #[error("not a single procedure call: `{0}`")]
    NotACall(String),
    #[error("`{0}` returns no value but its result is assigned")]
    VoidResult(String),
    #[error("`{0}` returns a value but is called as a statement")]
    DiscardedResult(String),
}

/// Unfolds one call statement. Recursive callees are refused unless
/// `allow_recursive` is set.
pub fn inline_call(call: &Stat, ctx: &Program, allow_recursive: bool) -> Result<Stat, InlineError> {
    let (target, name, args) = match call {
        Stat::Call(p, args) => (None, p, args),
        Stat::AssignCall(lv, p, args) => (Some(lv), p, args),
        other => return Err(InlineError::NotACall(pretty::stat(other))),
    };
    let def = ctx
        .proc(name)
        .ok_or_else(|| InlineError::UnknownProcedure(name.clone()))?;
    if !allow_recursive && ctx.is_recursive(name) {
        return Err(InlineError::RecursiveCallee(name.clone()));
    }
    if def.params.len() != args.len() {
        return Err(InlineError::ArityMismatch {
            name: name.clone(),
            expected: def.params.len(),
            got: args.len(),
        });
    }
    match (target.is_some(), def.ret == Type::Void) {
        (true, true) => return Err(InlineError::VoidResult(name.clone())),
        (false, false) => return Err(InlineError::DiscardedResult(name.clone())),
        _ => {}
    }

    let mut body = def.body.clone();
    let mut binders: Vec<(Ident, Type, Option<Expr>)> = def
        .params
        .iter()
        .zip(args)
        .map(|((n, t), a)| (n.clone(), t.clone(), Some(a.clone())))
        .chain(def.locals.iter().map(|(n, t)| (n.clone(), t.clone(), None)))
        .collect();

    if let Some(lv) = target {
        let lv_vars = lvalue_vars(lv);
        let mut avoid = all_idents(&body);
        avoid.extend(lv_vars.iter().cloned());
        avoid.extend(binders.iter().map(|b| b.0.clone()));
        for b in binders.iter_mut() {
            if lv_vars.contains(&b.0) {
                let fresh = fresh_name(&b.0, &avoid);
                avoid.insert(fresh.clone());
                body = rename_stat(&body, &b.0, &fresh);
                b.0 = fresh;
            }
        }
        body = rewrite_returns(&body, lv, &lv_vars, &mut avoid);
    }

    Ok(Stat::Block(Block {
        decls: binders
            .into_iter()
            .map(|(name, ty, init)| LocalDecl { name, ty, init })
            .collect(),
        body: Box::new(body),
        inline: true,
    }))
}

fn lvalue_vars(lv: &LValue) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    lv.to_expr().visit_vars(&mut |v| {
        out.insert(v.to_string());
    });
    out
}

/// `return e` to `lv := e; return`, outside nested inline blocks.
fn rewrite_returns(s: &Stat, lv: &LValue, lv_vars: &BTreeSet<Ident>, avoid: &mut BTreeSet<Ident>) -> Stat {
    match s {
        Stat::Return(Some(e)) => Stat::seq(Stat::Assign(lv.clone(), e.clone()), Stat::Return(None)),
        Stat::Block(b) if b.inline => s.clone(),
        Stat::Block(b) => {
            let mut b = b.clone();
            for i in 0..b.decls.len() {
                if lv_vars.contains(&b.decls[i].name) {
                    let old = b.decls[i].name.clone();
                    let fresh = fresh_name(&old, avoid);
                    avoid.insert(fresh.clone());
                    b.body = Box::new(rename_stat(&b.body, &old, &fresh));
                    b.decls[i].name = fresh;
                }
            }
            b.body = Box::new(rewrite_returns(&b.body, lv, lv_vars, avoid));
            Stat::Block(b)
        }
        _ => {
            let mut out = s.clone();
            for (i, c) in s.children().into_iter().enumerate() {
                let new = rewrite_returns(c, lv, lv_vars, avoid);
                out = out.with_child(i, new).expect("child index in range");
            }
            out
        }
    }
}
