//! Equivalence of recursive procedure compositions by induction on calls.
//!
//! The step names three call statements `a`, `p`, `b` and concludes
//! `a; p ≡ b`. Its sub-derivation proves the same judgment and may unfold the
//! three procedures and cite instances of the hypothesis: the same three
//! calls with the metavariables (the lvalues and actual parameters of the
//! goal) replaced consistently, but not the goal itself.

use std::collections::BTreeMap;

use crate::check::{Checker, Judgment};
use crate::exec::{self, ExecConfig, Outcome};
use crate::state::enumerate_states;
use crate::syntax::*;

use super::derivation::check_steps;
use super::rules::Env;
use super::{KernelError, Proven, Step, Validity};

pub const DEFAULT_DEPTH_BOUND: usize = 4;

#[derive(Debug, Clone)]
pub struct Induction {
    calls: [Stat; 3],
    procs: Vec<Ident>,
    goal: Judgment,
}

fn call_parts(s: &Stat) -> Option<(Option<&LValue>, &Ident, &[Expr])> {
    match s {
        Stat::Call(p, args) => Some((None, p, args)),
        Stat::AssignCall(lv, p, args) => Some((Some(lv), p, args)),
        _ => None,
    }
}

type Subst = BTreeMap<Ident, Expr>;

fn bind(sub: &mut Subst, x: &str, e: &Expr) -> bool {
    match sub.get(x) {
        Some(prev) => prev == e,
        None => {
            sub.insert(x.to_string(), e.clone());
            true
        }
    }
}

/// Matches `inst` against `pat`, treating variables of `pat` as metavariables.
fn match_expr(pat: &Expr, inst: &Expr, sub: &mut Subst) -> bool {
    match (pat, inst) {
        (Expr::Var(x), _) => bind(sub, x, inst),
        (Expr::Index(a, i), Expr::Index(b, j)) => match_expr(a, b, sub) && match_expr(i, j, sub),
        (Expr::Field(a, f), Expr::Field(b, g)) => f == g && match_expr(a, b, sub),
        (Expr::Unary(o, a), Expr::Unary(p, b)) => o == p && match_expr(a, b, sub),
        (Expr::Binary(o, a, c), Expr::Binary(p, b, d)) => o == p && match_expr(a, b, sub) && match_expr(c, d, sub),
        (Expr::SetRange(a, c), Expr::SetRange(b, d)) => match_expr(a, b, sub) && match_expr(c, d, sub),
        (Expr::SetLit(xs), Expr::SetLit(ys)) | (Expr::Intrinsic(_, xs), Expr::Intrinsic(_, ys))
            if xs.len() == ys.len() =>
        {
            let same_head = match (pat, inst) {
                (Expr::Intrinsic(f, _), Expr::Intrinsic(g, _)) => f == g,
                _ => true,
            };
            same_head && xs.iter().zip(ys).all(|(x, y)| match_expr(x, y, sub))
        }
        _ => pat == inst,
    }
}

impl Induction {
    pub fn new(pre: &Stat, prog: &Stat, post: &Stat, ctx: &Program) -> Result<Induction, KernelError> {
        let mut procs = Vec::new();
        for s in [pre, prog, post] {
            let (_, p, args) = call_parts(s)
                .ok_or_else(|| KernelError::RuleShape(format!("`{}` is not a procedure call", pretty::stat(s))))?;
            let def = ctx
                .proc(p)
                .ok_or_else(|| KernelError::RuleShape(format!("unknown procedure `{}`", p)))?;
            if def.params.len() != args.len() {
                return Err(KernelError::RuleShape(format!(
                    "`{}` called with the wrong number of arguments",
                    p
                )));
            }
            if !procs.contains(p) {
                procs.push(p.clone());
            }
        }
        Ok(Induction {
            calls: [pre.clone(), prog.clone(), post.clone()],
            procs,
            goal: Judgment::Equiv {
                left: Stat::seq(pre.clone(), prog.clone()),
                right: post.clone(),
            },
        })
    }

    pub fn goal(&self) -> &Judgment {
        &self.goal
    }

    /// The procedures of the hypothesis may be unfolded in the sub-derivation.
    pub fn may_unfold(&self, name: &str) -> bool {
        self.procs.iter().any(|p| p == name)
    }

    pub fn check_instance(&self, j: &Judgment) -> Result<(), KernelError> {
        let misuse = |m: String| Err(KernelError::HypothesisMisuse(m));
        let Judgment::Equiv { left, right } = j else {
            return misuse(format!("the hypothesis is an equivalence, not a {}", j.kind()));
        };
        let l = left.normalize();
        let lhs = l.flatten_seq();
        if lhs.len() != 2 {
            return misuse("the left side must be two calls".into());
        }
        let insts = [lhs[0], lhs[1], right];
        let mut sub = Subst::new();
        for (pat, inst) in self.calls.iter().zip(insts) {
            let (Some((plv, pp, pargs)), Some((ilv, ip, iargs))) = (call_parts(pat), call_parts(inst)) else {
                return misuse(format!("`{}` is not a call of the hypothesis", pretty::stat(inst)));
            };
            if pp != ip {
                return misuse(format!(
                    "`{}` calls `{}` where the hypothesis calls `{}`",
                    pretty::stat(inst),
                    ip,
                    pp
                ));
            }
            let lv_ok = match (plv, ilv) {
                (None, None) => true,
                (Some(a), Some(b)) => match_expr(&a.to_expr(), &b.to_expr(), &mut sub),
                _ => false,
            };
            if !lv_ok || pargs.len() != iargs.len() || !pargs.iter().zip(iargs).all(|(a, b)| match_expr(a, b, &mut sub))
            {
                return misuse(format!(
                    "`{}` is not a consistent instance of `{}`",
                    pretty::stat(inst),
                    pretty::stat(pat)
                ));
            }
        }
        if j.same_as(&self.goal) {
            return misuse("the cited instance is the goal itself".into());
        }
        Ok(())
    }
}

/// Compares both sides from every initial state on which neither side hit
/// the depth bound or an error. Returns (states compared, states skipped).
fn cross_check(checker: &Checker, left: &Stat, right: &Stat, depth: usize) -> Result<(usize, usize), KernelError> {
    let cfg = ExecConfig {
        max_call_depth: depth,
        ..checker.cfg
    };
    let states = enumerate_states(checker.universe).map_err(|e| KernelError::Check(e.to_string()))?;
    let (mut compared, mut skipped) = (0, 0);
    for s in &states {
        let l = exec::run(checker.ctx, checker.universe, left, s, cfg);
        let r = exec::run(checker.ctx, checker.universe, right, s, cfg);
        let bad = |o: &std::collections::BTreeSet<Outcome>| {
            o.iter().find(|x| matches!(x, Outcome::RuntimeError { .. })).cloned()
        };
        if let Some(e) = bad(&l).or_else(|| bad(&r)) {
            return Err(KernelError::NotValid {
                verdict: "UNKNOWN".into(),
                detail: format!("bounded cross-check raised {} from {}", e, s),
            });
        }
        if l.contains(&Outcome::FuelExhausted) || r.contains(&Outcome::FuelExhausted) {
            skipped += 1;
            continue;
        }
        if l != r {
            let witness = l.symmetric_difference(&r).next().expect("sets differ");
            return Err(KernelError::NotValid {
                verdict: "INVALID".into(),
                detail: format!("bounded cross-check: from {} only one side reaches {}", s, witness),
            });
        }
        compared += 1;
    }
    Ok((compared, skipped))
}

pub fn check_equiv_recursive(step: &Step, env: &Env) -> Result<Proven, KernelError> {
    let pl = &step.payload;
    let get = |s: &Option<Stat>, f: &str| {
        s.clone()
            .ok_or_else(|| KernelError::RuleShape(format!("EquivRecursive needs payload field `{}`", f)))
    };
    let (pre, prog, post) = (
        get(&pl.pre, "pre")?,
        get(&pl.program, "program")?,
        get(&pl.post, "post")?,
    );
    let ind = Induction::new(&pre, &prog, &post, env.checker.ctx)?;
    if env.induction.is_some() {
        return Err(KernelError::RuleShape("inductive equivalences cannot be nested".into()));
    }
    let sub = pl
        .sub
        .as_ref()
        .ok_or_else(|| KernelError::RuleShape("EquivRecursive needs a `derivation`".into()))?;
    let inner = Env {
        checker: env.checker,
        induction: Some(&ind),
    };
    let outcome = check_steps(&sub.steps, &inner);
    if let Some((id, err)) = outcome.first_failure() {
        return Err(KernelError::RuleShape(format!("sub-derivation step `{}`: {}", id, err)));
    }
    let proven = outcome
        .verified
        .get(&sub.goal)
        .ok_or_else(|| KernelError::RuleShape(format!("sub-derivation goal `{}` not verified", sub.goal)))?;
    if !proven.judgment.same_as(ind.goal()) {
        return Err(KernelError::RuleShape(format!(
            "sub-derivation proves `{}`, not `{}`",
            proven.judgment,
            ind.goal()
        )));
    }
    let cites = sub
        .steps
        .iter()
        .filter(|s| s.rule == super::Rule::InductiveHypothesis)
        .count();
    if cites == 0 {
        return Err(KernelError::HypothesisMisuse(
            "the sub-derivation never cites the hypothesis; use a direct proof".into(),
        ));
    }
    let depth = pl.depth_bound.unwrap_or(DEFAULT_DEPTH_BOUND);
    let Judgment::Equiv { left, right } = ind.goal() else {
        unreachable!()
    };
    cross_check(env.checker, left, right, depth)?;
    Ok(Proven {
        judgment: ind.goal().clone(),
        validity: Validity::Universe,
        uses_axiom: proven.uses_axiom,
    })
}

/// Runs only the bounded cross-check; exposed for reporting and tests.
pub fn bounded_cross_check(
    checker: &Checker,
    left: &Stat,
    right: &Stat,
    depth: usize,
) -> Result<(usize, usize), KernelError> {
    cross_check(checker, left, right, depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prog() -> Program {
        parse_program(
            "proc f(a: int): int begin return a end
             proc g(a: int): int begin return a end
             proc h(a: int): int begin return a end",
        )
        .unwrap()
    }

    fn st(s: &str) -> Stat {
        parse_stat(s).unwrap()
    }

    #[test]
    fn instances() {
        let p = prog();
        let ind = Induction::new(&st("x := f(y)"), &st("x := g(x)"), &st("x := h(y)"), &p).unwrap();
        let inst = |l: &str, r: &str| Judgment::Equiv {
            left: st(l),
            right: st(r),
        };
        assert!(ind
            .check_instance(&inst("z.l := f(y-1); z.l := g(z.l)", "z.l := h(y-1)"))
            .is_ok());
        // Inconsistent: x bound to z.l and to w.
        assert!(matches!(
            ind.check_instance(&inst("z.l := f(y-1); z.l := g(w)", "z.l := h(y-1)")),
            Err(KernelError::HypothesisMisuse(_))
        ));
        // Different procedure.
        assert!(ind.check_instance(&inst("x := f(1); x := h(x)", "x := h(1)")).is_err());
        // The goal itself.
        assert!(ind.check_instance(&inst("x := f(y); x := g(x)", "x := h(y)")).is_err());
    }
}
