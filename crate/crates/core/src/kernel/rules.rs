//! The inference rules. Each rule computes its conclusion from its premises
//! and payload; nothing is taken from the step's stated conclusion except for
//! the discharge rules, whose conclusion is the claim being discharged.

use crate::check::{inline_call, Checker, Judgment, Verdict};
use crate::syntax::*;

use super::recursive::{self, Induction};
use super::rewrite::{apply_rewrite, RewriteCtx};
use super::{KernelError, Proven, Rule, Step, Validity};

/// What rules may consult besides their premises.
pub struct Env<'c, 'a> {
    pub checker: &'c Checker<'a>,
    /// Set while checking the sub-derivation of an inductive equivalence.
    pub induction: Option<&'c Induction>,
}

type KResult<T> = Result<T, KernelError>;

fn shape<T>(msg: impl Into<String>) -> KResult<T> {
    Err(KernelError::RuleShape(msg.into()))
}

fn same(a: &Stat, b: &Stat) -> bool {
    a.normalize() == b.normalize()
}

fn show(s: &Stat) -> String {
    pretty::stat(s)
}

fn seq(a: &Stat, b: &Stat) -> Stat {
    Stat::seq(a.clone(), b.clone())
}

fn as_triple(p: &Proven) -> KResult<(&Stat, &Stat, &Stat)> {
    match &p.judgment {
        Judgment::Triple { pre, prog, post } => Ok((pre, prog, post)),
        other => shape(format!("expected a triple premise, got {}", other.kind())),
    }
}

fn as_ord(p: &Proven) -> KResult<(&Stat, &Stat)> {
    match &p.judgment {
        Judgment::Ord { left, right } => Ok((left, right)),
        other => shape(format!("expected an ordering premise, got {}", other.kind())),
    }
}

fn as_equiv(p: &Proven) -> KResult<(&Stat, &Stat)> {
    match &p.judgment {
        Judgment::Equiv { left, right } => Ok((left, right)),
        other => shape(format!("expected an equivalence premise, got {}", other.kind())),
    }
}

fn as_conj(p: &Proven) -> KResult<(&Stat, &Stat, &Expr)> {
    match &p.judgment {
        Judgment::Conj { result, base, cond } => Ok((result, base, cond)),
        other => shape(format!("expected a conjunction premise, got {}", other.kind())),
    }
}

/// `b` is the syntactic negation of `c` (double negation is cancelled).
fn negates(c: &Expr, b: &Expr) -> bool {
    if *b == Expr::not(c.clone()) {
        return true;
    }
    matches!(c, Expr::Unary(UnOp::Not, inner) if **inner == *b)
}

fn items(s: &Stat) -> Vec<Stat> {
    s.normalize().flatten_seq().into_iter().cloned().collect()
}

fn need<'p>(premises: &'p [Option<&'p Proven>], n: usize, rule: Rule) -> KResult<Vec<&'p Proven>> {
    if premises.len() != n {
        return shape(format!("{} takes {} premises, got {}", rule, n, premises.len()));
    }
    premises
        .iter()
        .map(|p| p.ok_or_else(|| KernelError::RuleShape(format!("`refl` is only accepted by Substitution ({})", rule))))
        .collect()
}

fn payload<'s>(s: &'s Option<Stat>, field: &str, rule: Rule) -> KResult<&'s Stat> {
    s.as_ref()
        .ok_or_else(|| KernelError::RuleShape(format!("{} needs payload field `{}`", rule, field)))
}

fn triple(pre: Stat, prog: Stat, post: Stat) -> Judgment {
    Judgment::Triple { pre, prog, post }
}

/// Computes the conclusion of `step`. `premises` are resolved in order;
/// `None` stands for a reflexive equivalence.
pub fn apply_rule(step: &Step, premises: &[Option<&Proven>], env: &Env) -> KResult<Proven> {
    let rule = step.rule;
    let pl = &step.payload;
    let uses_axiom = premises.iter().flatten().any(|p| p.uses_axiom);
    let at_universe = |j: Judgment| Proven::new(j, Validity::Universe);
    let mut out = match rule {
        Rule::SequenceAxiom => {
            need(premises, 0, rule)?;
            let a = payload(&pl.pre, "pre", rule)?;
            let p = payload(&pl.program, "program", rule)?;
            at_universe(triple(a.clone(), p.clone(), seq(a, p)))
        }
        Rule::EmptyPreProgram => {
            need(premises, 0, rule)?;
            let p = payload(&pl.program, "program", rule)?;
            at_universe(triple(Stat::Skip, p.clone(), p.clone()))
        }
        Rule::EmptyProgram => {
            need(premises, 0, rule)?;
            let a = payload(&pl.pre, "pre", rule)?;
            at_universe(triple(a.clone(), Stat::Skip, a.clone()))
        }
        Rule::TradingLR => {
            let ps = need(premises, 1, rule)?;
            let (a, p, b) = as_triple(ps[0])?;
            let k = pl.split.unwrap_or(1);
            let its = items(p);
            if k == 0 || k >= its.len() {
                return shape(format!(
                    "cannot move {} of the {} program statements into the pre-program",
                    k,
                    its.len()
                ));
            }
            let (p1, p2) = its.split_at(k);
            at_universe(triple(
                seq(a, &Stat::from_seq_list(p1.to_vec())),
                Stat::from_seq_list(p2.to_vec()),
                b.clone(),
            ))
        }
        Rule::TradingRL => {
            let ps = need(premises, 1, rule)?;
            let (a, p, b) = as_triple(ps[0])?;
            let k = pl.split.unwrap_or(1);
            let its = items(a);
            if k == 0 || k >= its.len() {
                return shape(format!(
                    "cannot move {} of the {} pre-program statements into the program",
                    k,
                    its.len()
                ));
            }
            let (a1, a2) = its.split_at(its.len() - k);
            at_universe(triple(
                Stat::from_seq_list(a1.to_vec()),
                seq(&Stat::from_seq_list(a2.to_vec()), p),
                b.clone(),
            ))
        }
        Rule::Append => {
            let ps = need(premises, 1, rule)?;
            let (a, p, b) = as_triple(ps[0])?;
            let g = payload(&pl.program, "program", rule)?;
            at_universe(triple(a.clone(), seq(p, g), seq(b, g)))
        }
        Rule::Substitution => substitution(premises, env)?,
        Rule::PreStrengthen => {
            let ps = need(premises, 2, rule)?;
            let (a, a1) = as_ord(ps[0])?;
            let (a2, p, b) = as_triple(ps[1])?;
            if !same(a1, a2) {
                return shape(format!(
                    "ordering ends in `{}` but the triple's pre-program is `{}`",
                    show(a1),
                    show(a2)
                ));
            }
            at_universe(triple(a.clone(), p.clone(), b.clone()))
        }
        Rule::PostWeaken => {
            let ps = need(premises, 2, rule)?;
            let (a, p, b1) = as_triple(ps[0])?;
            let (b2, b) = as_ord(ps[1])?;
            if !same(b1, b2) {
                return shape(format!(
                    "the triple's post-program `{}` is not the ordering's left side `{}`",
                    show(b1),
                    show(b2)
                ));
            }
            at_universe(triple(a.clone(), p.clone(), b.clone()))
        }
        Rule::SeqComp => {
            let ps = need(premises, 2, rule)?;
            let (a, p1, b1) = as_triple(ps[0])?;
            let (b2, p2, g) = as_triple(ps[1])?;
            if !same(b1, b2) {
                return shape(format!(
                    "intermediate programs differ: `{}` vs `{}`",
                    show(b1),
                    show(b2)
                ));
            }
            at_universe(triple(a.clone(), seq(p1, p2), g.clone()))
        }
        Rule::While | Rule::WhileConsequence => {
            let ps = need(premises, 3, rule)?;
            let (a1, body, inv) = as_triple(ps[0])?;
            let (c1, a, b) = as_conj(ps[1])?;
            let (post, a_again, nb) = as_conj(ps[2])?;
            if !same(a1, c1) {
                return shape(format!(
                    "the body's pre-program `{}` is not the conjunction `{}`",
                    show(a1),
                    show(c1)
                ));
            }
            if !same(a, a_again) {
                return shape("the two conjunctions have different base programs");
            }
            let inv_ok = if rule == Rule::While {
                same(inv, a)
            } else {
                items(inv).ends_with(&items(a))
            };
            if !inv_ok {
                return shape(format!(
                    "the body's post-program `{}` does not {} the invariant `{}`",
                    show(inv),
                    if rule == Rule::While { "equal" } else { "end with" },
                    show(a)
                ));
            }
            if !negates(b, nb) {
                return shape(format!(
                    "`{}` is not the negation of `{}`",
                    pretty::expr(nb),
                    pretty::expr(b)
                ));
            }
            at_universe(triple(
                a.clone(),
                Stat::While(b.clone(), Box::new(body.clone())),
                post.clone(),
            ))
        }
        Rule::If | Rule::OneWayIf => {
            let ps = need(premises, 4, rule)?;
            let (a1, p1, post) = as_triple(ps[0])?;
            let (c1, a, b) = as_conj(ps[2])?;
            let (c2, a_again, nb) = as_conj(ps[3])?;
            if !same(a1, c1) {
                return shape("the first triple's pre-program is not the first conjunction");
            }
            if !same(a, a_again) {
                return shape("the two conjunctions have different base programs");
            }
            if !negates(b, nb) {
                return shape(format!(
                    "`{}` is not the negation of `{}`",
                    pretty::expr(nb),
                    pretty::expr(b)
                ));
            }
            let stat = if rule == Rule::If {
                let (a2, p2, post2) = as_triple(ps[1])?;
                if !same(a2, c2) {
                    return shape("the second triple's pre-program is not the second conjunction");
                }
                if !same(post, post2) {
                    return shape("the branch triples have different post-programs");
                }
                Stat::IfElse(b.clone(), Box::new(p1.clone()), Box::new(p2.clone()))
            } else {
                let (l, r) = as_ord(ps[1])?;
                if !same(l, c2) || !same(r, post) {
                    return shape("the ordering must relate the negated conjunction to the post-program");
                }
                Stat::If(b.clone(), Box::new(p1.clone()))
            };
            at_universe(triple(a.clone(), stat, post.clone()))
        }
        Rule::PrefixOrd => {
            need(premises, 0, rule)?;
            let g = payload(&pl.prefix, "prefix", rule)?;
            let a = payload(&pl.program, "program", rule)?;
            at_universe(Judgment::Ord {
                left: seq(g, a),
                right: a.clone(),
            })
        }
        Rule::EquivNonrecVoid | Rule::EquivNonrec => {
            need(premises, 0, rule)?;
            let call = payload(&pl.program, "program", rule)?;
            let name = match (rule, call) {
                (Rule::EquivNonrecVoid, Stat::Call(n, _)) => n,
                (Rule::EquivNonrec, Stat::AssignCall(_, n, _)) => n,
                _ => {
                    return shape(format!(
                        "{} needs a {} call, got `{}`",
                        rule,
                        if rule == Rule::EquivNonrec {
                            "value-returning"
                        } else {
                            "void"
                        },
                        show(call)
                    ))
                }
            };
            let allow = env.induction.is_some_and(|i| i.may_unfold(name));
            let body = inline_call(call, env.checker.ctx, allow)?;
            let def = env.checker.ctx.proc(name).expect("inline_call checked the callee");
            Proven::new(
                Judgment::Equiv {
                    left: call.clone(),
                    right: body,
                },
                Validity::Everywhere {
                    pinned: callee_globals(def, env.checker.ctx),
                },
            )
        }
        Rule::EquivSym => {
            let ps = need(premises, 1, rule)?;
            let (l, r) = as_equiv(ps[0])?;
            Proven::new(
                Judgment::Equiv {
                    left: r.clone(),
                    right: l.clone(),
                },
                ps[0].validity.clone(),
            )
        }
        Rule::EquivTrans => {
            let ps = need(premises, 2, rule)?;
            let (p, q) = as_equiv(ps[0])?;
            let (q2, r) = as_equiv(ps[1])?;
            if !same(q, q2) {
                return shape(format!("middle programs differ: `{}` vs `{}`", show(q), show(q2)));
            }
            Proven::new(
                Judgment::Equiv {
                    left: p.clone(),
                    right: r.clone(),
                },
                ps[0].validity.meet(&ps[1].validity),
            )
        }
        Rule::EquivCongruence => {
            let ps = need(premises, 1, rule)?;
            let (a, b) = as_equiv(ps[0])?;
            let Validity::Everywhere { pinned } = &ps[0].validity else {
                return shape("an equivalence established only over the universe cannot be used inside a context");
            };
            let ctx = payload(&pl.program, "program", rule)?.normalize();
            let target = pl
                .path
                .get(&ctx)
                .ok_or_else(|| KernelError::RuleShape("path does not address a subprogram".into()))?;
            if !same(&target, a) {
                return shape(format!("the path addresses `{}`, not `{}`", show(&target), show(a)));
            }
            let binders = pl.path.binders(&ctx).expect("path resolved above");
            if let Some(x) = binders.intersection(pinned).next() {
                return Err(KernelError::Capture(format!(
                    "`{}` is rebound around the replaced subprogram",
                    x
                )));
            }
            let replaced = pl.path.replace(&ctx, b).expect("path resolved above");
            Proven::new(
                Judgment::Equiv {
                    left: ctx,
                    right: replaced,
                },
                ps[0].validity.clone(),
            )
        }
        Rule::RewriteDischarge => {
            need(premises, 0, rule)?;
            let name = pl
                .rewrite
                .as_deref()
                .ok_or_else(|| KernelError::RuleShape("RewriteDischarge needs payload field `rewrite`".into()))?;
            let prog = payload(&pl.program, "program", rule)?.normalize();
            let target = pl
                .path
                .get(&prog)
                .ok_or_else(|| KernelError::RuleShape("path does not address a subprogram".into()))?;
            let locals = pl.path.binders(&prog).expect("path resolved above");
            let cx = RewriteCtx {
                program: env.checker.ctx,
                universe: env.checker.universe,
                locals: &locals,
            };
            let r = apply_rewrite(name, &target, pl.value.as_ref(), &cx)?;
            let after = pl.path.replace(&prog, &r.result).expect("path resolved above");
            Proven::new(
                Judgment::Equiv {
                    left: prog,
                    right: after,
                },
                Validity::Everywhere { pinned: r.pinned },
            )
        }
        Rule::SemanticDischarge => {
            need(premises, 0, rule)?;
            let j = stated(step)?;
            let r = env.checker.check(j)?;
            match r.verdict {
                Verdict::Valid => at_universe(j.clone()),
                Verdict::Invalid(c) => {
                    return Err(KernelError::NotValid {
                        verdict: "INVALID".into(),
                        detail: format!("{}: {} from {}", c.note, c.state, c.initial),
                    })
                }
                Verdict::Unknown(why) => {
                    return Err(KernelError::NotValid {
                        verdict: "UNKNOWN".into(),
                        detail: why,
                    })
                }
            }
        }
        Rule::AxiomDischarge => {
            need(premises, 0, rule)?;
            let mut p = at_universe(stated(step)?.clone());
            p.uses_axiom = true;
            p
        }
        Rule::InductiveHypothesis => {
            need(premises, 0, rule)?;
            let j = stated(step)?;
            let ind = env
                .induction
                .ok_or_else(|| KernelError::HypothesisMisuse("cited outside an inductive equivalence".into()))?;
            ind.check_instance(j)?;
            Proven::new(j.clone(), Validity::everywhere())
        }
        Rule::EquivRecursive => {
            need(premises, 0, rule)?;
            recursive::check_equiv_recursive(step, env)?
        }
    };
    out.uses_axiom |= uses_axiom;
    Ok(out)
}

fn stated(step: &Step) -> KResult<&Judgment> {
    step.conclusion
        .as_ref()
        .ok_or_else(|| KernelError::RuleShape(format!("{} needs a stated conclusion", step.rule)))
}

/// Globals a procedure body reads or writes: these must not be captured
/// when the body is unfolded into a context.
fn callee_globals(def: &ProcDef, ctx: &Program) -> std::collections::BTreeSet<Ident> {
    let vs = stat_vars(&def.body, ctx);
    vs.all()
        .into_iter()
        .filter(|x| !def.params.iter().any(|(p, _)| p == x) && !def.locals.iter().any(|(l, _)| l == x))
        .collect()
}

fn substitution(premises: &[Option<&Proven>], env: &Env) -> KResult<Proven> {
    if premises.len() != 4 {
        return shape(format!(
            "Substitution takes four premises (pre, program, post equivalences or `refl`, then the triple), got {}",
            premises.len()
        ));
    }
    let Some(t) = premises[3] else {
        return shape("the fourth premise of Substitution must be a triple");
    };
    let (a, p, b) = as_triple(t)?;
    let swap = |slot: usize, orig: &Stat, name: &str| -> KResult<Stat> {
        match premises[slot] {
            None => Ok(orig.clone()),
            Some(e) => {
                let (l, r) = as_equiv(e)?;
                if !same(l, orig) {
                    return shape(format!(
                        "the {} equivalence starts from `{}`, not `{}`",
                        name,
                        show(l),
                        show(orig)
                    ));
                }
                Ok(r.clone())
            }
        }
    };
    let a2 = swap(0, a, "pre-program")?;
    let p2 = swap(1, p, "program")?;
    let b2 = swap(2, b, "post-program")?;
    // A program equivalence checked only over the universe says nothing about
    // states outside it; the pre-program must not lead there.
    if let Some(Proven {
        validity: Validity::Universe,
        ..
    }) = premises[1]
    {
        if let Some(why) = env.checker.stays_in_universe(a)? {
            return shape(format!(
                "program equivalence does not cover the pre-program's post-states: {}",
                why
            ));
        }
    }
    Ok(Proven::new(triple(a2, p2, b2), Validity::Universe))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::ExecConfig;
    use crate::kernel::Payload;
    use crate::state::Universe;

    fn st(s: &str) -> Stat {
        parse_stat(s).unwrap()
    }

    fn step(rule: Rule, payload: Payload) -> Step {
        Step {
            id: "s".into(),
            rule,
            premises: vec![],
            payload,
            conclusion: None,
        }
    }

    fn proven(j: Judgment) -> Proven {
        Proven::new(j, Validity::Universe)
    }

    fn with<T>(f: impl FnOnce(&Env) -> T) -> T {
        let p = Program::default();
        let u = Universe::ints(&[("x", 0, 3), ("y", 0, 3)]);
        let c = Checker::new(&p, &u, ExecConfig::default());
        f(&Env {
            checker: &c,
            induction: None,
        })
    }

    #[test]
    fn trading_left_to_right() {
        with(|env| {
            let t = proven(triple(st("x := 0"), st("x := x+1; y := x"), st("x := 1; y := 1")));
            let out = apply_rule(&step(Rule::TradingLR, Payload::default()), &[Some(&t)], env).unwrap();
            assert!(out
                .judgment
                .same_as(&triple(st("x := 0; x := x+1"), st("y := x"), st("x := 1; y := 1"))));
        });
    }

    #[test]
    fn empty_pre_program() {
        with(|env| {
            let pl = Payload {
                program: Some(st("x := 1")),
                ..Default::default()
            };
            let out = apply_rule(&step(Rule::EmptyPreProgram, pl), &[], env).unwrap();
            assert_eq!(out.judgment, triple(Stat::Skip, st("x := 1"), st("x := 1")));
        });
    }

    #[test]
    fn while_with_mismatched_invariant() {
        with(|env| {
            let body = proven(triple(st("x := [0:2]"), st("x := x+1"), st("x := [0:3]")));
            let c1 = proven(Judgment::Conj {
                result: st("x := [0:2]"),
                base: st("x := [0:3]"),
                cond: parse_expr("x < 3").unwrap(),
            });
            let c2 = proven(Judgment::Conj {
                result: st("x := 3"),
                base: st("x := [0:3]"),
                cond: parse_expr("!(x < 3)").unwrap(),
            });
            let ok = apply_rule(
                &step(Rule::While, Payload::default()),
                &[Some(&body), Some(&c1), Some(&c2)],
                env,
            )
            .unwrap();
            assert_eq!(
                ok.judgment,
                triple(st("x := [0:3]"), st("while x < 3 do x := x+1 elihw"), st("x := 3"))
            );
            let other = proven(Judgment::Conj {
                result: st("x := [0:2]"),
                base: st("x := [0:1]"),
                cond: parse_expr("x < 3").unwrap(),
            });
            let err = apply_rule(
                &step(Rule::While, Payload::default()),
                &[Some(&body), Some(&other), Some(&c2)],
                env,
            );
            assert!(matches!(err, Err(KernelError::RuleShape(_))));
        });
    }

    #[test]
    fn semantic_discharge_refuses_unknown() {
        with(|env| {
            let mut s = step(Rule::SemanticDischarge, Payload::default());
            s.conclusion = Some(Judgment::Ord {
                left: st("x := x+1"),
                right: st("x := [0:3]"),
            });
            match apply_rule(&s, &[], env) {
                Err(KernelError::NotValid { verdict, .. }) => assert_eq!(verdict, "UNKNOWN"),
                other => panic!("{:?}", other),
            }
        });
    }

    #[test]
    fn congruence_needs_everywhere_validity() {
        with(|env| {
            let closed = proven(Judgment::Equiv {
                left: st("x := 0"),
                right: st("x := 0; x := 0"),
            });
            let pl = Payload {
                program: Some(st("y := 1; x := 0")),
                path: crate::kernel::Path {
                    path: vec![1],
                    span: None,
                },
                ..Default::default()
            };
            let err = apply_rule(&step(Rule::EquivCongruence, pl.clone()), &[Some(&closed)], env);
            assert!(matches!(err, Err(KernelError::RuleShape(_))));
            let open = Proven::new(closed.judgment.clone(), Validity::everywhere());
            let out = apply_rule(&step(Rule::EquivCongruence, pl), &[Some(&open)], env).unwrap();
            assert!(out.judgment.same_as(&Judgment::Equiv {
                left: st("y := 1; x := 0"),
                right: st("y := 1; x := 0; x := 0"),
            }));
        });
    }
}
