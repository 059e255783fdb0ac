//! Random rule instances whose premises and conclusions are judged by the
//! reference semantics.

use optri::check::Checker;
use optri::kernel::rules::Env;
use optri::kernel::{apply_rule, KernelError, Payload, Proven, Rule, Step, Validity};
use rand::seq::SliceRandom;
use rand::Rng;

use super::*;

/// One application of `rule`. A `None` premise is a reflexive equivalence.
#[derive(Debug, Clone)]
pub struct Instance {
    pub rule: Rule,
    pub premises: Vec<Option<J>>,
    pub payload: Payload,
    /// What the rule should conclude.
    pub expected: J,
}

#[derive(Debug)]
pub enum Outcome {
    /// Some premise is not valid; the instance says nothing.
    Vacuous,
    /// The kernel refused valid premises.
    Rejected(KernelError),
    /// Accepted, and the conclusion is valid.
    Sound,
    /// Accepted, and the conclusion has a run that errs or may diverge.
    Flagged,
    /// Accepted with a conclusion the reference semantics refutes.
    Unsound(String),
    /// Accepted, but the conclusion is not the expected one.
    WrongConclusion(String),
}

pub fn step(rule: Rule, n: usize, payload: Payload) -> Step {
    Step {
        id: "s".into(),
        rule,
        premises: (0..n).map(|i| format!("p{}", i)).collect(),
        payload,
        conclusion: None,
    }
}

pub fn run_instance(c: &Checker, inst: &Instance) -> Outcome {
    let mut proven = Vec::new();
    for p in &inst.premises {
        match p {
            None => proven.push(None),
            Some(j) => {
                if oracle(j) != Ov::Valid {
                    return Outcome::Vacuous;
                }
                proven.push(Some(Proven::new(to_judgment(j), Validity::Universe)));
            }
        }
    }
    let refs: Vec<Option<&Proven>> = proven.iter().map(|p| p.as_ref()).collect();
    let st = step(inst.rule, refs.len(), inst.payload.clone());
    let env = Env {
        checker: c,
        induction: None,
    };
    let got = match apply_rule(&st, &refs, &env) {
        Ok(p) => p,
        Err(e) => return Outcome::Rejected(e),
    };
    let want = to_judgment(&inst.expected);
    if !got.judgment.same_as(&want) {
        return Outcome::WrongConclusion(format!("got {}, expected {}", got.judgment, want));
    }
    match oracle(&inst.expected) {
        Ov::Valid => Outcome::Sound,
        Ov::Flagged => Outcome::Flagged,
        Ov::Invalid => Outcome::Unsound(want.to_string()),
    }
}

fn pay() -> Payload {
    Payload::default()
}

/// A program whose final states include those of `p`.
pub fn widen(r: &mut impl Rng, p: P) -> P {
    match r.gen_range(0..4) {
        0 => p,
        1 => ch(p, gen_p(r, 1)),
        2 => seq(p, P::Rng(var(r), 0, K - 1)),
        _ => ch(gen_p(r, 0), p),
    }
}

/// Usually a widening of `p`, sometimes an unrelated program.
fn post_for(r: &mut impl Rng, p: P) -> P {
    if r.gen_bool(0.15) {
        gen_p(r, 1)
    } else {
        widen(r, p)
    }
}

fn valid_triple(r: &mut impl Rng, items: usize) -> (P, P, P) {
    let a = gen_p(r, 1);
    let p = seq_all(gen_items(r, items, 1));
    let b = post_for(r, seq(a.clone(), p.clone()));
    (a, p, b)
}

/// A loop-shaped fixture: `i` ranges over `[lo:hi]` and `j` over a fixed
/// range, the third variable is unconstrained.
struct Box2 {
    i: usize,
    j: usize,
    k: usize,
    j_part: P,
}

impl Box2 {
    fn new(r: &mut impl Rng) -> Box2 {
        let mut vs = [0, 1, 2];
        vs.shuffle(r);
        let j = vs[1];
        let a = r.gen_range(0..K);
        let j_part = match r.gen_range(0..3) {
            0 => P::Skip,
            1 => P::Asg(j, E::C(a)),
            _ => P::Rng(j, a, r.gen_range(a..K)),
        };
        Box2 {
            i: vs[0],
            j,
            k: vs[2],
            j_part,
        }
    }

    fn with_i(&self, lo: i64, hi: i64) -> P {
        let i = if lo == hi {
            P::Asg(self.i, E::C(lo))
        } else {
            P::Rng(self.i, lo, hi)
        };
        seq(i, self.j_part.clone())
    }

    /// A body that advances `i` and keeps `j` in its range.
    fn body(&self, r: &mut impl Rng) -> P {
        if r.gen_bool(0.3) {
            return gen_p(r, 0);
        }
        let mut items = vec![P::Asg(self.i, E::Inc(self.i))];
        match r.gen_range(0..3) {
            0 => items.push(P::Rng(self.k, 0, r.gen_range(0..K))),
            1 => items.push(self.j_part.clone()),
            _ => {}
        }
        items.shuffle(r);
        seq_all(items)
    }
}

fn lt(v: usize, c: i64) -> B {
    B::Lt(E::V(v), E::C(c))
}

pub fn gen_instance(r: &mut impl Rng, rule: Rule) -> Instance {
    match rule {
        Rule::SequenceAxiom => {
            let (a, p) = (gen_p(r, 1), gen_p(r, 1));
            Instance {
                rule,
                premises: vec![],
                payload: Payload {
                    pre: Some(stat(&a)),
                    program: Some(stat(&p)),
                    ..pay()
                },
                expected: J::Triple(a.clone(), p.clone(), seq(a, p)),
            }
        }
        Rule::EmptyPreProgram => {
            let p = gen_p(r, 1);
            Instance {
                rule,
                premises: vec![],
                payload: Payload {
                    program: Some(stat(&p)),
                    ..pay()
                },
                expected: J::Triple(P::Skip, p.clone(), p),
            }
        }
        Rule::EmptyProgram => {
            let a = gen_p(r, 1);
            Instance {
                rule,
                premises: vec![],
                payload: Payload {
                    pre: Some(stat(&a)),
                    ..pay()
                },
                expected: J::Triple(a.clone(), P::Skip, a),
            }
        }
        Rule::TradingLR => {
            let n = r.gen_range(2..=4);
            let items = gen_items(r, n, 1);
            let a = gen_p(r, 1);
            let p = seq_all(items.clone());
            let b = post_for(r, seq(a.clone(), p.clone()));
            let k = r.gen_range(1..n);
            Instance {
                rule,
                premises: vec![Some(J::Triple(a.clone(), p, b.clone()))],
                payload: Payload {
                    split: Some(k),
                    ..pay()
                },
                expected: J::Triple(seq(a, seq_all(items[..k].to_vec())), seq_all(items[k..].to_vec()), b),
            }
        }
        Rule::TradingRL => {
            let n = r.gen_range(2..=4);
            let items = gen_items(r, n, 1);
            let a = seq_all(items.clone());
            let p = gen_p(r, 1);
            let b = post_for(r, seq(a.clone(), p.clone()));
            let k = r.gen_range(1..n);
            Instance {
                rule,
                premises: vec![Some(J::Triple(a, p.clone(), b.clone()))],
                payload: Payload {
                    split: Some(k),
                    ..pay()
                },
                expected: J::Triple(
                    seq_all(items[..n - k].to_vec()),
                    seq(seq_all(items[n - k..].to_vec()), p),
                    b,
                ),
            }
        }
        Rule::Append => {
            let (a, p, b) = valid_triple(r, 2);
            let g = gen_p(r, 1);
            Instance {
                rule,
                premises: vec![Some(J::Triple(a.clone(), p.clone(), b.clone()))],
                payload: Payload {
                    program: Some(stat(&g)),
                    ..pay()
                },
                expected: J::Triple(a, seq(p, g.clone()), seq(b, g)),
            }
        }
        Rule::Substitution => {
            let (a, p, b) = valid_triple(r, 2);
            let mut premises = Vec::new();
            let mut out = Vec::new();
            for x in [&a, &p, &b] {
                if r.gen_bool(0.3) {
                    premises.push(None);
                    out.push(x.clone());
                } else {
                    let y = if r.gen_bool(0.85) {
                        equivalent(r, x)
                    } else {
                        gen_p(r, 1)
                    };
                    premises.push(Some(J::Equiv(x.clone(), y.clone())));
                    out.push(y);
                }
            }
            premises.push(Some(J::Triple(a, p, b)));
            Instance {
                rule,
                premises,
                payload: pay(),
                expected: J::Triple(out[0].clone(), out[1].clone(), out[2].clone()),
            }
        }
        Rule::PreStrengthen => {
            let (x, y) = (gen_p(r, 1), gen_p(r, 1));
            let a = ch(x.clone(), y.clone());
            let a1 = match r.gen_range(0..4) {
                0 => x,
                1 => y,
                2 => seq(gen_p(r, 0), a.clone()),
                _ => gen_p(r, 1),
            };
            let p = gen_p(r, 1);
            let b = post_for(r, seq(a.clone(), p.clone()));
            Instance {
                rule,
                premises: vec![
                    Some(J::Ord(a1.clone(), a.clone())),
                    Some(J::Triple(a, p.clone(), b.clone())),
                ],
                payload: pay(),
                expected: J::Triple(a1, p, b),
            }
        }
        Rule::PostWeaken => {
            let (a, p, b) = valid_triple(r, 2);
            let b1 = post_for(r, b.clone());
            Instance {
                rule,
                premises: vec![
                    Some(J::Triple(a.clone(), p.clone(), b.clone())),
                    Some(J::Ord(b, b1.clone())),
                ],
                payload: pay(),
                expected: J::Triple(a, p, b1),
            }
        }
        Rule::SeqComp => {
            let (a, p1, b) = valid_triple(r, 1);
            let p2 = gen_p(r, 1);
            let g = post_for(r, seq(b.clone(), p2.clone()));
            Instance {
                rule,
                premises: vec![
                    Some(J::Triple(a.clone(), p1.clone(), b.clone())),
                    Some(J::Triple(b, p2.clone(), g.clone())),
                ],
                payload: pay(),
                expected: J::Triple(a, seq(p1, p2), g),
            }
        }
        Rule::While | Rule::WhileConsequence => {
            let bx = Box2::new(r);
            let c = r.gen_range(1..K);
            let lo = r.gen_range(0..c);
            let a = bx.with_i(lo, c);
            let a1 = bx.with_i(lo, c - 1);
            let post = bx.with_i(c, c);
            let body = bx.body(r);
            let inv = if rule == Rule::While {
                a.clone()
            } else {
                seq(gen_atom(r, 0), a.clone())
            };
            let b = lt(bx.i, c);
            Instance {
                rule,
                premises: vec![
                    Some(J::Triple(a1.clone(), body.clone(), inv)),
                    Some(J::Conj(a1, a.clone(), b.clone())),
                    Some(J::Conj(post.clone(), a.clone(), not(b.clone()))),
                ],
                payload: pay(),
                expected: J::Triple(a, P::While(b, Box::new(body)), post),
            }
        }
        Rule::If | Rule::OneWayIf => {
            let bx = Box2::new(r);
            let hi = r.gen_range(1..K);
            let c = r.gen_range(1..=hi);
            let lo = r.gen_range(0..c);
            let a = bx.with_i(lo, hi);
            let (low, high) = (bx.with_i(lo, c - 1), bx.with_i(c, hi));
            // Either branch order, and either form of the negation.
            let flip = r.gen_bool(0.5);
            let (b, nb, a1, a2) = if flip {
                let b = not(lt(bx.i, c));
                let nb = if r.gen_bool(0.5) { not(b.clone()) } else { lt(bx.i, c) };
                (b, nb, high, low)
            } else {
                let b = lt(bx.i, c);
                (b.clone(), not(b), low, high)
            };
            let p1 = gen_p(r, 1);
            if rule == Rule::If {
                let p2 = gen_p(r, 1);
                let post = post_for(r, ch(seq(a1.clone(), p1.clone()), seq(a2.clone(), p2.clone())));
                Instance {
                    rule,
                    premises: vec![
                        Some(J::Triple(a1.clone(), p1.clone(), post.clone())),
                        Some(J::Triple(a2.clone(), p2.clone(), post.clone())),
                        Some(J::Conj(a1, a.clone(), b.clone())),
                        Some(J::Conj(a2, a.clone(), nb)),
                    ],
                    payload: pay(),
                    expected: J::Triple(a, P::If(b, Box::new(p1), Box::new(p2)), post),
                }
            } else {
                let post = post_for(r, ch(seq(a1.clone(), p1.clone()), a2.clone()));
                Instance {
                    rule,
                    premises: vec![
                        Some(J::Triple(a1.clone(), p1.clone(), post.clone())),
                        Some(J::Ord(a2.clone(), post.clone())),
                        Some(J::Conj(a1, a.clone(), b.clone())),
                        Some(J::Conj(a2, a.clone(), nb)),
                    ],
                    payload: pay(),
                    expected: J::Triple(a, P::If1(b, Box::new(p1)), post),
                }
            }
        }
        Rule::PrefixOrd => {
            let (g, a) = (gen_p(r, 1), gen_p(r, 1));
            Instance {
                rule,
                premises: vec![],
                payload: Payload {
                    prefix: Some(stat(&g)),
                    program: Some(stat(&a)),
                    ..pay()
                },
                expected: J::Ord(seq(g, a.clone()), a),
            }
        }
        other => panic!("no generator for {}", other),
    }
}

/// Rules whose conclusions are judgments over the mini language.
pub const SEMANTIC_RULES: [Rule; 15] = [
    Rule::SequenceAxiom,
    Rule::EmptyPreProgram,
    Rule::EmptyProgram,
    Rule::TradingLR,
    Rule::TradingRL,
    Rule::Append,
    Rule::Substitution,
    Rule::PreStrengthen,
    Rule::PostWeaken,
    Rule::SeqComp,
    Rule::While,
    Rule::WhileConsequence,
    Rule::If,
    Rule::OneWayIf,
    Rule::PrefixOrd,
];
