//! Shared test support: a tiny integer language with its own reference
//! semantics, random generators, and glue to the checker under test.
//!
//! The reference evaluator shares no code with the crate. Programs are
//! printed to concrete syntax and parsed by the crate, so the crate's
//! parser, interpreter and checker are all compared against it.

#![allow(dead_code)]

pub mod rules;

use std::collections::{BTreeMap, BTreeSet};

use optri::check::{Checker, Judgment, Verdict};
use optri::exec::ExecConfig;
use optri::state::Universe;
use optri::syntax::{parse_expr, parse_stat, Expr, Program, Stat};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Values range over `0..K`.
pub const K: i64 = 3;
pub const VARS: [&str; 3] = ["x", "y", "z"];

pub type St = [i64; 3];

#[derive(Debug, Clone, PartialEq)]
pub enum E {
    C(i64),
    V(usize),
    /// `K-1 - v`
    Flip(usize),
    /// `v + 1`, which may leave the domain.
    Inc(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum B {
    Lt(E, E),
    Eq(E, E),
    Not(Box<B>),
    And(Box<B>, Box<B>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum P {
    Skip,
    Asg(usize, E),
    Rng(usize, i64, i64),
    Seq(Box<P>, Box<P>),
    Ch(Box<P>, Box<P>),
    If(B, Box<P>, Box<P>),
    /// `if c then a fi`
    If1(B, Box<P>),
    While(B, Box<P>),
}

pub fn seq(a: P, b: P) -> P {
    P::Seq(Box::new(a), Box::new(b))
}

pub fn ch(a: P, b: P) -> P {
    P::Ch(Box::new(a), Box::new(b))
}

pub fn seq_all(items: Vec<P>) -> P {
    let mut it = items.into_iter().rev();
    let last = it.next().unwrap_or(P::Skip);
    it.fold(last, |acc, p| seq(p, acc))
}

pub fn not(b: B) -> B {
    B::Not(Box::new(b))
}

// ---- printing ----

pub fn show_e(e: &E) -> String {
    match e {
        E::C(c) => c.to_string(),
        E::V(v) => VARS[*v].into(),
        E::Flip(v) => format!("{}-{}", K - 1, VARS[*v]),
        E::Inc(v) => format!("{}+1", VARS[*v]),
    }
}

pub fn show_b(b: &B) -> String {
    match b {
        B::Lt(a, c) => format!("{} < {}", show_e(a), show_e(c)),
        B::Eq(a, c) => format!("{} = {}", show_e(a), show_e(c)),
        B::Not(a) => format!("!({})", show_b(a)),
        B::And(a, c) => format!("({}) && ({})", show_b(a), show_b(c)),
    }
}

pub fn show(p: &P) -> String {
    match p {
        P::Skip => "skip".into(),
        P::Asg(v, e) => format!("{} := {}", VARS[*v], show_e(e)),
        P::Rng(v, lo, hi) => format!("{} := [{}:{}]", VARS[*v], lo, hi),
        P::Seq(a, b) => format!("{}; {}", show(a), show(b)),
        // `[]` binds tighter than `;`.
        P::Ch(a, b) => format!("{{ {{{}}} [] {{{}}} }}", show(a), show(b)),
        P::If(c, a, b) => format!("if {} then {} else {} fi", show_b(c), show(a), show(b)),
        P::If1(c, a) => format!("if {} then {} fi", show_b(c), show(a)),
        P::While(c, a) => format!("while {} do {} elihw", show_b(c), show(a)),
    }
}

pub fn stat(p: &P) -> Stat {
    let text = show(p);
    parse_stat(&text).unwrap_or_else(|e| panic!("generated program does not parse: {}: {}", text, e))
}

pub fn cond(b: &B) -> Expr {
    parse_expr(&show_b(b)).expect("generated condition parses")
}

// ---- reference semantics ----

/// Set when some execution errs or may run forever.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flagged;

fn ev(e: &E, s: &St) -> i64 {
    match e {
        E::C(c) => *c,
        E::V(v) => s[*v],
        E::Flip(v) => K - 1 - s[*v],
        E::Inc(v) => s[*v] + 1,
    }
}

pub fn holds(b: &B, s: &St) -> bool {
    match b {
        B::Lt(a, c) => ev(a, s) < ev(c, s),
        B::Eq(a, c) => ev(a, s) == ev(c, s),
        B::Not(a) => !holds(a, s),
        B::And(a, c) => holds(a, s) && holds(c, s),
    }
}

pub fn run(p: &P, s: &St) -> Result<BTreeSet<St>, Flagged> {
    match p {
        P::Skip => Ok([*s].into()),
        P::Asg(v, e) => {
            let n = ev(e, s);
            if !(0..K).contains(&n) {
                return Err(Flagged);
            }
            let mut t = *s;
            t[*v] = n;
            Ok([t].into())
        }
        P::Rng(v, lo, hi) => Ok((*lo..=*hi)
            .map(|n| {
                let mut t = *s;
                t[*v] = n;
                t
            })
            .collect()),
        P::Seq(a, b) => {
            let mut out = BTreeSet::new();
            for t in run(a, s)? {
                out.extend(run(b, &t)?);
            }
            Ok(out)
        }
        P::Ch(a, b) => {
            let mut out = run(a, s)?;
            out.extend(run(b, s)?);
            Ok(out)
        }
        P::If(c, a, b) => run(if holds(c, s) { a } else { b }, s),
        P::If1(c, a) => {
            if holds(c, s) {
                run(a, s)
            } else {
                Ok([*s].into())
            }
        }
        P::While(c, body) => {
            // Loop-head states reachable from `s`. Some execution diverges
            // iff this graph has a cycle through guard-true states.
            let mut succ: BTreeMap<St, BTreeSet<St>> = BTreeMap::new();
            let mut todo = vec![*s];
            let mut out = BTreeSet::new();
            while let Some(t) = todo.pop() {
                if succ.contains_key(&t) {
                    continue;
                }
                if !holds(c, &t) {
                    succ.insert(t, BTreeSet::new());
                    out.insert(t);
                    continue;
                }
                let next = run(body, &t)?;
                todo.extend(next.iter().copied());
                succ.insert(t, next);
            }
            if has_cycle(&succ) {
                return Err(Flagged);
            }
            Ok(out)
        }
    }
}

fn has_cycle(g: &BTreeMap<St, BTreeSet<St>>) -> bool {
    // 0 unvisited, 1 on stack, 2 done
    let mut mark: BTreeMap<St, u8> = BTreeMap::new();
    fn dfs(n: St, g: &BTreeMap<St, BTreeSet<St>>, mark: &mut BTreeMap<St, u8>) -> bool {
        mark.insert(n, 1);
        for m in g.get(&n).into_iter().flatten() {
            match mark.get(m).copied().unwrap_or(0) {
                1 => return true,
                0 if dfs(*m, g, mark) => return true,
                _ => {}
            }
        }
        mark.insert(n, 2);
        false
    }
    for n in g.keys() {
        if mark.get(n).copied().unwrap_or(0) == 0 && dfs(*n, g, &mut mark) {
            return true;
        }
    }
    false
}

pub fn all_states() -> Vec<St> {
    let mut out = Vec::new();
    for x in 0..K {
        for y in 0..K {
            for z in 0..K {
                out.push([x, y, z]);
            }
        }
    }
    out
}

pub fn pst(p: &P) -> Result<BTreeSet<St>, Flagged> {
    let mut out = BTreeSet::new();
    for s in all_states() {
        out.extend(run(p, &s)?);
    }
    Ok(out)
}

pub fn beh(p: &P) -> Result<BTreeSet<(St, St)>, Flagged> {
    let mut out = BTreeSet::new();
    for s in all_states() {
        for t in run(p, &s)? {
            out.insert((s, t));
        }
    }
    Ok(out)
}

/// A judgment over the mini language.
#[derive(Debug, Clone)]
pub enum J {
    Triple(P, P, P),
    Ord(P, P),
    Equiv(P, P),
    Conj(P, P, B),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ov {
    Valid,
    Invalid,
    Flagged,
}

impl Ov {
    pub fn label(self) -> &'static str {
        match self {
            Ov::Valid => "VALID",
            Ov::Invalid => "INVALID",
            Ov::Flagged => "UNKNOWN",
        }
    }
}

fn verdict(r: Result<bool, Flagged>) -> Ov {
    match r {
        Ok(true) => Ov::Valid,
        Ok(false) => Ov::Invalid,
        Err(_) => Ov::Flagged,
    }
}

pub fn oracle(j: &J) -> Ov {
    verdict((|| match j {
        J::Triple(a, p, b) => {
            let l = pst(&seq(a.clone(), p.clone()))?;
            let r = pst(b)?;
            Ok(l.is_subset(&r))
        }
        J::Ord(a, b) => {
            let l = pst(a)?;
            let r = pst(b)?;
            Ok(l.is_subset(&r))
        }
        J::Equiv(a, b) => {
            let l = beh(a)?;
            let r = beh(b)?;
            Ok(l == r)
        }
        J::Conj(r, base, c) => {
            let l = pst(r)?;
            let b: BTreeSet<St> = pst(base)?.into_iter().filter(|s| holds(c, s)).collect();
            Ok(l == b)
        }
    })())
}

pub fn to_judgment(j: &J) -> Judgment {
    match j {
        J::Triple(a, p, b) => Judgment::Triple {
            pre: stat(a),
            prog: stat(p),
            post: stat(b),
        },
        J::Ord(a, b) => Judgment::Ord {
            left: stat(a),
            right: stat(b),
        },
        J::Equiv(a, b) => Judgment::Equiv {
            left: stat(a),
            right: stat(b),
        },
        J::Conj(r, b, c) => Judgment::Conj {
            result: stat(r),
            base: stat(b),
            cond: cond(c),
        },
    }
}

// ---- the checker under test ----

pub struct Fixture {
    pub ctx: Program,
    pub universe: Universe,
}

impl Fixture {
    pub fn new() -> Fixture {
        Fixture {
            ctx: Program::default(),
            universe: Universe::ints(&[("x", 0, K - 1), ("y", 0, K - 1), ("z", 0, K - 1)]),
        }
    }

    pub fn checker(&self) -> Checker<'_> {
        Checker::new(&self.ctx, &self.universe, ExecConfig::default())
    }
}

pub fn crate_verdict(c: &Checker, j: &Judgment) -> Verdict {
    c.check(j).expect("judgment checks").verdict
}

// ---- generators ----

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn var(r: &mut impl Rng) -> usize {
    r.gen_range(0..VARS.len())
}

pub fn gen_e(r: &mut impl Rng) -> E {
    match r.gen_range(0..10) {
        0..=2 => E::C(r.gen_range(0..K)),
        3..=5 => E::V(var(r)),
        6..=8 => E::Flip(var(r)),
        _ => E::Inc(var(r)),
    }
}

pub fn gen_b(r: &mut impl Rng) -> B {
    match r.gen_range(0..10) {
        0..=4 => B::Lt(gen_e(r), gen_e(r)),
        5..=7 => B::Eq(gen_e(r), gen_e(r)),
        8 => not(gen_b(r)),
        _ => B::And(Box::new(gen_b(r)), Box::new(gen_b(r))),
    }
}

/// A statement that is not a sequence.
pub fn gen_atom(r: &mut impl Rng, depth: u32) -> P {
    let top = if depth == 0 { 4 } else { 9 };
    match r.gen_range(0..top) {
        0 => P::Skip,
        1 | 2 => P::Asg(var(r), gen_e(r)),
        3 => {
            let lo = r.gen_range(0..K);
            P::Rng(var(r), lo, r.gen_range(lo..K))
        }
        4 | 5 => ch(gen_p(r, depth - 1), gen_p(r, depth - 1)),
        6 | 7 => P::If(gen_b(r), Box::new(gen_p(r, depth - 1)), Box::new(gen_p(r, depth - 1))),
        _ => gen_loop(r, depth - 1),
    }
}

/// Mostly counting loops; now and then an arbitrary one.
pub fn gen_loop(r: &mut impl Rng, depth: u32) -> P {
    if r.gen_bool(0.2) {
        return P::While(gen_b(r), Box::new(gen_p(r, depth)));
    }
    let i = var(r);
    let bound = r.gen_range(0..K);
    let others: Vec<usize> = (0..VARS.len()).filter(|v| *v != i).collect();
    let mut body = vec![P::Asg(i, E::Inc(i))];
    if r.gen_bool(0.6) {
        let v = *others.choose(r).unwrap();
        body.push(if r.gen_bool(0.5) {
            P::Rng(v, 0, r.gen_range(0..K))
        } else {
            P::Asg(v, E::Flip(v))
        });
    }
    body.shuffle(r);
    P::While(B::Lt(E::V(i), E::C(bound)), Box::new(seq_all(body)))
}

pub fn gen_items(r: &mut impl Rng, n: usize, depth: u32) -> Vec<P> {
    (0..n).map(|_| gen_atom(r, depth)).collect()
}

pub fn gen_p(r: &mut impl Rng, depth: u32) -> P {
    let n = r.gen_range(1..=3);
    seq_all(gen_items(r, n, depth))
}

/// An equivalent variant of `p` built from behavior-preserving rewrites.
pub fn equivalent(r: &mut impl Rng, p: &P) -> P {
    match r.gen_range(0..6) {
        0 => seq(P::Skip, p.clone()),
        1 => seq(p.clone(), P::Skip),
        2 => P::If(gen_b_total(r), Box::new(p.clone()), Box::new(p.clone())),
        3 => ch(p.clone(), p.clone()),
        4 => match p {
            P::Ch(a, b) => ch((**b).clone(), (**a).clone()),
            P::If(c, a, b) => P::If(not(c.clone()), b.clone(), a.clone()),
            other => seq(other.clone(), P::Skip),
        },
        _ => {
            let once = equivalent(r, p);
            equivalent(r, &once)
        }
    }
}

/// A condition that never leaves the domain when evaluated.
pub fn gen_b_total(r: &mut impl Rng) -> B {
    match r.gen_range(0..3) {
        0 => B::Lt(E::V(var(r)), E::C(r.gen_range(0..=K))),
        1 => B::Eq(E::V(var(r)), E::V(var(r))),
        _ => B::Lt(E::V(var(r)), E::V(var(r))),
    }
}
