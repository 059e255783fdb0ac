//! Semantic checking of judgments by exhaustive enumeration.
//!
//! Every check runs the component programs from every initial state of the
//! universe. A verdict is VALID or INVALID only if no path of any involved
//! program raised a runtime error or ran out of fuel; otherwise it is UNKNOWN.

pub mod inline;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde_json::json;
use thiserror::Error;

use crate::exec::{self, BehaviorSet, ExecConfig, Incident, Interp, Outcome};
use crate::state::{State, StateError, Universe};
use crate::syntax::typeck::{typecheck_cond, typecheck_stat};
use crate::syntax::*;
pub use inline::{inline_call, InlineError};

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Inline(#[from] InlineError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Judgment {
    /// `{pre} prog {post}`: pst(pre; prog) is contained in pst(post).
    Triple { pre: Stat, prog: Stat, post: Stat },
    /// `left ⊑ right`: pst(left) is contained in pst(right).
    Ord { left: Stat, right: Stat },
    /// `left ≡ right`: equal behavior sets.
    Equiv { left: Stat, right: Stat },
    /// `result ≐ (base, cond)`: pst(result) = pst(base) restricted to `cond`.
    Conj { result: Stat, base: Stat, cond: Expr },
}

impl Judgment {
    pub fn triple(pre: Stat, prog: Stat, post: Stat) -> Judgment {
        Judgment::Triple { pre, prog, post }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Judgment::Triple { .. } => "triple",
            Judgment::Ord { .. } => "ord",
            Judgment::Equiv { .. } => "equiv",
            Judgment::Conj { .. } => "conj",
        }
    }

    /// Same judgment with every program normalised modulo `;` associativity.
    pub fn normalize(&self) -> Judgment {
        match self {
            Judgment::Triple { pre, prog, post } => Judgment::Triple {
                pre: pre.normalize(),
                prog: prog.normalize(),
                post: post.normalize(),
            },
            Judgment::Ord { left, right } => Judgment::Ord {
                left: left.normalize(),
                right: right.normalize(),
            },
            Judgment::Equiv { left, right } => Judgment::Equiv {
                left: left.normalize(),
                right: right.normalize(),
            },
            Judgment::Conj { result, base, cond } => Judgment::Conj {
                result: result.normalize(),
                base: base.normalize(),
                cond: cond.clone(),
            },
        }
    }

    /// Equality modulo `;` associativity.
    pub fn same_as(&self, other: &Judgment) -> bool {
        self.normalize() == other.normalize()
    }

    pub fn programs(&self) -> Vec<&Stat> {
        match self {
            Judgment::Triple { pre, prog, post } => vec![pre, prog, post],
            Judgment::Ord { left, right } | Judgment::Equiv { left, right } => vec![left, right],
            Judgment::Conj { result, base, .. } => vec![result, base],
        }
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = pretty::stat;
        match self {
            Judgment::Triple { pre, prog, post } => write!(f, "{{{}}} {} {{{}}}", p(pre), p(prog), p(post)),
            Judgment::Ord { left, right } => write!(f, "{} <= {}", p(left), p(right)),
            Judgment::Equiv { left, right } => write!(f, "{} == {}", p(left), p(right)),
            Judgment::Conj { result, base, cond } => {
                write!(f, "{} =. ({}, {})", p(result), p(base), pretty::expr(cond))
            }
        }
    }
}

/// A reachable final state that the other side of a judgment lacks.
/// Running `program` from `initial` reaches `state`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub note: String,
    pub program: Stat,
    pub initial: State,
    pub state: State,
}

impl Counterexample {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "note": self.note,
            "program": pretty::stat(&self.program),
            "initial": self.initial.to_json(),
            "state": self.state.to_json(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(Box<Counterexample>),
    Unknown(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Valid => "VALID",
            Verdict::Invalid(_) => "INVALID",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::Invalid(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub states_enumerated: usize,
    pub max_fuel_used: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub verdict: Verdict,
    pub stats: Stats,
}

impl CheckResult {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "verdict": self.verdict.label(),
            "statistics": {
                "statesEnumerated": self.stats.states_enumerated,
                "maxFuelUsed": self.stats.max_fuel_used,
            },
        });
        match &self.verdict {
            Verdict::Invalid(c) => v["counterexample"] = c.to_json(),
            Verdict::Unknown(r) => v["reason"] = json!(r),
            Verdict::Valid => {}
        }
        v
    }
}

fn describe_incident(side: &str, i: &Option<Incident>) -> String {
    match i {
        Some(Incident { initial, outcome }) => format!("{}: {} from {}", side, outcome, initial),
        None => format!("{}: flagged", side),
    }
}

/// Checks judgments over one universe. Behavior sets are cached per
/// normalised program, so repeated checks of shared subprograms are cheap.
pub struct Checker<'a> {
    pub ctx: &'a Program,
    pub universe: &'a Universe,
    pub cfg: ExecConfig,
    cache: Mutex<HashMap<Stat, Arc<BehaviorSet>>>,
    initial: OnceLock<BTreeSet<State>>,
}

impl<'a> Checker<'a> {
    pub fn new(ctx: &'a Program, universe: &'a Universe, cfg: ExecConfig) -> Self {
        Checker {
            ctx,
            universe,
            cfg,
            cache: Mutex::new(HashMap::new()),
            initial: OnceLock::new(),
        }
    }

    /// Typechecks a program against the universe's variables.
    pub fn typecheck(&self, s: &Stat) -> Result<(), CheckError> {
        typecheck_stat(self.ctx, Some(&self.universe.type_env()), s)?;
        Ok(())
    }

    pub fn behaviors(&self, s: &Stat) -> Result<Arc<BehaviorSet>, CheckError> {
        let key = s.normalize();
        if let Some(b) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(b.clone());
        }
        self.typecheck(s)?;
        let b = Arc::new(exec::behaviors(self.ctx, self.universe, &key, self.cfg)?);
        self.cache.lock().expect("cache lock").insert(key, b.clone());
        Ok(b)
    }

    /// Confirms that every post-state of `s` is an initial state of the
    /// universe, so that facts established over the universe apply to it.
    /// Returns a description of the first escaping state otherwise.
    pub fn stays_in_universe(&self, s: &Stat) -> Result<Option<String>, CheckError> {
        let b = self.behaviors(s)?;
        if b.flagged() {
            return Ok(Some(flag_reason(&[("program", &b)])));
        }
        let init = match self.initial.get() {
            Some(i) => i,
            None => {
                let states = crate::state::enumerate_states(self.universe)?;
                self.initial.get_or_init(|| states.into_iter().collect())
            }
        };
        Ok(b.pairs
            .iter()
            .find(|(_, t)| !init.contains(t))
            .map(|(_, t)| format!("post-state {} is not a universe state", t)))
    }

    pub fn check(&self, j: &Judgment) -> Result<CheckResult, CheckError> {
        match j {
            Judgment::Triple { pre, prog, post } => self.check_triple(pre, prog, post),
            Judgment::Ord { left, right } => self.check_ord(left, right),
            Judgment::Equiv { left, right } => self.check_equiv(left, right),
            Judgment::Conj { result, base, cond } => self.check_conj(result, base, cond),
        }
    }

    pub fn check_triple(&self, pre: &Stat, prog: &Stat, post: &Stat) -> Result<CheckResult, CheckError> {
        let left = Stat::seq(pre.clone(), prog.clone());
        self.inclusion(&left, post, "post-state of pre; prog not reached by the post-program")
    }

    pub fn check_ord(&self, left: &Stat, right: &Stat) -> Result<CheckResult, CheckError> {
        self.inclusion(left, right, "post-state of the left program not reached by the right")
    }

    fn inclusion(&self, left: &Stat, right: &Stat, note: &str) -> Result<CheckResult, CheckError> {
        let l = self.behaviors(left)?;
        let r = self.behaviors(right)?;
        let stats = merge_stats(&[&l, &r]);
        if l.flagged() || r.flagged() {
            return Ok(CheckResult {
                verdict: Verdict::Unknown(flag_reason(&[("left", &l), ("right", &r)])),
                stats,
            });
        }
        let rset = r.poststates();
        let verdict = match l.pairs.iter().find(|(_, t)| !rset.contains(t)) {
            None => Verdict::Valid,
            Some((s, t)) => Verdict::Invalid(Box::new(Counterexample {
                note: note.to_string(),
                program: left.clone(),
                initial: s.clone(),
                state: t.clone(),
            })),
        };
        Ok(CheckResult { verdict, stats })
    }

    pub fn check_equiv(&self, left: &Stat, right: &Stat) -> Result<CheckResult, CheckError> {
        let l = self.behaviors(left)?;
        let r = self.behaviors(right)?;
        let stats = merge_stats(&[&l, &r]);
        if l.flagged() || r.flagged() {
            return Ok(CheckResult {
                verdict: Verdict::Unknown(flag_reason(&[("left", &l), ("right", &r)])),
                stats,
            });
        }
        let cex = |pair: &(State, State), prog: &Stat, note: &str| {
            Verdict::Invalid(Box::new(Counterexample {
                note: note.to_string(),
                program: prog.clone(),
                initial: pair.0.clone(),
                state: pair.1.clone(),
            }))
        };
        let verdict = if let Some(p) = l.pairs.difference(&r.pairs).next() {
            cex(p, left, "behavior of the left program missing from the right")
        } else if let Some(p) = r.pairs.difference(&l.pairs).next() {
            cex(p, right, "behavior of the right program missing from the left")
        } else {
            Verdict::Valid
        };
        Ok(CheckResult { verdict, stats })
    }

    pub fn check_conj(&self, result: &Stat, base: &Stat, cond: &Expr) -> Result<CheckResult, CheckError> {
        typecheck_cond(self.ctx, Some(&self.universe.type_env()), cond)?;
        let l = self.behaviors(result)?;
        let r = self.behaviors(base)?;
        let stats = merge_stats(&[&l, &r]);
        if l.flagged() || r.flagged() {
            return Ok(CheckResult {
                verdict: Verdict::Unknown(flag_reason(&[("result", &l), ("base", &r)])),
                stats,
            });
        }
        let interp = Interp::new(self.ctx, self.universe, self.cfg);
        let mut kept = BTreeSet::new();
        let mut witness_of = HashMap::new();
        for (s, t) in &r.pairs {
            match interp.eval_cond(cond, t) {
                Ok(true) => {
                    kept.insert(t.clone());
                    witness_of.entry(t.clone()).or_insert_with(|| s.clone());
                }
                Ok(false) => {}
                Err(k) => {
                    return Ok(CheckResult {
                        verdict: Verdict::Unknown(format!("condition raised {} in {}", k, t)),
                        stats,
                    })
                }
            }
        }
        let lset = l.poststates();
        let verdict = if let Some((s, t)) = l.pairs.iter().find(|(_, t)| !kept.contains(t)) {
            Verdict::Invalid(Box::new(Counterexample {
                note: "post-state of the result not a post-state of the base satisfying the condition".into(),
                program: result.clone(),
                initial: s.clone(),
                state: t.clone(),
            }))
        } else if let Some(t) = kept.iter().find(|t| !lset.contains(*t)) {
            Verdict::Invalid(Box::new(Counterexample {
                note: "post-state of the base satisfying the condition not reached by the result".into(),
                program: base.clone(),
                initial: witness_of[t].clone(),
                state: t.clone(),
            }))
        } else {
            Verdict::Valid
        };
        Ok(CheckResult { verdict, stats })
    }

    /// Confirms that a counterexample is genuine: its program reaches the
    /// state from the initial state, and the judgment's other side lacks it.
    pub fn replay(&self, j: &Judgment, c: &Counterexample) -> Result<bool, CheckError> {
        let outcomes = exec::run(self.ctx, self.universe, &c.program, &c.initial, self.cfg);
        if !outcomes.contains(&Outcome::Final(c.state.clone())) {
            return Ok(false);
        }
        let is = |a: &Stat| a.normalize() == c.program.normalize();
        Ok(match j {
            Judgment::Triple { pre, prog, post } => {
                let left = Stat::seq(pre.clone(), prog.clone());
                is(&left) && !self.behaviors(post)?.poststates().contains(&c.state)
            }
            Judgment::Ord { left, right } => is(left) && !self.behaviors(right)?.poststates().contains(&c.state),
            Judgment::Equiv { left, right } => {
                let other = if is(left) { right } else { left };
                let o = exec::run(self.ctx, self.universe, other, &c.initial, self.cfg);
                !o.contains(&Outcome::Final(c.state.clone()))
            }
            Judgment::Conj { result, base, cond } => {
                let interp = Interp::new(self.ctx, self.universe, self.cfg);
                let holds = interp.eval_cond(cond, &c.state) == Ok(true);
                if is(result) {
                    !(holds && self.behaviors(base)?.poststates().contains(&c.state))
                } else {
                    holds && !self.behaviors(result)?.poststates().contains(&c.state)
                }
            }
        })
    }
}

fn merge_stats(bs: &[&BehaviorSet]) -> Stats {
    Stats {
        states_enumerated: bs.iter().map(|b| b.states_enumerated).max().unwrap_or(0),
        max_fuel_used: bs.iter().map(|b| b.max_fuel_used).max().unwrap_or(0),
    }
}

fn flag_reason(sides: &[(&str, &BehaviorSet)]) -> String {
    sides
        .iter()
        .filter(|(_, b)| b.flagged())
        .map(|(n, b)| describe_incident(n, &b.first_incident))
        .collect::<Vec<_>>()
        .join("; ")
}
