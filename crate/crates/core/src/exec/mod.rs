//! Execution: outcome sets of single runs, behavior sets and post-state sets
//! over a universe.

pub mod interp;
pub mod intrinsics;

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::state::{enumerate_states, State, StateError, Universe};
use crate::syntax::{Program, Stat};
pub use interp::{desugar_for, Interp};

pub const DEFAULT_FUEL: u64 = 10_000;
pub const DEFAULT_MAX_CALL_DEPTH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorKind {
    NilDereference,
    IndexOutOfBounds,
    OutOfDomainValue,
    HeapBudgetExceeded,
    MissingReturn,
    EmptySelect,
    EmptyRange,
    TypeMismatch,
    UndefinedVariable,
    UndefinedProcedure,
}

impl ErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::NilDereference => "nil-dereference",
            ErrorKind::IndexOutOfBounds => "index-out-of-bounds",
            ErrorKind::OutOfDomainValue => "out-of-domain-value",
            ErrorKind::HeapBudgetExceeded => "heap-budget-exceeded",
            ErrorKind::MissingReturn => "missing-return",
            ErrorKind::EmptySelect => "empty-select",
            ErrorKind::EmptyRange => "empty-range",
            ErrorKind::TypeMismatch => "type-mismatch",
            ErrorKind::UndefinedVariable => "undefined-variable",
            ErrorKind::UndefinedProcedure => "undefined-procedure",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Final(State),
    RuntimeError { kind: ErrorKind, at: String },
    FuelExhausted,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Final(s) => write!(f, "final {}", s),
            Outcome::RuntimeError { kind, at } => write!(f, "{} at `{}`", kind, at),
            Outcome::FuelExhausted => write!(f, "fuel exhausted"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecConfig {
    /// Step budget of every execution path.
    pub fuel: u64,
    /// Nested procedure calls beyond this depth count as fuel exhaustion.
    pub max_call_depth: usize,
    /// Worker threads for enumeration; 1 runs on the calling thread.
    pub jobs: usize,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            fuel: DEFAULT_FUEL,
            max_call_depth: DEFAULT_MAX_CALL_DEPTH,
            jobs: 1,
        }
    }
}

impl ExecConfig {
    pub fn with_fuel(fuel: u64) -> Self {
        ExecConfig {
            fuel,
            ..Default::default()
        }
    }
}

/// First abnormal outcome seen, with the initial state that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incident {
    pub initial: State,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BehaviorSet {
    pub pairs: BTreeSet<(State, State)>,
    pub any_runtime_error: bool,
    pub any_fuel_exhausted: bool,
    pub first_incident: Option<Incident>,
    pub states_enumerated: usize,
    pub max_fuel_used: u64,
}

impl BehaviorSet {
    pub fn flagged(&self) -> bool {
        self.any_runtime_error || self.any_fuel_exhausted
    }

    pub fn poststates(&self) -> BTreeSet<State> {
        self.pairs.iter().map(|(_, t)| t.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PostStates {
    pub states: BTreeSet<State>,
    pub any_runtime_error: bool,
    pub any_fuel_exhausted: bool,
    pub first_incident: Option<Incident>,
    pub states_enumerated: usize,
    pub max_fuel_used: u64,
}

impl PostStates {
    pub fn flagged(&self) -> bool {
        self.any_runtime_error || self.any_fuel_exhausted
    }
}

/// Outcomes of `s` from a single state.
pub fn run(ctx: &Program, u: &Universe, s: &Stat, init: &State, cfg: ExecConfig) -> BTreeSet<Outcome> {
    Interp::new(ctx, u, cfg).run(s, init).0
}

struct PerState {
    initial: State,
    outcomes: BTreeSet<Outcome>,
    max_used: u64,
}

fn run_all(ctx: &Program, u: &Universe, s: &Stat, cfg: ExecConfig) -> Result<Vec<PerState>, StateError> {
    let inits = enumerate_states(u)?;
    let interp = Interp::new(ctx, u, cfg);
    let one = |init: State| {
        let (outcomes, max_used) = interp.run(s, &init);
        PerState {
            initial: init,
            outcomes,
            max_used,
        }
    };
    if cfg.jobs <= 1 {
        return Ok(inits.into_iter().map(one).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| StateError::Universe(format!("thread pool: {}", e)))?;
    Ok(pool.install(|| inits.into_par_iter().map(one).collect()))
}

fn note_incident(slot: &mut Option<Incident>, initial: &State, o: &Outcome) {
    if slot.is_none() {
        *slot = Some(Incident {
            initial: initial.clone(),
            outcome: o.clone(),
        });
    }
}

/// beh(s) over the universe: all (initial, final) pairs of terminating runs.
pub fn behaviors(ctx: &Program, u: &Universe, s: &Stat, cfg: ExecConfig) -> Result<BehaviorSet, StateError> {
    let per = run_all(ctx, u, s, cfg)?;
    let mut b = BehaviorSet {
        states_enumerated: per.len(),
        ..Default::default()
    };
    for p in per {
        b.max_fuel_used = b.max_fuel_used.max(p.max_used);
        for o in &p.outcomes {
            match o {
                Outcome::Final(t) => {
                    b.pairs.insert((p.initial.clone(), t.clone()));
                }
                Outcome::RuntimeError { .. } => {
                    b.any_runtime_error = true;
                    note_incident(&mut b.first_incident, &p.initial, o);
                }
                Outcome::FuelExhausted => {
                    b.any_fuel_exhausted = true;
                    note_incident(&mut b.first_incident, &p.initial, o);
                }
            }
        }
    }
    Ok(b)
}

/// pst(s) over the universe: final states of all terminating runs.
pub fn poststates(ctx: &Program, u: &Universe, s: &Stat, cfg: ExecConfig) -> Result<PostStates, StateError> {
    let per = run_all(ctx, u, s, cfg)?;
    let mut r = PostStates {
        states_enumerated: per.len(),
        ..Default::default()
    };
    for p in per {
        r.max_fuel_used = r.max_fuel_used.max(p.max_used);
        for o in p.outcomes {
            match o {
                Outcome::Final(t) => {
                    r.states.insert(t);
                }
                Outcome::RuntimeError { .. } => {
                    r.any_runtime_error = true;
                    note_incident(&mut r.first_incident, &p.initial, &o);
                }
                Outcome::FuelExhausted => {
                    r.any_fuel_exhausted = true;
                    note_incident(&mut r.first_incident, &p.initial, &o);
                }
            }
        }
    }
    Ok(r)
}
