//! Proof kernel: checks derivations step by step.

pub mod derivation;
pub mod path;
pub mod recursive;
pub mod rewrite;
pub mod rules;
pub mod script;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::check::{InlineError, Judgment};
use crate::syntax::{Expr, Ident, Stat};
pub use derivation::{check_derivation, check_script_file, LoadedScript, ProofStatus, Report, StepReport, StepStatus};
pub use path::Path;
pub use rewrite::{apply_rewrite, RewriteError, CATALOG};
pub use rules::apply_rule;
pub use script::{load_script, Script, ScriptError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    SequenceAxiom,
    EmptyPreProgram,
    EmptyProgram,
    TradingLR,
    TradingRL,
    Append,
    Substitution,
    PreStrengthen,
    PostWeaken,
    SeqComp,
    While,
    WhileConsequence,
    If,
    OneWayIf,
    PrefixOrd,
    EquivNonrecVoid,
    EquivNonrec,
    EquivRecursive,
    SemanticDischarge,
    RewriteDischarge,
    AxiomDischarge,
    EquivSym,
    EquivTrans,
    EquivCongruence,
    InductiveHypothesis,
}

impl Rule {
    pub const ALL: [Rule; 25] = [
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
        Rule::EquivNonrecVoid,
        Rule::EquivNonrec,
        Rule::EquivRecursive,
        Rule::SemanticDischarge,
        Rule::RewriteDischarge,
        Rule::AxiomDischarge,
        Rule::EquivSym,
        Rule::EquivTrans,
        Rule::EquivCongruence,
        Rule::InductiveHypothesis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::SequenceAxiom => "SequenceAxiom",
            Rule::EmptyPreProgram => "EmptyPreProgram",
            Rule::EmptyProgram => "EmptyProgram",
            Rule::TradingLR => "TradingLR",
            Rule::TradingRL => "TradingRL",
            Rule::Append => "Append",
            Rule::Substitution => "Substitution",
            Rule::PreStrengthen => "PreStrengthen",
            Rule::PostWeaken => "PostWeaken",
            Rule::SeqComp => "SeqComp",
            Rule::While => "While",
            Rule::WhileConsequence => "WhileConsequence",
            Rule::If => "If",
            Rule::OneWayIf => "OneWayIf",
            Rule::PrefixOrd => "PrefixOrd",
            Rule::EquivNonrecVoid => "EquivNonrecVoid",
            Rule::EquivNonrec => "EquivNonrec",
            Rule::EquivRecursive => "EquivRecursive",
            Rule::SemanticDischarge => "SemanticDischarge",
            Rule::RewriteDischarge => "RewriteDischarge",
            Rule::AxiomDischarge => "AxiomDischarge",
            Rule::EquivSym => "EquivSym",
            Rule::EquivTrans => "EquivTrans",
            Rule::EquivCongruence => "EquivCongruence",
            Rule::InductiveHypothesis => "InductiveHypothesis",
        }
    }

    pub fn lookup(name: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a verified judgment holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    /// On the initial states of the universe, at top level only.
    Universe,
    /// In every state and under any enclosing blocks that do not rebind the
    /// pinned identifiers.
    Everywhere { pinned: BTreeSet<Ident> },
}

impl Validity {
    pub fn everywhere() -> Validity {
        Validity::Everywhere {
            pinned: BTreeSet::new(),
        }
    }

    /// Validity of a conclusion drawn from premises of validity `a` and `b`.
    pub fn meet(&self, other: &Validity) -> Validity {
        match (self, other) {
            (Validity::Everywhere { pinned: a }, Validity::Everywhere { pinned: b }) => Validity::Everywhere {
                pinned: a.union(b).cloned().collect(),
            },
            _ => Validity::Universe,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proven {
    pub judgment: Judgment,
    pub validity: Validity,
    /// Rests on an AxiomDischarge somewhere in its derivation.
    pub uses_axiom: bool,
}

impl Proven {
    pub fn new(judgment: Judgment, validity: Validity) -> Proven {
        Proven {
            judgment,
            validity,
            uses_axiom: false,
        }
    }
}

/// Rule-specific arguments of a step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Payload {
    pub pre: Option<Stat>,
    pub program: Option<Stat>,
    pub post: Option<Stat>,
    pub prefix: Option<Stat>,
    pub split: Option<usize>,
    pub path: Path,
    pub rewrite: Option<String>,
    pub value: Option<Expr>,
    pub depth_bound: Option<usize>,
    pub sub: Option<Box<Script>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub id: String,
    pub rule: Rule,
    pub premises: Vec<String>,
    pub payload: Payload,
    pub conclusion: Option<Judgment>,
}

/// Reserved premise id standing for a reflexive equivalence.
pub const REFL: &str = "refl";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("rule shape: {0}")]
    RuleShape(String),
    #[error("unverified premise `{0}`")]
    UnverifiedPremise(String),
    #[error("hypothesis misuse: {0}")]
    HypothesisMisuse(String),
    #[error("stated conclusion `{stated}` differs from the rule's `{computed}`")]
    ConclusionMismatch { stated: String, computed: String },
    #[error("semantic check returned {verdict}: {detail}")]
    NotValid { verdict: String, detail: String },
    #[error("variable capture: {0}")]
    Capture(String),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Inline(#[from] InlineError),
    #[error("{0}")]
    Check(String),
}

impl From<crate::check::CheckError> for KernelError {
    fn from(e: crate::check::CheckError) -> Self {
        KernelError::Check(e.to_string())
    }
}
