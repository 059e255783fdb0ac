//! Checking whole derivations and reporting the result.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path as FsPath;

use serde_json::{json, Value as Json};

use crate::check::{Checker, Counterexample, Judgment, Verdict};
use crate::exec::ExecConfig;
use crate::files::{self, LoadError};
use crate::state::Universe;
use crate::syntax::{typeck, Program};

use super::recursive::Induction;
use super::rules::{apply_rule, Env};
use super::{KernelError, Proven, Rule, Script, Step, Validity, REFL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Verified,
    Failed,
    /// A premise failed, so the step was not attempted.
    Blocked,
}

impl StepStatus {
    pub fn label(self) -> &'static str {
        match self {
            StepStatus::Verified => "VERIFIED",
            StepStatus::Failed => "FAILED",
            StepStatus::Blocked => "BLOCKED",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepReport {
    pub id: String,
    pub rule: Rule,
    pub status: StepStatus,
    pub details: String,
    pub conclusion: Option<Judgment>,
    /// For a refuted semantic step: a replayable witness against `refutes`.
    pub counterexample: Option<Counterexample>,
    /// The judgment the witness refutes: the step's own conclusion, or a
    /// step of its sub-derivation.
    pub refutes: Option<Judgment>,
}

impl StepReport {
    pub fn to_json(&self) -> Json {
        json!({
            "id": self.id,
            "rule": self.rule.name(),
            "status": self.status.label(),
            "details": self.details,
            "conclusion": self.conclusion.as_ref().map(|j| j.to_string()),
            "counterexample": self.counterexample.as_ref().map(Counterexample::to_json),
            "refutes": self.refutes.as_ref().map(|j| j.to_string()),
        })
    }
}

/// Result of checking a list of steps.
#[derive(Debug, Default)]
pub struct StepsOutcome {
    pub verified: BTreeMap<String, Proven>,
    pub reports: Vec<StepReport>,
    pub errors: BTreeMap<String, KernelError>,
}

impl StepsOutcome {
    pub fn first_failure(&self) -> Option<(&str, String)> {
        self.reports
            .iter()
            .find(|r| r.status != StepStatus::Verified)
            .map(|r| (r.id.as_str(), r.details.clone()))
    }
}

fn check_one(step: &Step, premises: &[Option<&Proven>], env: &Env) -> Result<Proven, KernelError> {
    let proven = apply_rule(step, premises, env)?;
    let c = env.checker;
    // Context-independent equivalences may mention variables bound by the
    // context they will be placed in; each such context is typechecked when
    // the equivalence is used.
    if proven.validity == Validity::Universe {
        for p in proven.judgment.programs() {
            c.typecheck(p)?;
        }
    }
    if let Judgment::Conj { cond, .. } = &proven.judgment {
        typeck::typecheck_cond(c.ctx, Some(&c.universe.type_env()), cond)
            .map_err(|e| KernelError::Check(e.to_string()))?;
    }
    if let Some(stated) = &step.conclusion {
        if !stated.same_as(&proven.judgment) {
            return Err(KernelError::ConclusionMismatch {
                stated: stated.to_string(),
                computed: proven.judgment.to_string(),
            });
        }
    }
    Ok(proven)
}

/// Checks steps in order. A failed step does not stop the others; steps
/// citing it are reported as blocked.
pub fn check_steps(steps: &[Step], env: &Env) -> StepsOutcome {
    let mut out = StepsOutcome::default();
    let mut seen = BTreeSet::new();
    for step in steps {
        seen.insert(step.id.clone());
        let mut premises = Vec::with_capacity(step.premises.len());
        let mut blocked = None;
        for id in &step.premises {
            if id == REFL {
                premises.push(None);
            } else if let Some(p) = out.verified.get(id) {
                premises.push(Some(p));
            } else {
                let why = if seen.contains(id) && id != &step.id {
                    format!("premise `{}` did not verify", id)
                } else {
                    format!("premise `{}` is not an earlier step", id)
                };
                blocked = Some((KernelError::UnverifiedPremise(id.clone()), why));
                break;
            }
        }
        let result = match blocked {
            Some((e, why)) => Err((StepStatus::Blocked, e, why)),
            None => check_one(step, &premises, env).map_err(|e| {
                let d = e.to_string();
                (StepStatus::Failed, e, d)
            }),
        };
        match result {
            Ok(p) => {
                out.reports.push(StepReport {
                    id: step.id.clone(),
                    rule: step.rule,
                    status: StepStatus::Verified,
                    details: validity_note(&p),
                    conclusion: Some(p.judgment.clone()),
                    counterexample: None,
                    refutes: None,
                });
                out.verified.insert(step.id.clone(), p);
            }
            Err((status, e, details)) => {
                let (refutes, counterexample) = refutation(step, &e, env).unzip();
                out.reports.push(StepReport {
                    id: step.id.clone(),
                    rule: step.rule,
                    status,
                    details,
                    conclusion: step.conclusion.clone(),
                    counterexample,
                    refutes,
                });
                out.errors.insert(step.id.clone(), e);
            }
        }
    }
    out
}

fn refute(checker: &Checker, j: &Judgment) -> Option<(Judgment, Counterexample)> {
    match checker.check(j).ok()?.verdict {
        Verdict::Invalid(c) => Some((j.clone(), *c)),
        _ => None,
    }
}

fn refutation(step: &Step, e: &KernelError, env: &Env) -> Option<(Judgment, Counterexample)> {
    match step.rule {
        Rule::SemanticDischarge if matches!(e, KernelError::NotValid { .. }) => {
            refute(env.checker, step.conclusion.as_ref()?)
        }
        Rule::EquivRecursive => {
            // Rerun the sub-derivation to find the refuted inner step; failing
            // that, refute the goal itself when the cross-check disagreed.
            let pl = &step.payload;
            let ind = Induction::new(
                pl.pre.as_ref()?,
                pl.program.as_ref()?,
                pl.post.as_ref()?,
                env.checker.ctx,
            )
            .ok()?;
            let inner = Env {
                checker: env.checker,
                induction: Some(&ind),
            };
            let sub = pl.sub.as_ref()?;
            check_steps(&sub.steps, &inner)
                .reports
                .into_iter()
                .find_map(|r| Some((r.refutes?, r.counterexample?)))
                .or_else(|| refute(env.checker, ind.goal()))
        }
        _ => None,
    }
}

fn validity_note(p: &Proven) -> String {
    let mut s = match &p.validity {
        super::Validity::Universe => "holds on the universe".to_string(),
        super::Validity::Everywhere { pinned } if pinned.is_empty() => "holds in every context".to_string(),
        super::Validity::Everywhere { pinned } => format!(
            "holds in contexts not rebinding {}",
            pinned.iter().cloned().collect::<Vec<_>>().join(", ")
        ),
    };
    if p.uses_axiom {
        s.push_str("; rests on an axiom");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofStatus {
    Proved,
    ProvedWithAxioms,
    Failed,
}

impl ProofStatus {
    pub fn label(self) -> &'static str {
        match self {
            ProofStatus::Proved => "PROVED",
            ProofStatus::ProvedWithAxioms => "PROVED-WITH-AXIOMS",
            ProofStatus::Failed => "FAILED",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub status: ProofStatus,
    pub failed_step: Option<String>,
    pub reason: Option<String>,
    pub goal: String,
    pub conclusion: Option<Judgment>,
    pub steps: Vec<StepReport>,
    /// Ids of axiom steps the goal depends on.
    pub axioms: Vec<String>,
    pub universe_hash: String,
}

impl Report {
    pub fn to_json(&self) -> Json {
        let verified = self.steps.iter().filter(|s| s.status == StepStatus::Verified).count();
        json!({
            "status": self.status.label(),
            "goal": self.goal,
            "conclusion": self.conclusion.as_ref().map(|j| j.to_string()),
            "failedStep": self.failed_step,
            "reason": self.reason,
            "steps": self.steps.iter().map(StepReport::to_json).collect::<Vec<_>>(),
            "axioms": self.axioms,
            "statistics": { "steps": self.steps.len(), "verifiedSteps": verified },
            "toolVersion": crate::TOOL_VERSION,
            "universeHash": self.universe_hash,
        })
    }

    pub fn is_proved(&self) -> bool {
        self.status != ProofStatus::Failed
    }
}

/// Axiom steps reachable from `goal`, including those inside inductive
/// sub-derivations (reported as `outer/inner`).
fn axioms_used(steps: &[Step], goal: &str, prefix: &str, out: &mut Vec<String>) {
    let by_id: BTreeMap<&str, &Step> = steps.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut todo = vec![goal];
    let mut done = BTreeSet::new();
    while let Some(id) = todo.pop() {
        if !done.insert(id) {
            continue;
        }
        let Some(s) = by_id.get(id) else { continue };
        if s.rule == Rule::AxiomDischarge {
            out.push(format!("{}{}", prefix, id));
        }
        if let Some(sub) = &s.payload.sub {
            axioms_used(&sub.steps, &sub.goal, &format!("{}{}/", prefix, id), out);
        }
        todo.extend(s.premises.iter().map(String::as_str).filter(|p| *p != REFL));
    }
}

pub fn check_derivation(script: &Script, program: &Program, universe: &Universe, cfg: ExecConfig) -> Report {
    let checker = Checker::new(program, universe, cfg);
    let env = Env {
        checker: &checker,
        induction: None,
    };
    let out = check_steps(&script.steps, &env);
    let mut report = Report {
        status: ProofStatus::Failed,
        failed_step: None,
        reason: None,
        goal: script.goal.clone(),
        conclusion: None,
        steps: out.reports.clone(),
        axioms: Vec::new(),
        universe_hash: universe.hash(),
    };
    if let Some((id, why)) = out.first_failure() {
        report.failed_step = Some(id.to_string());
        report.reason = Some(why);
        return report;
    }
    let Some(proven) = out.verified.get(&script.goal) else {
        report.failed_step = Some(script.goal.clone());
        report.reason = Some(format!("goal `{}` is not a step", script.goal));
        return report;
    };
    report.conclusion = Some(proven.judgment.clone());
    if let Some(claim) = &script.claim {
        if !claim.same_as(&proven.judgment) {
            report.failed_step = Some(script.goal.clone());
            report.reason = Some(format!("goal proves `{}`, not the claim `{}`", proven.judgment, claim));
            return report;
        }
    }
    axioms_used(&script.steps, &script.goal, "", &mut report.axioms);
    report.axioms.sort();
    report.status = if proven.uses_axiom {
        ProofStatus::ProvedWithAxioms
    } else {
        ProofStatus::Proved
    };
    report
}

/// A script together with the program and universe it names.
pub struct LoadedScript {
    pub script: Script,
    pub program: Program,
    pub universe: Universe,
    pub cfg: ExecConfig,
}

impl LoadedScript {
    pub fn load(path: &FsPath, jobs: usize) -> Result<LoadedScript, LoadError> {
        let script = super::load_script(path)?;
        let need = |f: &Option<std::path::PathBuf>, what: &str| {
            f.clone()
                .ok_or_else(|| LoadError::Missing(format!("{}: no `{}` given", path.display(), what)))
        };
        let program = files::load_program(&need(&script.program, "program")?)?;
        let universe = files::load_universe(&need(&script.universe, "universe")?, &program)?;
        let cfg = ExecConfig {
            fuel: script.fuel,
            jobs: jobs.max(1),
            ..Default::default()
        };
        Ok(LoadedScript {
            script,
            program,
            universe,
            cfg,
        })
    }

    pub fn check(&self) -> Report {
        check_derivation(&self.script, &self.program, &self.universe, self.cfg)
    }
}

pub fn check_script_file(path: &FsPath, jobs: usize) -> Result<Report, LoadError> {
    Ok(LoadedScript::load(path, jobs)?.check())
}
