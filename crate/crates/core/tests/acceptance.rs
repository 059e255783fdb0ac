//! Acceptance criteria. Each prints one PASS/FAIL line; the test fails if
//! any criterion does.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::rules::{gen_instance, run_instance, Outcome, SEMANTIC_RULES};
use common::*;
use optri::check::{Checker, Judgment, Verdict};
use optri::corpus::{run_corpus, CorpusReport};
use optri::exec::ExecConfig;
use optri::files::{load_program, load_stat, load_universe};
use optri::kernel::recursive::bounded_cross_check;
use optri::kernel::{check_script_file, load_script, ProofStatus, Rule, StepStatus};
use optri::state::{enumerate_states, universe_size};
use optri::syntax::parse_expr;

/// Sound instances required per rule.
const RULE_INSTANCES: usize = 500;
const RULE_SUITE_BUDGET: Duration = Duration::from_secs(600);
const TRADING_INSTANCES: usize = 500;
const AXIOM_INSTANCES: usize = 300;
const PREFIX_PAIRS: usize = 200;
const SORT_BUDGET: Duration = Duration::from_secs(60);
const SORT_ARRAYS: usize = 27;
const MAX_UNIVERSE: u128 = 4096;
const BST_DEPTH: usize = 4;

type Criterion = Result<String, String>;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rule_soundness() -> Criterion {
    let fx = Fixture::new();
    ensure(universe_size(&fx.universe) <= MAX_UNIVERSE, "universe too large")?;
    let c = fx.checker();
    let start = Instant::now();
    let mut least = usize::MAX;
    for (n, rule) in SEMANTIC_RULES.iter().enumerate() {
        let mut r = rng(1000 + n as u64);
        let mut sound = 0;
        for _ in 0..40 * RULE_INSTANCES {
            if sound == RULE_INSTANCES {
                break;
            }
            match run_instance(&c, &gen_instance(&mut r, *rule)) {
                Outcome::Sound => sound += 1,
                Outcome::Unsound(j) => return Err(format!("{} concluded refuted `{}`", rule, j)),
                Outcome::WrongConclusion(m) => return Err(format!("{}: {}", rule, m)),
                Outcome::Rejected(e) if *rule != Rule::Substitution => {
                    return Err(format!("{} rejected valid premises: {}", rule, e))
                }
                _ => {}
            }
        }
        ensure(sound >= RULE_INSTANCES, format!("{}: only {} instances", rule, sound))?;
        least = least.min(sound);
    }
    let t = start.elapsed();
    ensure(t <= RULE_SUITE_BUDGET, format!("took {:?}", t))?;
    Ok(format!(
        "{} rules, >= {} valid-premise instances each, 0 violations, {:.1}s",
        SEMANTIC_RULES.len(),
        least,
        t.as_secs_f64()
    ))
}

fn trading() -> Criterion {
    let fx = Fixture::new();
    let c = fx.checker();
    let mut r = rng(2000);
    let mut counts = [0usize; 3];
    for i in 0..TRADING_INSTANCES {
        let (a, p1, p2) = (gen_p(&mut r, 1), gen_atom(&mut r, 1), gen_p(&mut r, 1));
        let b = if i % 2 == 0 {
            common::rules::widen(&mut r, seq(a.clone(), seq(p1.clone(), p2.clone())))
        } else {
            gen_p(&mut r, 1)
        };
        let left = to_judgment(&J::Triple(a.clone(), seq(p1.clone(), p2.clone()), b.clone()));
        let right = to_judgment(&J::Triple(seq(a, p1), p2, b));
        let (x, y) = (crate_verdict(&c, &left), crate_verdict(&c, &right));
        ensure(
            x.label() == y.label(),
            format!("{} is {} but {} is {}", left, x.label(), right, y.label()),
        )?;
        counts[match x {
            Verdict::Valid => 0,
            Verdict::Invalid(_) => 1,
            Verdict::Unknown(_) => 2,
        }] += 1;
    }
    Ok(format!(
        "{} pairs agree (valid {}, invalid {}, unknown {})",
        TRADING_INSTANCES, counts[0], counts[1], counts[2]
    ))
}

fn axioms() -> Criterion {
    let fx = Fixture::new();
    let c = fx.checker();
    let mut r = rng(3000);
    let mut parts = Vec::new();
    for rule in [Rule::SequenceAxiom, Rule::EmptyPreProgram, Rule::EmptyProgram] {
        let (mut valid, mut flagged) = (0, 0);
        while valid < AXIOM_INSTANCES {
            let inst = gen_instance(&mut r, rule);
            match crate_verdict(&c, &to_judgment(&inst.expected)) {
                Verdict::Valid => valid += 1,
                Verdict::Unknown(_) => flagged += 1,
                Verdict::Invalid(_) => {
                    return Err(format!("{} instance refuted: {}", rule, to_judgment(&inst.expected)))
                }
            }
        }
        parts.push(format!("{} {}/{} (+{} flagged)", rule, valid, valid, flagged));
    }
    Ok(parts.join(", "))
}

fn prefix_ordering() -> Criterion {
    let fx = Fixture::new();
    let c = fx.checker();
    let mut r = rng(4000);
    let (mut checked, mut flagged) = (0, 0);
    while checked < PREFIX_PAIRS {
        let (g, a) = (gen_p(&mut r, 1), gen_p(&mut r, 1));
        let j = to_judgment(&J::Ord(seq(g, a.clone()), a));
        match crate_verdict(&c, &j) {
            Verdict::Valid => checked += 1,
            Verdict::Unknown(_) => flagged += 1,
            Verdict::Invalid(_) => return Err(format!("violated: {}", j)),
        }
    }
    Ok(format!(
        "{} pairs, 0 violations ({} flagged pairs skipped)",
        checked, flagged
    ))
}

fn entry<'a>(rep: &'a CorpusReport, name: &str) -> Result<&'a optri::corpus::EntryResult, String> {
    rep.get(name).ok_or_else(|| format!("corpus entry {} missing", name))
}

fn proof_ok(path: &Path) -> Result<String, String> {
    let r = check_script_file(path, 1).map_err(|e| e.to_string())?;
    match r.status {
        ProofStatus::Proved => Ok("PROVED".into()),
        ProofStatus::ProvedWithAxioms => Ok(format!("PROVED-WITH-AXIOMS {:?}", r.axioms)),
        ProofStatus::Failed => Err(format!("{:?}: {:?}", r.failed_step, r.reason)),
    }
}

fn selection_sort() -> Criterion {
    let dir = corpus().join("sort");
    let mut ctx = load_program(&dir.join("decls.opa")).map_err(|e| e.to_string())?;
    let u = load_universe(&dir.join("sort.opu"), &ctx).map_err(|e| e.to_string())?;
    let s: Vec<_> = ["pre_init.ops", "loop.ops", "post.ops"]
        .iter()
        .map(|f| load_stat(&dir.join(f), &mut ctx))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let arrays: std::collections::BTreeSet<_> = enumerate_states(&u)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|st| st.int_array("a"))
        .collect();
    ensure(arrays.len() == SORT_ARRAYS, format!("{} initial arrays", arrays.len()))?;
    let c = Checker::new(&ctx, &u, ExecConfig::default());
    let start = Instant::now();
    let v = c.check_triple(&s[0], &s[1], &s[2]).map_err(|e| e.to_string())?.verdict;
    let t = start.elapsed();
    ensure(v.is_valid(), format!("triple {}", v.label()))?;
    ensure(t <= SORT_BUDGET, format!("triple took {:?}", t))?;
    let proof = proof_ok(&dir.join("sort.opp"))?;
    Ok(format!(
        "triple VALID over {} arrays in {} ms; derivation {}",
        arrays.len(),
        t.as_millis(),
        proof
    ))
}

fn list_reversal(rep: &CorpusReport) -> Criterion {
    let dir = corpus().join("listrev");
    let proof = proof_ok(&dir.join("listrev.opp"))?;
    let mut ctx = load_program(&dir.join("listrev.opa")).map_err(|e| e.to_string())?;
    let u = load_universe(&dir.join("listrev.opu"), &ctx).map_err(|e| e.to_string())?;
    let post = load_stat(&dir.join("post.ops"), &mut ctx).map_err(|e| e.to_string())?;
    let cond = parse_expr("n[1].p = n[0] && n[2].p = n[1] && n[3].p = n[2]").map_err(|e| e.to_string())?;
    let c = Checker::new(&ctx, &u, ExecConfig::default());
    let j = Judgment::Conj {
        result: post.clone(),
        base: post,
        cond,
    };
    let v = c.check(&j).map_err(|e| e.to_string())?.verdict;
    ensure(v.is_valid(), format!("links check {}", v.label()))?;
    let twin = entry(rep, "listrev-proof-no-last-link")?;
    ensure(twin.got == "FAILED", format!("twin {}", twin.got))?;
    Ok(format!(
        "derivation {}, every post-state has n[j].p = n[j-1], twin FAILED",
        proof
    ))
}

fn bst_insert() -> Criterion {
    let dir = corpus().join("bst");
    let mut ctx = load_program(&dir.join("bst.opa")).map_err(|e| e.to_string())?;
    let u = load_universe(&dir.join("bst.opu"), &ctx).map_err(|e| e.to_string())?;
    let s: Vec<_> = ["cti_fresh.ops", "ct_union.ops", "ct_insert.ops", "cti.ops"]
        .iter()
        .map(|f| load_stat(&dir.join(f), &mut ctx))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let c = Checker::new(&ctx, &u, ExecConfig::default());
    let a = c.check_ord(&s[0], &s[1]).map_err(|e| e.to_string())?.verdict;
    ensure(a.is_valid(), format!("claim (a) {}", a.label()))?;

    let script = load_script(&dir.join("bst.opp")).map_err(|e| e.to_string())?;
    let rec = script
        .steps
        .iter()
        .find(|s| s.rule == Rule::EquivRecursive)
        .ok_or("no EquivRecursive step")?;
    let sub = rec.payload.sub.as_ref().ok_or("no sub-derivation")?;
    let cites = sub.steps.iter().filter(|s| s.rule == Rule::InductiveHypothesis).count();
    ensure(cites == 2, format!("{} hypothesis citations", cites))?;
    let report = check_script_file(&dir.join("bst.opp"), 1).map_err(|e| e.to_string())?;
    ensure(
        report.status == ProofStatus::Proved,
        format!("derivation {}", report.status.label()),
    )?;
    let verified = report
        .steps
        .iter()
        .any(|s| s.id == rec.id && s.status == StepStatus::Verified);
    ensure(verified, "the inductive step is not verified")?;

    let (compared, skipped) = bounded_cross_check(&c, &s[2], &s[3], BST_DEPTH).map_err(|e| e.to_string())?;
    ensure(compared > 0, "cross-check compared no states")?;
    Ok(format!(
        "claim (a) VALID; claim (c) PROVED with {} hypothesis citations; depth-{} cross-check agrees on {} states ({} cut off)",
        cites, BST_DEPTH, compared, skipped
    ))
}

fn negative_controls(rep: &CorpusReport) -> Criterion {
    let neg: Vec<_> = rep.entries.iter().filter(|e| e.is_negative()).collect();
    ensure(!neg.is_empty(), "no negative controls")?;
    for e in &neg {
        ensure(e.got == e.expect, format!("{} got {}", e.name, e.got))?;
        ensure(
            e.replayed == Some(true),
            format!("{}: counterexample not replayed", e.name),
        )?;
    }
    Ok(format!("{} twins refuted, every counterexample replays", neg.len()))
}

fn determinism(first: &CorpusReport) -> Criterion {
    let a = serde_json::to_string_pretty(&first.to_json()).unwrap();
    let again = run_corpus(&corpus(), 4).map_err(|e| e.to_string())?;
    let b = serde_json::to_string_pretty(&again.to_json()).unwrap();
    ensure(a == b, "reports differ between runs")?;
    Ok(format!("two runs (1 and 4 workers), {} bytes, identical", a.len()))
}

#[test]
fn acceptance() {
    let rep = run_corpus(&corpus(), 1).expect("corpus loads");
    let results: Vec<(&str, Criterion)> = vec![
        ("rule soundness", rule_soundness()),
        ("trading biconditional", trading()),
        ("axioms always valid", axioms()),
        ("prefix shrinks post-states", prefix_ordering()),
        ("selection sort", selection_sort()),
        ("list reversal", list_reversal(&rep)),
        ("bst insert", bst_insert()),
        ("negative controls", negative_controls(&rep)),
        ("determinism", determinism(&rep)),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(d) => println!("PASS {} {}: {}", i + 1, name, d),
            Err(d) => {
                failed += 1;
                println!("FAIL {} {}: {}", i + 1, name, d)
            }
        }
    }
    assert_eq!(failed, 0, "{} acceptance criteria failed", failed);
}
