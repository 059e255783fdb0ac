//! Running the example corpus described by a `manifest.json`.
//!
//! ```text
//! { "entries": [
//!   { "name": "sort-triple", "kind": "triple", "program": "sort.opa",
//!     "universe": "sort.opu", "files": ["pre.ops", "sort.ops", "post.ops"],
//!     "expect": "VALID" },
//!   { "name": "sort-proof", "kind": "prove", "script": "sort.opp", "expect": "PROVED" } ] }
//! ```
//!
//! Kinds are `triple`, `ord`, `equiv`, `conj` (with a `cond` expression) and
//! `prove`. An entry expecting INVALID or FAILED passes only if the refutation
//! comes with a counterexample that replays.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value as Json};

use crate::check::{Checker, Judgment};
use crate::exec::{ExecConfig, DEFAULT_FUEL};
use crate::files::{self, LoadError};
use crate::kernel::LoadedScript;
use crate::syntax::{parse_expr, typeck, Program};
use crate::TOOL_VERSION;

#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub name: String,
    pub kind: String,
    pub expect: String,
    #[serde(default)]
    pub program: Option<String>,
    #[serde(default)]
    pub universe: Option<String>,
    #[serde(default)]
    pub files: Vec<String>,
    #[serde(default)]
    pub cond: Option<String>,
    #[serde(default)]
    pub script: Option<String>,
    #[serde(default)]
    pub fuel: Option<u64>,
    #[serde(default)]
    pub description: Option<String>,
}

#[derive(Debug, Clone)]
pub struct EntryResult {
    pub name: String,
    pub kind: String,
    pub expect: String,
    pub got: String,
    /// Whether a counterexample was produced and replayed, for refutations.
    pub replayed: Option<bool>,
    pub report: Json,
}

impl EntryResult {
    pub fn ok(&self) -> bool {
        self.got == self.expect && self.replayed != Some(false) && (!self.is_negative() || self.replayed == Some(true))
    }

    pub fn is_negative(&self) -> bool {
        matches!(self.expect.as_str(), "INVALID" | "FAILED")
    }
}

#[derive(Debug, Clone)]
pub struct CorpusReport {
    pub entries: Vec<EntryResult>,
}

impl CorpusReport {
    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(EntryResult::ok)
    }

    pub fn get(&self, name: &str) -> Option<&EntryResult> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn to_json(&self) -> Json {
        let passed = self.entries.iter().filter(|e| e.ok()).count();
        json!({
            "entries": self.entries.iter().map(|e| json!({
                "name": e.name,
                "kind": e.kind,
                "expect": e.expect,
                "got": e.got,
                "ok": e.ok(),
                "replayed": e.replayed,
                "report": e.report,
            })).collect::<Vec<_>>(),
            "summary": { "total": self.entries.len(), "passed": passed },
            "toolVersion": TOOL_VERSION,
        })
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&format!(
                "{} {:<40} expect {:<10} got {}\n",
                if e.ok() { "ok  " } else { "FAIL" },
                e.name,
                e.expect,
                e.got
            ));
        }
        let passed = self.entries.iter().filter(|e| e.ok()).count();
        s.push_str(&format!("{}/{} corpus entries as expected", passed, self.entries.len()));
        s
    }
}

pub fn load_manifest(dir: &Path) -> Result<Manifest, LoadError> {
    let path = dir.join("manifest.json");
    let text = files::read(&path)?;
    serde_json::from_str(&text).map_err(|e| LoadError::Missing(format!("{}: {}", path.display(), e)))
}

fn need<'e>(x: &'e Option<String>, what: &str, e: &Entry) -> Result<&'e String, LoadError> {
    x.as_ref()
        .ok_or_else(|| LoadError::Missing(format!("corpus entry `{}` needs `{}`", e.name, what)))
}

fn run_judgment(dir: &Path, e: &Entry, jobs: usize) -> Result<EntryResult, LoadError> {
    let mut ctx = match &e.program {
        Some(p) => files::load_program(&dir.join(p))?,
        None => Program::default(),
    };
    let arity = if e.kind == "triple" { 3 } else { 2 };
    if e.files.len() != arity {
        return Err(LoadError::Missing(format!(
            "corpus entry `{}` needs {} files",
            e.name, arity
        )));
    }
    let stats = e
        .files
        .iter()
        .map(|f| files::load_stat(&dir.join(f), &mut ctx))
        .collect::<Result<Vec<_>, _>>()?;
    typeck::typecheck_program(&ctx, None).map_err(|error| LoadError::Syntax {
        path: e.name.clone(),
        error,
    })?;
    let u = files::load_universe(&dir.join(need(&e.universe, "universe", e)?), &ctx)?;
    let s = |i: usize| stats[i].clone();
    let j = match e.kind.as_str() {
        "triple" => Judgment::Triple {
            pre: s(0),
            prog: s(1),
            post: s(2),
        },
        "ord" => Judgment::Ord {
            left: s(0),
            right: s(1),
        },
        "equiv" => Judgment::Equiv {
            left: s(0),
            right: s(1),
        },
        "conj" => Judgment::Conj {
            result: s(0),
            base: s(1),
            cond: parse_expr(need(&e.cond, "cond", e)?).map_err(|error| LoadError::Syntax {
                path: e.name.clone(),
                error,
            })?,
        },
        k => {
            return Err(LoadError::Missing(format!(
                "corpus entry `{}`: unknown kind `{}`",
                e.name, k
            )))
        }
    };
    let cfg = ExecConfig {
        fuel: e.fuel.unwrap_or(DEFAULT_FUEL),
        jobs,
        ..Default::default()
    };
    let checker = Checker::new(&ctx, &u, cfg);
    let out = crate::cli::judgment_report(&checker, &j)?;
    let replayed = out
        .report
        .get("counterexample")
        .and_then(|c| c.get("replayed"))
        .and_then(Json::as_bool);
    Ok(EntryResult {
        name: e.name.clone(),
        kind: e.kind.clone(),
        expect: e.expect.clone(),
        got: out.report["verdict"].as_str().unwrap_or("?").to_string(),
        replayed,
        report: out.report,
    })
}

fn run_prove(dir: &Path, e: &Entry, jobs: usize) -> Result<EntryResult, LoadError> {
    let mut loaded = LoadedScript::load(&dir.join(need(&e.script, "script", e)?), jobs)?;
    if let Some(f) = e.fuel {
        loaded.cfg.fuel = f;
    }
    let r = loaded.check();
    let checker = Checker::new(&loaded.program, &loaded.universe, loaded.cfg);
    // The first refuted step whose witness replays against its judgment.
    let replayed = r
        .steps
        .iter()
        .find_map(|s| Some((s.refutes.as_ref()?, s.counterexample.as_ref()?)))
        .map(|(j, c)| checker.replay(j, c).unwrap_or(false));
    Ok(EntryResult {
        name: e.name.clone(),
        kind: e.kind.clone(),
        expect: e.expect.clone(),
        got: r.status.label().to_string(),
        replayed,
        report: r.to_json(),
    })
}

pub fn run_entry(dir: &Path, e: &Entry, jobs: usize) -> Result<EntryResult, LoadError> {
    match e.kind.as_str() {
        "prove" => run_prove(dir, e, jobs),
        _ => run_judgment(dir, e, jobs),
    }
}

pub fn run_corpus(dir: &Path, jobs: usize) -> Result<CorpusReport, LoadError> {
    let m = load_manifest(dir)?;
    let entries = m
        .entries
        .iter()
        .map(|e| run_entry(dir, e, jobs))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CorpusReport { entries })
}

/// Location of the bundled corpus in the source tree.
pub fn bundled_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}
