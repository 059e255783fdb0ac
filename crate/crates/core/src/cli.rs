//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value as Json};

use crate::check::{Checker, Judgment, Verdict};
use crate::exec::{self, ExecConfig, DEFAULT_FUEL};
use crate::files::{self, LoadError};
use crate::kernel::{LoadedScript, ProofStatus};
use crate::state::Universe;
use crate::syntax::{parse_expr, typeck, Program, Stat};
use crate::{corpus, TOOL_VERSION};

#[derive(Debug, Parser)]
#[command(
    name = "optri",
    version,
    about = "Check operational annotations of imperative programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Universe file (.opu) bounding the initial states.
    #[arg(long, global = true)]
    pub universe: Option<PathBuf>,
    /// Step budget per execution path.
    #[arg(long, global = true)]
    pub fuel: Option<u64>,
    /// Print the JSON report on standard output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads (falls back to OPTRI_JOBS).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Program file whose records and procedures the statement files may use.
    #[arg(long, global = true)]
    pub program: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and typecheck a program.
    Check { file: PathBuf },
    /// Print the post-states of a program's body.
    Post { file: PathBuf },
    /// Check {pre} prog {post}.
    Triple { pre: PathBuf, prog: PathBuf, post: PathBuf },
    /// Check left <= right.
    Ord { left: PathBuf, right: PathBuf },
    /// Check left == right.
    Equiv { left: PathBuf, right: PathBuf },
    /// Check result =. (base, cond); COND is an expression or a file holding one.
    Conj {
        result: PathBuf,
        base: PathBuf,
        cond: String,
    },
    /// Check a derivation script.
    Prove { script: PathBuf },
    /// Run every fixture listed in DIR/manifest.json.
    Corpus {
        #[arg(default_value = "corpus")]
        dir: PathBuf,
    },
}

/// Process exit codes.
pub mod code {
    pub const OK: i32 = 0;
    pub const REFUTED: i32 = 1;
    pub const UNKNOWN: i32 = 2;
    pub const USAGE: i32 = 3;
}

#[derive(Debug)]
pub struct Output {
    pub code: i32,
    pub report: Json,
    pub summary: String,
}

pub fn verdict_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Valid => code::OK,
        Verdict::Invalid(_) => code::REFUTED,
        Verdict::Unknown(_) => code::UNKNOWN,
    }
}

pub fn proof_code(s: ProofStatus) -> i32 {
    match s {
        ProofStatus::Proved | ProofStatus::ProvedWithAxioms => code::OK,
        ProofStatus::Failed => code::REFUTED,
    }
}

impl Cli {
    pub fn jobs(&self) -> usize {
        self.jobs
            .or_else(|| std::env::var("OPTRI_JOBS").ok().and_then(|v| v.parse().ok()))
            .unwrap_or(1)
            .max(1)
    }

    fn cfg(&self) -> ExecConfig {
        ExecConfig {
            fuel: self.fuel.unwrap_or(DEFAULT_FUEL),
            jobs: self.jobs(),
            ..Default::default()
        }
    }

    fn universe(&self, p: &Program) -> Result<Universe, LoadError> {
        let path = self
            .universe
            .as_ref()
            .ok_or_else(|| LoadError::Missing("this command needs --universe".into()))?;
        files::load_universe(path, p)
    }

    fn context(&self) -> Result<Program, LoadError> {
        match &self.program {
            Some(p) => files::load_program(p),
            None => Ok(Program::default()),
        }
    }
}

fn load_stats(ctx: &mut Program, paths: &[&Path]) -> Result<Vec<Stat>, LoadError> {
    let stats = paths
        .iter()
        .map(|p| files::load_stat(p, ctx))
        .collect::<Result<Vec<_>, _>>()?;
    typeck::typecheck_program(ctx, None).map_err(|error| LoadError::Syntax {
        path: "merged declarations".into(),
        error,
    })?;
    Ok(stats)
}

fn load_cond(arg: &str) -> Result<crate::syntax::Expr, LoadError> {
    let text = if Path::new(arg).is_file() {
        files::read(Path::new(arg))?
    } else {
        arg.to_string()
    };
    parse_expr(text.trim()).map_err(|error| LoadError::Syntax {
        path: arg.to_string(),
        error,
    })
}

/// Checks a judgment and builds the report, replaying any counterexample.
pub fn judgment_report(checker: &Checker, j: &Judgment) -> Result<Output, LoadError> {
    let r = checker.check(j).map_err(|e| LoadError::Missing(e.to_string()))?;
    let mut report = r.to_json();
    report["judgment"] = json!(j.to_string());
    if let Some(c) = r.verdict.counterexample() {
        let ok = checker.replay(j, c).unwrap_or(false);
        report["counterexample"]["replayed"] = json!(ok);
    }
    report["toolVersion"] = json!(TOOL_VERSION);
    report["universeHash"] = json!(checker.universe.hash());
    let mut summary = format!("{}: {}", r.verdict.label(), j);
    match &r.verdict {
        Verdict::Invalid(c) => {
            summary.push_str(&format!("\n  {}\n  from {}\n  reaches {}", c.note, c.initial, c.state))
        }
        Verdict::Unknown(why) => summary.push_str(&format!("\n  {}", why)),
        Verdict::Valid => {}
    }
    Ok(Output {
        code: verdict_code(&r.verdict),
        report,
        summary,
    })
}

pub fn execute(cli: &Cli) -> Result<Output, LoadError> {
    match &cli.command {
        Command::Check { file } => {
            let p = files::load_program(file)?;
            let report = json!({
                "status": "OK",
                "records": p.records.len(),
                "procedures": p.procs.len(),
                "hasBody": p.body.is_some(),
                "toolVersion": TOOL_VERSION,
            });
            Ok(Output {
                code: code::OK,
                report,
                summary: format!("{}: ok", file.display()),
            })
        }
        Command::Post { file } => {
            let p = files::load_program(file)?;
            let body = p
                .body
                .clone()
                .ok_or_else(|| LoadError::Missing(format!("{}: no statement to run", file.display())))?;
            let u = cli.universe(&p)?;
            let checker = Checker::new(&p, &u, cli.cfg());
            checker
                .typecheck(&body)
                .map_err(|e| LoadError::Missing(e.to_string()))?;
            let ps = exec::poststates(&p, &u, &body, cli.cfg()).map_err(|error| LoadError::State {
                path: file.display().to_string(),
                error,
            })?;
            let mut report = json!({
                "postStates": ps.states.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
                "flagged": ps.flagged(),
                "statistics": { "statesEnumerated": ps.states_enumerated, "maxFuelUsed": ps.max_fuel_used },
                "toolVersion": TOOL_VERSION,
                "universeHash": u.hash(),
            });
            let mut summary = format!(
                "{} post-states from {} initial states",
                ps.states.len(),
                ps.states_enumerated
            );
            if let Some(i) = &ps.first_incident {
                report["incident"] = json!({ "initial": i.initial.to_json(), "outcome": i.outcome.to_string() });
                summary.push_str(&format!("\n  flagged: {} from {}", i.outcome, i.initial));
            }
            Ok(Output {
                code: if ps.flagged() { code::UNKNOWN } else { code::OK },
                report,
                summary,
            })
        }
        Command::Triple { pre, prog, post } => {
            let mut ctx = cli.context()?;
            let s = load_stats(&mut ctx, &[pre, prog, post])?;
            let u = cli.universe(&ctx)?;
            let j = Judgment::Triple {
                pre: s[0].clone(),
                prog: s[1].clone(),
                post: s[2].clone(),
            };
            judgment_report(&Checker::new(&ctx, &u, cli.cfg()), &j)
        }
        Command::Ord { left, right } | Command::Equiv { left, right } => {
            let mut ctx = cli.context()?;
            let s = load_stats(&mut ctx, &[left, right])?;
            let u = cli.universe(&ctx)?;
            let (left, right) = (s[0].clone(), s[1].clone());
            let j = match cli.command {
                Command::Ord { .. } => Judgment::Ord { left, right },
                _ => Judgment::Equiv { left, right },
            };
            judgment_report(&Checker::new(&ctx, &u, cli.cfg()), &j)
        }
        Command::Conj { result, base, cond } => {
            let mut ctx = cli.context()?;
            let s = load_stats(&mut ctx, &[result, base])?;
            let u = cli.universe(&ctx)?;
            let j = Judgment::Conj {
                result: s[0].clone(),
                base: s[1].clone(),
                cond: load_cond(cond)?,
            };
            judgment_report(&Checker::new(&ctx, &u, cli.cfg()), &j)
        }
        Command::Prove { script } => {
            let mut loaded = LoadedScript::load(script, cli.jobs())?;
            if let Some(f) = cli.fuel {
                loaded.cfg.fuel = f;
            }
            let r = loaded.check();
            let mut summary = format!("{}: goal `{}`", r.status.label(), r.goal);
            if let (Some(id), Some(why)) = (&r.failed_step, &r.reason) {
                summary.push_str(&format!("\n  step `{}`: {}", id, why));
            }
            for a in &r.axioms {
                summary.push_str(&format!("\n  axiom: {}", a));
            }
            Ok(Output {
                code: proof_code(r.status),
                report: r.to_json(),
                summary,
            })
        }
        Command::Corpus { dir } => {
            let r = corpus::run_corpus(dir, cli.jobs())?;
            Ok(Output {
                code: if r.all_ok() { code::OK } else { code::REFUTED },
                summary: r.summary(),
                report: r.to_json(),
            })
        }
    }
}

/// Runs the CLI on `args` and returns the exit code.
pub fn main_with_args(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => code::OK,
                _ => code::USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            // A closed pipe on either stream is not worth a panic.
            let mut stdout = std::io::stdout().lock();
            if cli.json {
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&out.report).expect("json"));
                let _ = writeln!(std::io::stderr(), "{}", out.summary);
            } else {
                let _ = writeln!(stdout, "{}", out.summary);
            }
            out.code
        }
        Err(e) => {
            eprintln!("error: {}", e);
            code::USAGE
        }
    }
}
