//! Loading proof scripts (`.opp`, JSON).
//!
//! ```text
//! { "program": "file.opa", "universe": "file.opu", "fuel": 10000,
//!   "definitions": { "INV": "i := [0:n-1]", "R": {"params": ["e"], "text": "..."} },
//!   "steps": [ { "id": "s1", "rule": "SemanticDischarge", "premises": [],
//!                "payload": {...}, "conclusion": {"ord": ["P", "Q"]} } ],
//!   "goal": "s1", "claim": {"triple": ["A", "P", "B"]} }
//! ```
//!
//! Program and expression texts may use `${NAME}` or `${NAME(arg, ..)}`;
//! inside a definition, `$param` stands for an argument.

use std::collections::BTreeMap;
use std::path::{Path as FsPath, PathBuf};

use serde_json::Value as Json;
use thiserror::Error;

use crate::check::Judgment;
use crate::exec::DEFAULT_FUEL;
use crate::syntax::{parse_expr, parse_stat, Expr, Stat, SyntaxError};

use super::{Payload, Rule, Step};

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("malformed script: {0}")]
    Json(String),
    #[error("{context}: {error}")]
    Parse { context: String, error: SyntaxError },
    #[error("definition error: {0}")]
    Macro(String),
    #[error("step `{step}`: unknown rule `{rule}`")]
    UnknownRule { step: String, rule: String },
    #[error("duplicate step id `{0}`")]
    DuplicateId(String),
    #[error("no goal: {0}")]
    NoGoal(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    pub program: Option<PathBuf>,
    pub universe: Option<PathBuf>,
    pub fuel: u64,
    pub steps: Vec<Step>,
    pub goal: String,
    pub claim: Option<Judgment>,
}

#[derive(Debug, Clone)]
struct Macro {
    params: Vec<String>,
    text: String,
}

struct Loader {
    macros: BTreeMap<String, Macro>,
}

fn jerr<T>(msg: impl Into<String>) -> Result<T, ScriptError> {
    Err(ScriptError::Json(msg.into()))
}

fn split_args(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn is_atom(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Loader {
    fn expand(&self, text: &str, depth: usize) -> Result<String, ScriptError> {
        if depth > 32 {
            return Err(ScriptError::Macro("definitions nest more than 32 levels".into()));
        }
        let mut out = String::new();
        let mut rest = text;
        while let Some(i) = rest.find("${") {
            out.push_str(&rest[..i]);
            let after = &rest[i + 2..];
            // Find the matching `}`, allowing braces inside arguments.
            let mut level = 1;
            let mut end = None;
            for (k, c) in after.char_indices() {
                match c {
                    '{' => level += 1,
                    '}' => {
                        level -= 1;
                        if level == 0 {
                            end = Some(k);
                            break;
                        }
                    }
                    _ => {}
                }
            }
            let end = end.ok_or_else(|| ScriptError::Macro(format!("unterminated `${{` in `{}`", text)))?;
            let inner = after[..end].trim();
            let (name, args) = match inner.find('(') {
                Some(p) if inner.ends_with(')') => (inner[..p].trim(), split_args(&inner[p + 1..inner.len() - 1])),
                _ => (inner, vec![]),
            };
            let m = self
                .macros
                .get(name)
                .ok_or_else(|| ScriptError::Macro(format!("undefined `{}`", name)))?;
            if m.params.len() != args.len() {
                return Err(ScriptError::Macro(format!(
                    "`{}` takes {} arguments, got {}",
                    name,
                    m.params.len(),
                    args.len()
                )));
            }
            let mut body = m.text.clone();
            // Longest parameter names first so `$ab` is not clobbered by `$a`.
            let mut order: Vec<usize> = (0..args.len()).collect();
            order.sort_by_key(|&k| std::cmp::Reverse(m.params[k].len()));
            for k in order {
                let a = self.expand(&args[k], depth + 1)?;
                let a = if is_atom(&a) { a } else { format!("({})", a) };
                body = body.replace(&format!("${}", m.params[k]), &a);
            }
            out.push_str(&self.expand(&body, depth + 1)?);
            rest = &after[end + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }

    fn stat(&self, v: &Json, context: &str) -> Result<Stat, ScriptError> {
        let text = v
            .as_str()
            .ok_or_else(|| ScriptError::Json(format!("{}: expected program text", context)))?;
        let text = self.expand(text, 0)?;
        parse_stat(&text).map_err(|error| ScriptError::Parse {
            context: format!("{} `{}`", context, text),
            error,
        })
    }

    fn expr(&self, v: &Json, context: &str) -> Result<Expr, ScriptError> {
        let text = v
            .as_str()
            .ok_or_else(|| ScriptError::Json(format!("{}: expected expression text", context)))?;
        let text = self.expand(text, 0)?;
        parse_expr(&text).map_err(|error| ScriptError::Parse {
            context: format!("{} `{}`", context, text),
            error,
        })
    }

    fn judgment(&self, v: &Json, context: &str) -> Result<Judgment, ScriptError> {
        let obj = v
            .as_object()
            .filter(|o| o.len() == 1)
            .ok_or_else(|| ScriptError::Json(format!("{}: a judgment is an object with one key", context)))?;
        let (kind, args) = obj.iter().next().expect("one entry");
        let args = args
            .as_array()
            .ok_or_else(|| ScriptError::Json(format!("{}: judgment arguments must be an array", context)))?;
        let arity = match kind.as_str() {
            "triple" | "conj" => 3,
            "ord" | "equiv" => 2,
            other => return jerr(format!("{}: unknown judgment kind `{}`", context, other)),
        };
        if args.len() != arity {
            return jerr(format!("{}: `{}` takes {} arguments", context, kind, arity));
        }
        let p = |i: usize| self.stat(&args[i], context);
        Ok(match kind.as_str() {
            "triple" => Judgment::Triple {
                pre: p(0)?,
                prog: p(1)?,
                post: p(2)?,
            },
            "ord" => Judgment::Ord {
                left: p(0)?,
                right: p(1)?,
            },
            "equiv" => Judgment::Equiv {
                left: p(0)?,
                right: p(1)?,
            },
            _ => Judgment::Conj {
                result: p(0)?,
                base: p(1)?,
                cond: self.expr(&args[2], context)?,
            },
        })
    }

    fn payload(&self, v: Option<&Json>, ctx: &str) -> Result<Payload, ScriptError> {
        let mut pl = Payload::default();
        let Some(v) = v else {
            return Ok(pl);
        };
        let obj = v
            .as_object()
            .ok_or_else(|| ScriptError::Json(format!("{}: payload must be an object", ctx)))?;
        for (k, val) in obj {
            let here = format!("{} payload.{}", ctx, k);
            match k.as_str() {
                "pre" => pl.pre = Some(self.stat(val, &here)?),
                "program" => pl.program = Some(self.stat(val, &here)?),
                "post" => pl.post = Some(self.stat(val, &here)?),
                "prefix" => pl.prefix = Some(self.stat(val, &here)?),
                "value" => pl.value = Some(self.expr(val, &here)?),
                "rewrite" => pl.rewrite = Some(val.as_str().map(String::from).ok_or(ScriptError::Json(here))?),
                "split" => pl.split = Some(uint(val, &here)?),
                "depthBound" => pl.depth_bound = Some(uint(val, &here)?),
                "path" => {
                    let arr = val.as_array().ok_or_else(|| ScriptError::Json(here.clone()))?;
                    pl.path.path = arr.iter().map(|x| uint(x, &here)).collect::<Result<_, _>>()?;
                }
                "span" => {
                    let arr = val
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| ScriptError::Json(here.clone()))?;
                    pl.path.span = Some((uint(&arr[0], &here)?, uint(&arr[1], &here)?));
                }
                "derivation" => {
                    let (steps, goal, claim) = self.body(val, &here)?;
                    pl.sub = Some(Box::new(Script {
                        program: None,
                        universe: None,
                        fuel: DEFAULT_FUEL,
                        steps,
                        goal,
                        claim,
                    }));
                }
                other => return jerr(format!("{}: unknown payload field `{}`", ctx, other)),
            }
        }
        Ok(pl)
    }

    fn step(&self, v: &Json) -> Result<Step, ScriptError> {
        let id = v
            .get("id")
            .and_then(Json::as_str)
            .ok_or_else(|| ScriptError::Json("every step needs a string `id`".into()))?
            .to_string();
        let rule_name = v
            .get("rule")
            .and_then(Json::as_str)
            .ok_or_else(|| ScriptError::Json(format!("step `{}` needs a `rule`", id)))?;
        let rule = Rule::lookup(rule_name).ok_or_else(|| ScriptError::UnknownRule {
            step: id.clone(),
            rule: rule_name.to_string(),
        })?;
        let premises = match v.get("premises") {
            None => vec![],
            Some(Json::Array(a)) => a
                .iter()
                .map(|p| p.as_str().map(String::from))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| ScriptError::Json(format!("step `{}`: premises are step ids", id)))?,
            Some(_) => return jerr(format!("step `{}`: premises must be an array", id)),
        };
        let ctx = format!("step `{}`", id);
        let payload = self.payload(v.get("payload"), &ctx)?;
        let conclusion = match v.get("conclusion") {
            None => None,
            Some(j) => Some(self.judgment(j, &format!("{} conclusion", ctx))?),
        };
        Ok(Step {
            id,
            rule,
            premises,
            payload,
            conclusion,
        })
    }

    fn body(&self, v: &Json, ctx: &str) -> Result<(Vec<Step>, String, Option<Judgment>), ScriptError> {
        let steps_json = v
            .get("steps")
            .and_then(Json::as_array)
            .ok_or_else(|| ScriptError::Json(format!("{}: missing `steps` array", ctx)))?;
        let mut steps = Vec::new();
        for s in steps_json {
            let step = self.step(s)?;
            if steps.iter().any(|t: &Step| t.id == step.id) {
                return Err(ScriptError::DuplicateId(step.id));
            }
            steps.push(step);
        }
        let goal = match v.get("goal").and_then(Json::as_str) {
            Some(g) => g.to_string(),
            None => return Err(ScriptError::NoGoal(format!("{}: missing `goal`", ctx))),
        };
        if !steps.iter().any(|s| s.id == goal) {
            return Err(ScriptError::NoGoal(format!("{}: goal `{}` is not a step", ctx, goal)));
        }
        let claim = match v.get("claim") {
            None => None,
            Some(j) => Some(self.judgment(j, &format!("{} claim", ctx))?),
        };
        Ok((steps, goal, claim))
    }
}

fn uint(v: &Json, ctx: &str) -> Result<usize, ScriptError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| ScriptError::Json(format!("{}: expected a non-negative integer", ctx)))
}

/// Parses a script. Relative file names are resolved against `base`.
pub fn parse_script(text: &str, base: &FsPath) -> Result<Script, ScriptError> {
    let v: Json = serde_json::from_str(text).map_err(|e| ScriptError::Json(e.to_string()))?;
    let mut loader = Loader {
        macros: BTreeMap::new(),
    };
    if let Some(defs) = v.get("definitions") {
        let defs = defs
            .as_object()
            .ok_or_else(|| ScriptError::Json("`definitions` must be an object".into()))?;
        for (name, d) in defs {
            let m = match d {
                Json::String(t) => Macro {
                    params: vec![],
                    text: t.clone(),
                },
                Json::Object(o) => Macro {
                    params: o
                        .get("params")
                        .and_then(Json::as_array)
                        .map(|a| a.iter().filter_map(|p| p.as_str().map(String::from)).collect())
                        .unwrap_or_default(),
                    text: o
                        .get("text")
                        .and_then(Json::as_str)
                        .ok_or_else(|| ScriptError::Macro(format!("`{}` needs a `text`", name)))?
                        .to_string(),
                },
                _ => return Err(ScriptError::Macro(format!("`{}` must be a string or object", name))),
            };
            loader.macros.insert(name.clone(), m);
        }
    }
    let file = |k: &str| v.get(k).and_then(Json::as_str).map(|f| base.join(f));
    let fuel = match v.get("fuel") {
        None => DEFAULT_FUEL,
        Some(f) => f
            .as_u64()
            .ok_or_else(|| ScriptError::Json("`fuel` must be a non-negative integer".into()))?,
    };
    let (steps, goal, claim) = loader.body(&v, "script")?;
    Ok(Script {
        program: file("program"),
        universe: file("universe"),
        fuel,
        steps,
        goal,
        claim,
    })
}

pub fn load_script(path: &FsPath) -> Result<Script, ScriptError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScriptError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_script(&text, path.parent().unwrap_or(FsPath::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::pretty;

    #[test]
    fn macros_expand_with_arguments() {
        let src = r#"{
            "definitions": {"R": {"params": ["e"], "text": "x := $e"}, "A": "${R(y+1)}; skip"},
            "steps": [{"id": "a", "rule": "EmptyProgram", "payload": {"pre": "${A}"}}],
            "goal": "a"
        }"#;
        let s = parse_script(src, FsPath::new(".")).unwrap();
        let pre = s.steps[0].payload.pre.as_ref().unwrap();
        assert_eq!(pretty::stat(pre), "x := y+1; skip");
    }

    #[test]
    fn missing_goal_is_a_load_error() {
        let src = r#"{"steps": []}"#;
        assert!(matches!(
            parse_script(src, FsPath::new(".")),
            Err(ScriptError::NoGoal(_))
        ));
        let src = r#"{"steps": [], "goal": "x"}"#;
        assert!(matches!(
            parse_script(src, FsPath::new(".")),
            Err(ScriptError::NoGoal(_))
        ));
    }

    #[test]
    fn unknown_rule() {
        let src = r#"{"steps": [{"id": "a", "rule": "Magic"}], "goal": "a"}"#;
        assert!(matches!(
            parse_script(src, FsPath::new(".")),
            Err(ScriptError::UnknownRule { .. })
        ));
    }
}
