//! Reading program (`.opa`) and universe (`.opu`) files.

use std::path::Path;

use thiserror::Error;

use crate::state::{StateError, Universe};
use crate::syntax::{parse_program, parse_stat, typeck, Program, Stat, SyntaxError};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("{path}: {error}")]
    Syntax { path: String, error: SyntaxError },
    #[error("{path}: {error}")]
    State { path: String, error: StateError },
    #[error(transparent)]
    Script(#[from] crate::kernel::ScriptError),
    #[error("{0}")]
    Missing(String),
}

pub fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|e| LoadError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

/// Parses a program file and typechecks its declarations.
pub fn load_program(path: &Path) -> Result<Program, LoadError> {
    let text = read(path)?;
    let syn = |error| LoadError::Syntax {
        path: path.display().to_string(),
        error,
    };
    let p = parse_program(&text).map_err(syn)?;
    typeck::typecheck_program(&p, None).map_err(syn)?;
    Ok(p)
}

/// Parses a universe file and binds it to the records of `p`.
pub fn load_universe(path: &Path, p: &Program) -> Result<Universe, LoadError> {
    let text = read(path)?;
    let st = |error| LoadError::State {
        path: path.display().to_string(),
        error,
    };
    Universe::parse(&text).map_err(st)?.bind(p).map_err(st)
}

/// A file holding a single statement, possibly preceded by declarations.
/// Declarations are merged into `ctx`.
pub fn load_stat(path: &Path, ctx: &mut Program) -> Result<Stat, LoadError> {
    let text = read(path)?;
    let syn = |error| LoadError::Syntax {
        path: path.display().to_string(),
        error,
    };
    let p = parse_program(&text).map_err(syn)?;
    if p.records.is_empty() && p.procs.is_empty() {
        return match p.body {
            Some(s) => Ok(s),
            None => parse_stat(&text).map_err(syn),
        };
    }
    ctx.merge_decls(&p).map_err(|msg| {
        syn(SyntaxError::Type {
            node: path.display().to_string(),
            msg,
        })
    })?;
    p.body
        .ok_or_else(|| LoadError::Missing(format!("{}: no statement after the declarations", path.display())))
}
