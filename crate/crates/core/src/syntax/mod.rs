//! Abstract syntax, concrete syntax, and static checks.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod subst;
pub mod typeck;
pub mod vars;

use thiserror::Error;

pub use ast::*;
pub use lexer::Pos;
pub use parser::{parse_expr, parse_program, parse_stat};
pub use pretty::pretty_print;
pub use vars::{free_vars, stat_vars, write_vars, VarSets};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{pos}: parse error: expected {}, found {found}", expected.join(" or "))]
    Parse {
        pos: Pos,
        expected: Vec<String>,
        found: String,
    },
    #[error("{pos}: {msg}")]
    Lex { pos: Pos, msg: String },
    #[error("type error in `{node}`: {msg}")]
    Type { node: String, msg: String },
}
