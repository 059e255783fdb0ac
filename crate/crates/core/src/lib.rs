//! Checker for operational annotations.
//!
//! Programs in a small imperative language are executed exhaustively over a
//! finite state universe. Judgments relating pre-programs, programs and
//! post-programs are decided by comparing the resulting sets of final states
//! or behaviors, and multi-step derivations are replayed by a proof kernel.

pub mod check;
pub mod cli;
pub mod corpus;
pub mod exec;
pub mod files;
pub mod kernel;
pub mod state;
pub mod syntax;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
