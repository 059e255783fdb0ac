//! Program states, finite universes, enumeration and canonical forms.

pub mod canon;
pub mod enumerate;
pub mod universe;
pub mod value;

use thiserror::Error;

pub use canon::{canonicalize, canonicalize_with};
pub use enumerate::{enumerate_states, universe_size};
pub use universe::{Domain, Universe};
pub use value::{ElemDom, HeapObj, Loc, State, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateError {
    #[error("universe too large: {actual} initial states exceed the cap of {cap}")]
    UniverseTooLarge { actual: u128, cap: u64 },
    #[error("universe: {0}")]
    Universe(String),
}
