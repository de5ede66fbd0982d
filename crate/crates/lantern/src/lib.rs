//! Exact tools for planar open books: lantern-relation factorization of planar mapping
//! classes checked by a free-group oracle, model surgery diagrams at linking-matrix level,
//! replayable L-space certificates, black-graph determinants and the d₃ obstruction rules.

#![allow(clippy::needless_range_loop)]

pub mod bigjson;
pub mod contact;
pub mod error;
pub mod free_group;
pub mod graph;
pub mod kirby;
pub mod matrix;
pub mod oracle;
pub mod parse;
pub mod rewrite;
pub mod words;

pub use error::{Error, Result};
