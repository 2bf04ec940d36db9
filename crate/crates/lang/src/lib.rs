//! A small process language for interaction trees: plain CSP processes and
//! state-based Circus processes, parsed, checked and elaborated into trees.

pub mod ast;
pub mod check;
pub mod corpus;
pub mod elab;
pub mod error;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use elab::{default_value, load, Program};
pub use error::{ElabError, ElabErrorKind, LangError, ParseError};
