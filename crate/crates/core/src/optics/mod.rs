//! Values, channels and their prisms, and the state-space optics used by the
//! Circus layer.

mod lens;
mod value;

use thiserror::Error;

pub use lens::{lens_indep, lens_override, unrestricted, Expr, Lens, Schema, StateSpace, Subst};
pub use value::{ChanDecl, ChanRegistry, Event, Kind, Prism, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpticsError {
    #[error("syntax error at offset {offset}: {message}")]
    ValueSyntax { offset: usize, message: String },
    #[error("channel {0} is declared twice")]
    DuplicateChannel(String),
    #[error("channel {0} is not declared")]
    UndeclaredChannel(String),
    #[error("field {0} is declared twice")]
    DuplicateField(String),
    #[error("field {0} is not declared")]
    UndeclaredField(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("type mismatch in {context}: expected {expected}, found {found}")]
    KindMismatch {
        context: String,
        expected: Kind,
        found: Value,
    },
    #[error("evaluation error: {0}")]
    Eval(String),
}
