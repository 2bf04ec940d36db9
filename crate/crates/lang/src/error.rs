use std::fmt;

use thiserror::Error;

use crate::ast::Span;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    /// What the parser would have accepted at `span`.
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    match expected {
        [] => String::new(),
        [one] => format!("; expected {one}"),
        many => format!("; expected one of {}", many.join(", ")),
    }
}

impl ParseError {
    pub fn new(span: Span, message: impl Into<String>, expected: Vec<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
            expected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElabErrorKind {
    Undeclared,
    Duplicate,
    Arity,
    TypeMismatch,
    NotIndependent,
    NotEnumerable,
    WrongMode,
    UnguardedRecursion,
    Eval,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct ElabError {
    pub span: Span,
    pub kind: ElabErrorKind,
    pub message: String,
}

impl ElabError {
    pub fn new(span: Span, kind: ElabErrorKind, message: impl Into<String>) -> Self {
        ElabError {
            span,
            kind,
            message: message.into(),
        }
    }
}

/// Any error from turning source text into a process table.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("{} error(s), first: {}", .0.len(), .0[0])]
    Elab(Vec<ElabError>),
}

impl LangError {
    /// One `file:line:col: message` line per error.
    pub fn render(&self, file: &str, src: &str) -> String {
        let line = |span: Span, msg: &dyn fmt::Display| {
            let (l, c) = span.line_col(src);
            format!("{file}:{l}:{c}: {msg}")
        };
        match self {
            LangError::Parse(e) => line(e.span, e),
            LangError::Elab(es) => es.iter().map(|e| line(e.span, e)).collect::<Vec<_>>().join("\n"),
        }
    }
}
