//! Abstract syntax of process definitions.
//!
//! Child processes are reference counted so that the elaborator can hand
//! subtrees to suspended computations without copying them.

use std::fmt;
use std::sync::Arc;

use itree_core::optics::{Kind, Value};

/// A byte range of the source text.
///
/// Spans never take part in equality, so a tree reparsed from its pretty
/// printing compares equal to the original.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    /// 1-based line and column of the start of the span.
    pub fn line_col(&self, src: &str) -> (usize, usize) {
        let before = &src[..self.start.min(src.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ident {
    pub name: Arc<str>,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<Arc<str>>, span: Span) -> Ident {
        Ident {
            name: name.into(),
            span,
        }
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeExpr {
    pub kind: Kind,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Concat,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Concat => "++",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    /// Unit, booleans, non-negative integers and strings.
    Lit(Value),
    Var(Arc<str>),
    List(Vec<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    /// A built-in function such as `len` or `hd`.
    Call(Ident, Vec<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

/// A finite set of values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetExpr {
    pub kind: SetKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetKind {
    /// `{lo..hi}`, both ends included.
    Range(Expr, Expr),
    Enum(Vec<Expr>),
    Named(Ident),
}

/// `c.e₁.e₂…`: a channel with its leading payload fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventExpr {
    pub chan: Ident,
    pub fields: Vec<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventSetExpr {
    pub kind: EventSetKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventSetKind {
    /// `{| c, d |}`: every event on the channels.
    Channels(Vec<Ident>),
    /// `{ c.1, d }`.
    Events(Vec<EventExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comm {
    /// `c.e -> P`.
    Sync,
    /// `c!e -> P`.
    Out(Expr),
    /// `c?x:A -> P`; without `A` the payload type must be finite.
    In { var: Ident, domain: Option<SetExpr> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub binder: Option<Ident>,
    pub proc: Arc<Proc>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proc {
    pub kind: ProcKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProcKind {
    Skip,
    Stop,
    Div,
    Return(Expr),
    /// A named process applied to arguments.
    Call(Ident, Vec<Expr>),
    Prefix {
        event: EventExpr,
        comm: Comm,
        body: Arc<Proc>,
    },
    /// `inp(c, A)`: returns the value received.
    Inp(Ident, SetExpr),
    /// `outp(c, e)`.
    Outp(Ident, Expr),
    /// `guard(b)`.
    GuardStmt(Expr),
    /// `b & P`.
    Guarded(Expr, Arc<Proc>),
    Choice(Arc<Proc>, Arc<Proc>),
    Par(Arc<Proc>, EventSetExpr, Arc<Proc>),
    Interleave(Arc<Proc>, Arc<Proc>),
    /// `P [| ns₁ | E | ns₂ |] Q`.
    CircusPar {
        left: Arc<Proc>,
        ns1: Vec<Ident>,
        sync: EventSetExpr,
        ns2: Vec<Ident>,
        right: Arc<Proc>,
    },
    Hide(Arc<Proc>, EventSetExpr),
    Seq(Arc<Proc>, Arc<Proc>),
    /// `x, y := e, f`.
    Assign(Vec<Ident>, Vec<Expr>),
    Do(Vec<Stmt>),
    /// `loop P`.
    Loop(Arc<Proc>),
    /// `loop (\x -> P) e`.
    LoopFrom {
        var: Ident,
        body: Arc<Proc>,
        init: Expr,
    },
    /// `while b do P`.
    While(Expr, Arc<Proc>),
    /// `||| i : A @ P`.
    RepInterleave {
        var: Ident,
        set: SetExpr,
        body: Arc<Proc>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: Ident,
    pub ty: TypeExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    pub name: Ident,
    pub ty: TypeExpr,
    pub init: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProcBody {
    Csp(Arc<Proc>),
    /// A state-based process: fields, then the main action.
    Circus {
        fields: Vec<Field>,
        action: Arc<Proc>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcDecl {
    pub name: Ident,
    pub params: Vec<Param>,
    pub body: ProcBody,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Channel { names: Vec<Ident>, ty: Option<TypeExpr> },
    Const { name: Ident, value: Expr },
    Set { name: Ident, value: SetExpr },
    Process(Arc<ProcDecl>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<Decl>,
}

impl Program {
    pub fn processes(&self) -> impl Iterator<Item = &Arc<ProcDecl>> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Process(p) => Some(p),
            _ => None,
        })
    }
}
