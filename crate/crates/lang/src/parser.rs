//! Recursive-descent parser. The grammar is deterministic; the only lookahead
//! beyond one token is at the start of a prefix-level term, where an
//! expression followed by `&` is a guard and anything else is a process.

use std::sync::Arc;

use itree_core::optics::{Kind, Value};

use crate::ast::*;
use crate::error::ParseError;
use crate::lexer::{lex, Tok};

type PResult<T> = Result<T, ParseError>;

pub fn parse(src: &str) -> PResult<Program> {
    let mut p = Parser::new(src)?;
    let mut decls = Vec::new();
    while *p.peek() != Tok::Eof {
        decls.push(p.decl()?);
    }
    Ok(Program { decls })
}

/// Parses a single process expression.
pub fn parse_proc(src: &str) -> PResult<Proc> {
    let mut p = Parser::new(src)?;
    let proc = p.proc(false)?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(Arc::unwrap_or_clone(proc))
}

pub fn parse_expr(src: &str) -> PResult<Expr> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(e)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

fn node(kind: ProcKind, span: Span) -> Arc<Proc> {
    Arc::new(Proc { kind, span })
}

impl Parser {
    fn new(src: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        ParseError::new(
            self.span(),
            format!("unexpected {}", self.peek()),
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<Span> {
        if *self.peek() == t {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&[what]))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().1;
                Ok(Ident::new(name, span))
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    fn sep_by<T>(&mut self, close: Tok, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if *self.peek() == close {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    // Declarations

    fn decl(&mut self) -> PResult<Decl> {
        match self.peek() {
            Tok::Channel => {
                self.bump();
                let mut names = vec![self.ident("a channel name")?];
                while self.eat(&Tok::Comma) {
                    names.push(self.ident("a channel name")?);
                }
                let ty = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
                Ok(Decl::Channel { names, ty })
            }
            Tok::Const => {
                self.bump();
                let name = self.ident("a constant name")?;
                self.expect(Tok::Eq, "`=`")?;
                let value = self.expr()?;
                Ok(Decl::Const { name, value })
            }
            Tok::Set => {
                self.bump();
                let name = self.ident("a set name")?;
                self.expect(Tok::Eq, "`=`")?;
                let value = self.set_expr()?;
                Ok(Decl::Set { name, value })
            }
            Tok::Process => self.process_decl(),
            _ => Err(self.unexpected(&["`channel`", "`const`", "`set`", "`process`"])),
        }
    }

    fn process_decl(&mut self) -> PResult<Decl> {
        let start = self.bump().1;
        let name = self.ident("a process name")?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) {
            params = self.sep_by(Tok::RParen, |p| {
                let name = p.ident("a parameter name")?;
                p.expect(Tok::Colon, "`:`")?;
                Ok(Param { name, ty: p.ty()? })
            })?;
            self.expect(Tok::RParen, "`)`")?;
        }
        self.expect(Tok::Eq, "`=`")?;
        let body = if self.eat(&Tok::State) {
            let mut fields = Vec::new();
            loop {
                let name = self.ident("a state variable")?;
                self.expect(Tok::Colon, "`:`")?;
                let ty = self.ty()?;
                let init = if self.eat(&Tok::Eq) { Some(self.expr()?) } else { None };
                fields.push(Field { name, ty, init });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::Begin, "`begin`")?;
            let action = self.proc(false)?;
            self.expect(Tok::End, "`end`")?;
            ProcBody::Circus { fields, action }
        } else {
            ProcBody::Csp(self.proc(false)?)
        };
        let span = start.to(self.prev_span());
        Ok(Decl::Process(Arc::new(ProcDecl {
            name,
            params,
            body,
            span,
        })))
    }

    fn ty(&mut self) -> PResult<TypeExpr> {
        let start = self.span();
        let kind = match self.bump().0 {
            Tok::TInt => Kind::Int,
            Tok::TBool => Kind::Bool,
            Tok::TStr => Kind::Str,
            Tok::TUnit => Kind::Unit,
            Tok::LBracket => {
                let inner = self.ty()?;
                self.expect(Tok::RBracket, "`]`")?;
                Kind::list(inner.kind)
            }
            Tok::LParen => {
                let a = self.ty()?;
                self.expect(Tok::Comma, "`,`")?;
                let b = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Kind::pair(a.kind, b.kind)
            }
            Tok::LBrace => {
                let tags = self.sep_by(Tok::RBrace, |p| p.ident("an enumeration tag"))?;
                self.expect(Tok::RBrace, "`}`")?;
                Kind::Enum(tags.into_iter().map(|t| t.name.to_string()).collect())
            }
            _ => {
                self.pos -= 1;
                return Err(self.unexpected(&["a type"]));
            }
        };
        Ok(TypeExpr {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    // Processes, loosest first

    fn proc(&mut self, no_seq: bool) -> PResult<Arc<Proc>> {
        let mut p = self.par(no_seq)?;
        while self.eat(&Tok::Backslash) {
            let es = self.event_set()?;
            let span = p.span.to(es.span);
            p = node(ProcKind::Hide(p, es), span);
        }
        Ok(p)
    }

    fn par(&mut self, no_seq: bool) -> PResult<Arc<Proc>> {
        let mut p = self.choice(no_seq)?;
        loop {
            if self.eat(&Tok::Inter) {
                let q = self.choice(no_seq)?;
                let span = p.span.to(q.span);
                p = node(ProcKind::Interleave(p, q), span);
            } else if *self.peek() == Tok::LPar {
                self.bump();
                let first = self.event_set()?;
                if self.eat(&Tok::RPar) {
                    let q = self.choice(no_seq)?;
                    let span = p.span.to(q.span);
                    p = node(ProcKind::Par(p, first, q), span);
                } else {
                    self.expect(Tok::Bar, "`|]` or `|`")?;
                    let ns1 = name_set(first)?;
                    let sync = self.event_set()?;
                    self.expect(Tok::Bar, "`|`")?;
                    let ns2 = name_set(self.event_set()?)?;
                    self.expect(Tok::RPar, "`|]`")?;
                    let q = self.choice(no_seq)?;
                    let span = p.span.to(q.span);
                    p = node(
                        ProcKind::CircusPar {
                            left: p,
                            ns1,
                            sync,
                            ns2,
                            right: q,
                        },
                        span,
                    );
                }
            } else {
                return Ok(p);
            }
        }
    }

    fn choice(&mut self, no_seq: bool) -> PResult<Arc<Proc>> {
        let mut p = self.seq(no_seq)?;
        while self.eat(&Tok::Box) {
            let q = self.seq(no_seq)?;
            let span = p.span.to(q.span);
            p = node(ProcKind::Choice(p, q), span);
        }
        Ok(p)
    }

    fn seq(&mut self, no_seq: bool) -> PResult<Arc<Proc>> {
        let mut p = self.prefixed(no_seq)?;
        while !no_seq && self.eat(&Tok::Semi) {
            let q = self.prefixed(no_seq)?;
            let span = p.span.to(q.span);
            p = node(ProcKind::Seq(p, q), span);
        }
        Ok(p)
    }

    /// Prefixes, guards and replicated interleaving; their bodies extend as
    /// far as another prefix-level term.
    fn prefixed(&mut self, no_seq: bool) -> PResult<Arc<Proc>> {
        let start = self.span();
        if self.eat(&Tok::Inter) {
            let var = self.ident("an index variable")?;
            self.expect(Tok::Colon, "`:`")?;
            let set = self.set_expr()?;
            self.expect(Tok::At, "`@`")?;
            let body = self.prefixed(no_seq)?;
            let span = start.to(body.span);
            return Ok(node(ProcKind::RepInterleave { var, set, body }, span));
        }
        if matches!(self.peek(), Tok::Ident(_))
            && matches!(self.peek_at(1), Tok::Dot | Tok::Query | Tok::Bang | Tok::Arrow)
        {
            return self.event_prefix(no_seq);
        }
        let save = self.pos;
        if let Ok(cond) = self.expr() {
            if self.eat(&Tok::Amp) {
                let body = self.prefixed(no_seq)?;
                let span = start.to(body.span);
                return Ok(node(ProcKind::Guarded(cond, body), span));
            }
        }
        self.pos = save;
        self.primary()
    }

    fn event_prefix(&mut self, no_seq: bool) -> PResult<Arc<Proc>> {
        let chan = self.ident("a channel name")?;
        let mut fields = Vec::new();
        while self.eat(&Tok::Dot) {
            fields.push(self.atom()?);
        }
        let event = EventExpr {
            span: chan.span.to(self.prev_span()),
            chan,
            fields,
        };
        let comm = if self.eat(&Tok::Query) {
            let var = self.ident("an input variable")?;
            let domain = if self.eat(&Tok::Colon) {
                Some(self.set_expr()?)
            } else {
                None
            };
            Comm::In { var, domain }
        } else if self.eat(&Tok::Bang) {
            Comm::Out(self.atom()?)
        } else {
            Comm::Sync
        };
        self.expect(Tok::Arrow, "`->`")?;
        let body = self.prefixed(no_seq)?;
        let span = event.span.to(body.span);
        Ok(node(ProcKind::Prefix { event, comm, body }, span))
    }

    fn primary(&mut self) -> PResult<Arc<Proc>> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Skip => {
                self.bump();
                ProcKind::Skip
            }
            Tok::Stop => {
                self.bump();
                ProcKind::Stop
            }
            Tok::Div => {
                self.bump();
                ProcKind::Div
            }
            Tok::Return => {
                self.bump();
                ProcKind::Return(self.expr()?)
            }
            Tok::Do => {
                self.bump();
                self.expect(Tok::LBrace, "`{`")?;
                let mut stmts = Vec::new();
                loop {
                    let binder = if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::LArrow {
                        let b = self.ident("a variable")?;
                        self.bump();
                        Some(b)
                    } else {
                        None
                    };
                    let proc = self.proc(true)?;
                    stmts.push(Stmt { binder, proc });
                    if !self.eat(&Tok::Semi) {
                        break;
                    }
                }
                self.expect(Tok::RBrace, "`;` or `}`")?;
                ProcKind::Do(stmts)
            }
            Tok::Loop => {
                self.bump();
                if *self.peek() == Tok::LParen && *self.peek_at(1) == Tok::Backslash {
                    self.bump();
                    self.bump();
                    let var = self.ident("a loop variable")?;
                    self.expect(Tok::Arrow, "`->`")?;
                    let body = self.proc(false)?;
                    self.expect(Tok::RParen, "`)`")?;
                    let init = self.atom()?;
                    ProcKind::LoopFrom { var, body, init }
                } else {
                    ProcKind::Loop(self.primary()?)
                }
            }
            Tok::While => {
                self.bump();
                let cond = self.expr()?;
                self.expect(Tok::Do, "`do`")?;
                ProcKind::While(cond, self.primary()?)
            }
            Tok::Inp => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let chan = self.ident("a channel name")?;
                self.expect(Tok::Comma, "`,`")?;
                let set = self.set_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                ProcKind::Inp(chan, set)
            }
            Tok::Outp => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let chan = self.ident("a channel name")?;
                self.expect(Tok::Comma, "`,`")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                ProcKind::Outp(chan, e)
            }
            Tok::Guard => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                ProcKind::GuardStmt(e)
            }
            Tok::LParen => {
                self.bump();
                let p = self.proc(false)?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(p);
            }
            Tok::Ident(_) => {
                if let Some(kind) = self.assignment()? {
                    kind
                } else {
                    let name = self.ident("a process name")?;
                    let mut args = Vec::new();
                    if self.eat(&Tok::LParen) {
                        args = self.sep_by(Tok::RParen, |p| p.expr())?;
                        self.expect(Tok::RParen, "`)`")?;
                    }
                    ProcKind::Call(name, args)
                }
            }
            _ => return Err(self.unexpected(&["a process"])),
        };
        Ok(node(kind, start.to(self.prev_span())))
    }

    /// `x, y := e, f`, if the input starts with one.
    fn assignment(&mut self) -> PResult<Option<ProcKind>> {
        let save = self.pos;
        let mut targets = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Ident(name) => {
                    let span = self.bump().1;
                    targets.push(Ident::new(name, span));
                }
                _ => {
                    self.pos = save;
                    return Ok(None);
                }
            }
            if self.eat(&Tok::Assign) {
                break;
            }
            if !self.eat(&Tok::Comma) {
                self.pos = save;
                return Ok(None);
            }
        }
        let mut values = vec![self.expr()?];
        // A count mismatch is reported by the checker.
        while self.eat(&Tok::Comma) {
            values.push(self.expr()?);
        }
        Ok(Some(ProcKind::Assign(targets, values)))
    }

    // Sets

    fn set_expr(&mut self) -> PResult<SetExpr> {
        let start = self.span();
        let kind = match self.peek() {
            Tok::Ident(_) => SetKind::Named(self.ident("a set")?),
            Tok::LBrace => {
                self.bump();
                if self.eat(&Tok::RBrace) {
                    SetKind::Enum(Vec::new())
                } else {
                    let first = self.expr()?;
                    if self.eat(&Tok::DotDot) {
                        if *self.peek() == Tok::RBrace {
                            return Err(ParseError::new(
                                self.span(),
                                "infinite set: input domains must be finite, e.g. {0..3}",
                                vec!["an upper bound".into()],
                            ));
                        }
                        let hi = self.expr()?;
                        self.expect(Tok::RBrace, "`}`")?;
                        SetKind::Range(first, hi)
                    } else {
                        let mut items = vec![first];
                        while self.eat(&Tok::Comma) {
                            items.push(self.expr()?);
                        }
                        self.expect(Tok::RBrace, "`,`, `..` or `}`")?;
                        SetKind::Enum(items)
                    }
                }
            }
            _ => return Err(self.unexpected(&["a set"])),
        };
        Ok(SetExpr {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    fn event_set(&mut self) -> PResult<EventSetExpr> {
        let start = self.span();
        let kind = match self.peek() {
            Tok::LChans => {
                self.bump();
                let chans = self.sep_by(Tok::RChans, |p| p.ident("a channel name"))?;
                self.expect(Tok::RChans, "`|}`")?;
                EventSetKind::Channels(chans)
            }
            Tok::LBrace => {
                self.bump();
                let events = self.sep_by(Tok::RBrace, |p| {
                    let chan = p.ident("an event")?;
                    let mut fields = Vec::new();
                    while p.eat(&Tok::Dot) {
                        fields.push(p.atom()?);
                    }
                    Ok(EventExpr {
                        span: chan.span.to(p.prev_span()),
                        chan,
                        fields,
                    })
                })?;
                self.expect(Tok::RBrace, "`}`")?;
                EventSetKind::Events(events)
            }
            _ => return Err(self.unexpected(&["`{|`", "`{`"])),
        };
        Ok(EventSetExpr {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    // Expressions

    fn expr(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::If {
            let start = self.bump().1;
            let c = self.expr()?;
            self.expect(Tok::Then, "`then`")?;
            let a = self.expr()?;
            self.expect(Tok::Else, "`else`")?;
            let b = self.expr()?;
            let span = start.to(b.span);
            return Ok(Expr {
                kind: ExprKind::If(Box::new(c), Box::new(a), Box::new(b)),
                span,
            });
        }
        self.or_expr()
    }

    fn binary(&mut self, op: BinOp, a: Expr, b: Expr) -> Expr {
        let span = a.span.to(b.span);
        Expr {
            kind: ExprKind::Binary(op, Box::new(a), Box::new(b)),
            span,
        }
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut e = self.and_expr()?;
        while self.eat(&Tok::Or) {
            let r = self.and_expr()?;
            e = self.binary(BinOp::Or, e, r);
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut e = self.not_expr()?;
        while self.eat(&Tok::And) {
            let r = self.not_expr()?;
            e = self.binary(BinOp::And, e, r);
        }
        Ok(e)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Not {
            let start = self.bump().1;
            let e = self.not_expr()?;
            let span = start.to(e.span);
            return Ok(Expr {
                kind: ExprKind::Unary(UnOp::Not, Box::new(e)),
                span,
            });
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let e = self.concat_expr()?;
        let op = match self.peek() {
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(e),
        };
        self.bump();
        let r = self.concat_expr()?;
        Ok(self.binary(op, e, r))
    }

    fn concat_expr(&mut self) -> PResult<Expr> {
        let e = self.add_expr()?;
        if self.eat(&Tok::Concat) {
            let r = self.concat_expr()?;
            return Ok(self.binary(BinOp::Concat, e, r));
        }
        Ok(e)
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut e = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(e),
            };
            self.bump();
            let r = self.mul_expr()?;
            e = self.binary(op, e, r);
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut e = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => return Ok(e),
            };
            self.bump();
            let r = self.unary_expr()?;
            e = self.binary(op, e, r);
        }
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            let start = self.bump().1;
            let e = self.unary_expr()?;
            let span = start.to(e.span);
            return Ok(Expr {
                kind: ExprKind::Unary(UnOp::Neg, Box::new(e)),
                span,
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                ExprKind::Lit(Value::Int(i))
            }
            Tok::Str(s) => {
                self.bump();
                ExprKind::Lit(Value::Str(s))
            }
            Tok::True => {
                self.bump();
                ExprKind::Lit(Value::Bool(true))
            }
            Tok::False => {
                self.bump();
                ExprKind::Lit(Value::Bool(false))
            }
            Tok::Box => {
                self.bump();
                ExprKind::List(Vec::new())
            }
            Tok::LBracket => {
                self.bump();
                let items = self.sep_by(Tok::RBracket, |p| p.expr())?;
                self.expect(Tok::RBracket, "`,` or `]`")?;
                ExprKind::List(items)
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    ExprKind::Lit(Value::Unit)
                } else {
                    let a = self.expr()?;
                    if self.eat(&Tok::Comma) {
                        let b = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        ExprKind::Pair(Box::new(a), Box::new(b))
                    } else {
                        self.expect(Tok::RParen, "`,` or `)`")?;
                        return Ok(a);
                    }
                }
            }
            Tok::Ident(name) => {
                let span = self.bump().1;
                if self.eat(&Tok::LParen) {
                    let args = self.sep_by(Tok::RParen, |p| p.expr())?;
                    self.expect(Tok::RParen, "`,` or `)`")?;
                    ExprKind::Call(Ident::new(name, span), args)
                } else {
                    ExprKind::Var(name.into())
                }
            }
            _ => return Err(self.unexpected(&["an expression"])),
        };
        Ok(Expr {
            kind,
            span: start.to(self.prev_span()),
        })
    }
}

/// Reads `{x, y}` in a name-set position as a list of state variables.
fn name_set(es: EventSetExpr) -> PResult<Vec<Ident>> {
    match es.kind {
        EventSetKind::Events(events) => events
            .into_iter()
            .map(|e| {
                if e.fields.is_empty() {
                    Ok(e.chan)
                } else {
                    Err(ParseError::new(
                        e.span,
                        "expected a state variable",
                        vec!["a name".into()],
                    ))
                }
            })
            .collect(),
        EventSetKind::Channels(_) => Err(ParseError::new(
            es.span,
            "a name set lists state variables in `{…}`",
            vec!["`{`".into()],
        )),
    }
}
