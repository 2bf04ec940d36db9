//! Static checks: declarations, types, modes and guarded recursion.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use itree_core::optics::{ChanDecl, ChanRegistry, Kind, Value};

use crate::ast::*;
use crate::error::{ElabError, ElabErrorKind as K};
use crate::eval::{builtin_type, Env, Globals, Scope};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Csp,
    Circus,
}

/// A program that passed every static check.
#[derive(Debug, Clone)]
pub struct Checked {
    pub channels: ChanRegistry,
    pub globals: Globals,
    pub procs: Vec<Arc<ProcDecl>>,
}

impl Checked {
    pub fn proc(&self, name: &str) -> Option<&Arc<ProcDecl>> {
        self.procs.iter().find(|p| &*p.name.name == name)
    }
}

pub fn unify(a: &Kind, b: &Kind) -> Option<Kind> {
    match (a, b) {
        (Kind::Any, k) | (k, Kind::Any) => Some(k.clone()),
        (Kind::List(x), Kind::List(y)) => Some(Kind::list(unify(x, y)?)),
        (Kind::Pair(a1, b1), Kind::Pair(a2, b2)) => Some(Kind::pair(unify(a1, a2)?, unify(b1, b2)?)),
        (a, b) if a == b => Some(a.clone()),
        _ => None,
    }
}

/// Splits a channel type into the types of `n` dotted components, the last
/// of which takes whatever remains.
pub fn split_kind(k: &Kind, n: usize) -> Option<Vec<Kind>> {
    let mut out = Vec::new();
    let mut rest = k.clone();
    for _ in 1..n {
        match rest {
            Kind::Pair(a, b) => {
                out.push(*a);
                rest = *b;
            }
            Kind::Any => out.push(Kind::Any),
            _ => return None,
        }
    }
    if n > 0 {
        out.push(rest);
    } else if !matches!(rest, Kind::Unit | Kind::Any) {
        return None;
    }
    Some(out)
}

/// Right-nested pairing of dotted components; no components is `()`.
pub fn pack(mut vs: Vec<Value>) -> Value {
    let Some(mut acc) = vs.pop() else {
        return Value::Unit;
    };
    while let Some(v) = vs.pop() {
        acc = Value::pair(v, acc);
    }
    acc
}

struct Checker {
    channels: ChanRegistry,
    globals: Globals,
    procs: HashMap<Arc<str>, Arc<ProcDecl>>,
    errors: Vec<ElabError>,
}

#[derive(Clone)]
struct Ctx<'a> {
    mode: Mode,
    locals: Vec<(Arc<str>, Kind)>,
    fields: &'a [(Arc<str>, Kind)],
    /// Event sets may not depend on the state.
    hide_fields: bool,
}

impl Ctx<'_> {
    fn bind(&self, name: &Ident, k: Kind) -> Self {
        let mut c = self.clone();
        c.locals.push((name.name.clone(), k));
        c
    }

    fn field(&self, name: &str) -> Option<&Kind> {
        self.fields.iter().find(|(n, _)| &**n == name).map(|(_, k)| k)
    }
}

pub fn check(prog: &Program) -> Result<Checked, Vec<ElabError>> {
    let mut c = Checker {
        channels: ChanRegistry::new(),
        globals: Globals::default(),
        procs: HashMap::new(),
        errors: Vec::new(),
    };
    c.declarations(prog);
    for p in prog.processes() {
        c.process(p);
    }
    c.guardedness(prog);
    if c.errors.is_empty() {
        Ok(Checked {
            channels: c.channels,
            globals: c.globals,
            procs: prog.processes().cloned().collect(),
        })
    } else {
        Err(c.errors)
    }
}

fn type_tags(k: &Kind, out: &mut Vec<(String, Kind)>) {
    match k {
        Kind::Enum(tags) => out.extend(tags.iter().map(|t| (t.clone(), k.clone()))),
        Kind::List(a) => type_tags(a, out),
        Kind::Pair(a, b) => {
            type_tags(a, out);
            type_tags(b, out);
        }
        _ => {}
    }
}

impl Checker {
    fn err(&mut self, span: Span, kind: K, message: impl Into<String>) {
        self.errors.push(ElabError::new(span, kind, message));
    }

    fn tag_types(&mut self, ty: &TypeExpr) {
        let mut tags = Vec::new();
        type_tags(&ty.kind, &mut tags);
        for (t, k) in tags {
            match self.globals.tags.get(t.as_str()) {
                Some(old) if *old != k => {
                    self.err(ty.span, K::Duplicate, format!("tag `{t}` belongs to two enumerations"))
                }
                Some(_) => {}
                None => {
                    self.globals.tags.insert(t.as_str().into(), k);
                }
            }
        }
    }

    fn declarations(&mut self, prog: &Program) {
        for d in &prog.decls {
            if let Decl::Process(p) = d {
                for t in p.params.iter().map(|x| &x.ty) {
                    self.tag_types(t);
                }
                if let ProcBody::Circus { fields, .. } = &p.body {
                    for f in fields {
                        self.tag_types(&f.ty);
                    }
                }
                if self.procs.insert(p.name.name.clone(), p.clone()).is_some() {
                    self.err(
                        p.name.span,
                        K::Duplicate,
                        format!("process `{}` is declared twice", p.name),
                    );
                }
            }
            if let Decl::Channel { ty: Some(ty), .. } = d {
                self.tag_types(ty);
            }
        }
        for d in &prog.decls {
            match d {
                Decl::Channel { names, ty } => {
                    let kind = ty.as_ref().map_or(Kind::Unit, |t| t.kind.clone());
                    for n in names {
                        if self
                            .channels
                            .register(ChanDecl::new(n.name.clone(), kind.clone()))
                            .is_err()
                        {
                            self.err(n.span, K::Duplicate, format!("channel `{n}` is declared twice"));
                        }
                    }
                }
                Decl::Const { name, value } => {
                    let ctx = Ctx {
                        mode: Mode::Csp,
                        locals: Vec::new(),
                        fields: &[],
                        hide_fields: false,
                    };
                    self.expr(value, &ctx);
                    let v = self.eval_global(|s| s.eval(value), value.span);
                    if self.globals.consts.contains_key(&name.name) {
                        self.err(name.span, K::Duplicate, format!("constant `{name}` is declared twice"));
                    } else if let Some(v) = v {
                        self.globals.consts.insert(name.name.clone(), v);
                    }
                }
                Decl::Set { name, value } => {
                    let ctx = Ctx {
                        mode: Mode::Csp,
                        locals: Vec::new(),
                        fields: &[],
                        hide_fields: false,
                    };
                    self.set(value, &ctx);
                    let v = self.eval_global(|s| s.set(value), value.span);
                    if self.globals.sets.contains_key(&name.name) {
                        self.err(name.span, K::Duplicate, format!("set `{name}` is declared twice"));
                    } else if let Some(v) = v {
                        self.globals.sets.insert(name.name.clone(), v);
                    }
                }
                Decl::Process(_) => {}
            }
        }
    }

    fn eval_global<T>(&mut self, f: impl FnOnce(&Scope) -> Result<T, crate::eval::EvalError>, span: Span) -> Option<T> {
        if !self.errors.is_empty() {
            return None;
        }
        let env = Env::default();
        let scope = Scope {
            globals: &self.globals,
            env: &env,
            state: None,
        };
        match f(&scope) {
            Ok(v) => Some(v),
            Err(e) => {
                self.err(span, K::Eval, e.message);
                None
            }
        }
    }

    fn value_kind(&self, v: &Value) -> Kind {
        match v {
            Value::Unit => Kind::Unit,
            Value::Bool(_) => Kind::Bool,
            Value::Int(_) => Kind::Int,
            Value::Str(_) => Kind::Str,
            Value::List(xs) => Kind::list(
                xs.iter()
                    .map(|x| self.value_kind(x))
                    .try_fold(Kind::Any, |a, b| unify(&a, &b))
                    .unwrap_or(Kind::Any),
            ),
            Value::Pair(a, b) => Kind::pair(self.value_kind(a), self.value_kind(b)),
            Value::Enum(t) => self.globals.tags.get(t.as_str()).cloned().unwrap_or(Kind::Any),
        }
    }

    fn expect(&mut self, span: Span, found: &Kind, want: &Kind, what: &str) -> Kind {
        match unify(found, want) {
            Some(k) => k,
            None => {
                self.err(span, K::TypeMismatch, format!("{what}: expected {want}, found {found}"));
                Kind::Any
            }
        }
    }

    fn var_kind(&mut self, x: &str, span: Span, ctx: &Ctx) -> Kind {
        if let Some((_, k)) = ctx.locals.iter().rev().find(|(n, _)| &**n == x) {
            return k.clone();
        }
        if let Some(k) = ctx.field(x) {
            if ctx.hide_fields {
                self.err(
                    span,
                    K::WrongMode,
                    format!("state field `{x}` cannot be used in an event set"),
                );
            }
            return k.clone();
        }
        if let Some(v) = self.globals.consts.get(x) {
            return self.value_kind(&v.clone());
        }
        if let Some(k) = self.globals.tags.get(x) {
            return k.clone();
        }
        self.err(span, K::Undeclared, format!("`{x}` is not declared"));
        Kind::Any
    }

    fn expr(&mut self, e: &Expr, ctx: &Ctx) -> Kind {
        match &e.kind {
            ExprKind::Lit(v) => self.value_kind(v),
            ExprKind::Var(x) => self.var_kind(x, e.span, ctx),
            ExprKind::List(items) => {
                let mut k = Kind::Any;
                for i in items {
                    let ki = self.expr(i, ctx);
                    k = self.expect(i.span, &ki, &k, "list element");
                }
                Kind::list(k)
            }
            ExprKind::Pair(a, b) => Kind::pair(self.expr(a, ctx), self.expr(b, ctx)),
            ExprKind::Call(f, args) => {
                let kinds: Vec<Kind> = args.iter().map(|a| self.expr(a, ctx)).collect();
                match builtin_type(&f.name, &kinds) {
                    None => {
                        self.err(f.span, K::Undeclared, format!("unknown function `{f}`"));
                        Kind::Any
                    }
                    Some(Err(m)) => {
                        self.err(e.span, K::TypeMismatch, m);
                        Kind::Any
                    }
                    Some(Ok(k)) => k,
                }
            }
            ExprKind::Unary(op, a) => {
                let want = if *op == UnOp::Neg { Kind::Int } else { Kind::Bool };
                let k = self.expr(a, ctx);
                self.expect(a.span, &k, &want, "operand")
            }
            ExprKind::Binary(op, a, b) => {
                let (ka, kb) = (self.expr(a, ctx), self.expr(b, ctx));
                match op {
                    BinOp::And | BinOp::Or => {
                        self.expect(a.span, &ka, &Kind::Bool, "operand");
                        self.expect(b.span, &kb, &Kind::Bool, "operand");
                        Kind::Bool
                    }
                    BinOp::Eq | BinOp::Ne => {
                        self.expect(b.span, &kb, &ka, "comparison");
                        Kind::Bool
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        self.expect(a.span, &ka, &Kind::Int, "operand");
                        self.expect(b.span, &kb, &Kind::Int, "operand");
                        Kind::Bool
                    }
                    BinOp::Concat => {
                        let k = self.expect(b.span, &kb, &ka, "concatenation");
                        if !matches!(k, Kind::List(_) | Kind::Str | Kind::Any) {
                            self.err(
                                e.span,
                                K::TypeMismatch,
                                format!("`++` needs lists or strings, found {k}"),
                            );
                        }
                        k
                    }
                    _ => {
                        self.expect(a.span, &ka, &Kind::Int, "operand");
                        self.expect(b.span, &kb, &Kind::Int, "operand");
                        Kind::Int
                    }
                }
            }
            ExprKind::If(c, a, b) => {
                let kc = self.expr(c, ctx);
                self.expect(c.span, &kc, &Kind::Bool, "condition");
                let (ka, kb) = (self.expr(a, ctx), self.expr(b, ctx));
                self.expect(b.span, &kb, &ka, "branches of `if`")
            }
        }
    }

    fn bool_expr(&mut self, e: &Expr, ctx: &Ctx) {
        let k = self.expr(e, ctx);
        self.expect(e.span, &k, &Kind::Bool, "condition");
    }

    /// Element type of a set.
    fn set(&mut self, s: &SetExpr, ctx: &Ctx) -> Kind {
        match &s.kind {
            SetKind::Range(lo, hi) => {
                for b in [lo, hi] {
                    let k = self.expr(b, ctx);
                    self.expect(b.span, &k, &Kind::Int, "range bound");
                }
                Kind::Int
            }
            SetKind::Enum(items) => {
                let mut k = Kind::Any;
                for i in items {
                    let ki = self.expr(i, ctx);
                    k = self.expect(i.span, &ki, &k, "set element");
                }
                k
            }
            SetKind::Named(n) => match self.globals.sets.get(&n.name) {
                Some(vs) => vs
                    .iter()
                    .map(|v| self.value_kind(v))
                    .try_fold(Kind::Any, |a, b| unify(&a, &b))
                    .unwrap_or(Kind::Any),
                None => {
                    self.err(n.span, K::Undeclared, format!("set `{n}` is not declared"));
                    Kind::Any
                }
            },
        }
    }

    fn channel(&mut self, c: &Ident) -> Option<Kind> {
        match self.channels.get(&c.name) {
            Some(d) => Some(d.kind.clone()),
            None => {
                self.err(c.span, K::Undeclared, format!("channel `{c}` is not declared"));
                None
            }
        }
    }

    /// Types the dotted components of an event, with `extra` trailing
    /// components supplied by the communication. Returns the type of the
    /// last component when there is one.
    fn event(&mut self, ev: &EventExpr, extra: usize, ctx: &Ctx) -> Option<Kind> {
        let chan = self.channel(&ev.chan)?;
        let n = ev.fields.len() + extra;
        let Some(parts) = split_kind(&chan, n) else {
            let msg = if n == 0 {
                format!("channel `{}` carries {chan} and needs a value", ev.chan)
            } else {
                format!("channel `{}` of type {chan} cannot take {n} component(s)", ev.chan)
            };
            self.err(ev.span, K::TypeMismatch, msg);
            return None;
        };
        for (f, k) in ev.fields.iter().zip(&parts) {
            let kf = self.expr(f, ctx);
            self.expect(f.span, &kf, k, "event component");
        }
        Some(parts.last().cloned().unwrap_or(Kind::Unit))
    }

    fn event_set(&mut self, es: &EventSetExpr, ctx: &Ctx) {
        let ctx = Ctx {
            hide_fields: true,
            ..ctx.clone()
        };
        match &es.kind {
            EventSetKind::Channels(cs) => {
                for c in cs {
                    self.channel(c);
                }
            }
            EventSetKind::Events(evs) => {
                for ev in evs {
                    self.event(ev, 0, &ctx);
                }
            }
        }
    }

    fn require(&mut self, span: Span, ctx: &Ctx, mode: Mode, what: &str) {
        if ctx.mode != mode {
            let (here, there) = match mode {
                Mode::Csp => ("state-based", "plain"),
                Mode::Circus => ("plain", "state-based"),
            };
            self.err(
                span,
                K::WrongMode,
                format!("{what} is not allowed in a {here} process; it needs a {there} one"),
            );
        }
    }

    fn local(&mut self, name: &Ident, ctx: &Ctx) {
        if ctx.field(&name.name).is_some() {
            self.err(name.span, K::Duplicate, format!("`{name}` shadows a state field"));
        }
    }

    fn process(&mut self, p: &Arc<ProcDecl>) {
        let mut seen = HashSet::new();
        for prm in &p.params {
            if !seen.insert(prm.name.name.clone()) {
                self.err(
                    prm.name.span,
                    K::Duplicate,
                    format!("parameter `{}` is declared twice", prm.name),
                );
            }
        }
        let locals: Vec<(Arc<str>, Kind)> = p
            .params
            .iter()
            .map(|x| (x.name.name.clone(), x.ty.kind.clone()))
            .collect();
        match &p.body {
            ProcBody::Csp(body) => {
                let ctx = Ctx {
                    mode: Mode::Csp,
                    locals,
                    fields: &[],
                    hide_fields: false,
                };
                self.proc(body, &ctx);
            }
            ProcBody::Circus { fields, action } => {
                let mut kinds: Vec<(Arc<str>, Kind)> = Vec::new();
                for f in fields {
                    if kinds.iter().any(|(n, _)| *n == f.name.name) {
                        self.err(
                            f.name.span,
                            K::Duplicate,
                            format!("field `{}` is declared twice", f.name),
                        );
                    }
                    if locals.iter().any(|(n, _)| *n == f.name.name) {
                        self.err(
                            f.name.span,
                            K::Duplicate,
                            format!("field `{}` shadows a parameter", f.name),
                        );
                    }
                    if let Some(init) = &f.init {
                        let ctx = Ctx {
                            mode: Mode::Circus,
                            locals: locals.clone(),
                            fields: &[],
                            hide_fields: false,
                        };
                        let k = self.expr(init, &ctx);
                        self.expect(init.span, &k, &f.ty.kind, &format!("initial value of `{}`", f.name));
                    }
                    kinds.push((f.name.name.clone(), f.ty.kind.clone()));
                }
                let ctx = Ctx {
                    mode: Mode::Circus,
                    locals,
                    fields: &kinds,
                    hide_fields: false,
                };
                self.proc(action, &ctx);
            }
        }
    }

    /// Checks a process and returns the type of the value it terminates with.
    fn proc(&mut self, p: &Proc, ctx: &Ctx) -> Kind {
        match &p.kind {
            ProcKind::Skip => Kind::Unit,
            ProcKind::Stop | ProcKind::Div => Kind::Any,
            ProcKind::Return(e) => {
                self.require(p.span, ctx, Mode::Csp, "`return`");
                self.expr(e, ctx)
            }
            ProcKind::Call(name, args) => {
                let kinds: Vec<Kind> = args.iter().map(|a| self.expr(a, ctx)).collect();
                let Some(decl) = self.procs.get(&name.name).cloned() else {
                    self.err(name.span, K::Undeclared, format!("process `{name}` is not declared"));
                    return Kind::Any;
                };
                if decl.params.len() != args.len() {
                    self.err(
                        p.span,
                        K::Arity,
                        format!("`{name}` takes {} argument(s), given {}", decl.params.len(), args.len()),
                    );
                } else {
                    for ((a, k), prm) in args.iter().zip(&kinds).zip(&decl.params) {
                        self.expect(a.span, k, &prm.ty.kind, &format!("argument `{}` of `{name}`", prm.name));
                    }
                }
                Kind::Any
            }
            ProcKind::Prefix { event, comm, body } => match comm {
                Comm::Sync => {
                    self.event(event, 0, ctx);
                    self.proc(body, ctx)
                }
                Comm::Out(e) => {
                    if let Some(k) = self.event(event, 1, ctx) {
                        let ke = self.expr(e, ctx);
                        self.expect(e.span, &ke, &k, &format!("output on `{}`", event.chan));
                    }
                    self.proc(body, ctx)
                }
                Comm::In { var, domain } => {
                    self.local(var, ctx);
                    let k = self.event(event, 1, ctx).unwrap_or(Kind::Any);
                    let k = self.domain(var.span, domain.as_ref(), &k, &event.chan, ctx);
                    self.proc(body, &ctx.bind(var, k))
                }
            },
            ProcKind::Inp(c, s) => {
                self.require(p.span, ctx, Mode::Csp, "`inp`");
                let k = self.split_one(c);
                self.domain(s.span, Some(s), &k, c, ctx)
            }
            ProcKind::Outp(c, e) => {
                self.require(p.span, ctx, Mode::Csp, "`outp`");
                let k = self.split_one(c);
                let ke = self.expr(e, ctx);
                self.expect(e.span, &ke, &k, &format!("output on `{c}`"));
                Kind::Unit
            }
            ProcKind::GuardStmt(b) => {
                self.require(p.span, ctx, Mode::Csp, "`guard`");
                self.bool_expr(b, ctx);
                Kind::Unit
            }
            ProcKind::Guarded(b, body) => {
                self.bool_expr(b, ctx);
                self.proc(body, ctx)
            }
            ProcKind::Choice(a, b) => {
                let (ka, kb) = (self.proc(a, ctx), self.proc(b, ctx));
                self.expect(b.span, &kb, &ka, "branches of a choice")
            }
            ProcKind::Par(a, es, b) => {
                self.require(p.span, ctx, Mode::Csp, "`[| ... |]`");
                self.event_set(es, ctx);
                Kind::pair(self.proc(a, ctx), self.proc(b, ctx))
            }
            ProcKind::Interleave(a, b) => {
                self.require(p.span, ctx, Mode::Csp, "`|||`");
                Kind::pair(self.proc(a, ctx), self.proc(b, ctx))
            }
            ProcKind::RepInterleave { var, set, body } => {
                self.require(p.span, ctx, Mode::Csp, "`|||`");
                let k = self.set(set, ctx);
                self.proc(body, &ctx.bind(var, k));
                Kind::Any
            }
            ProcKind::CircusPar {
                left,
                ns1,
                sync,
                ns2,
                right,
            } => {
                self.require(p.span, ctx, Mode::Circus, "a parallel composition with name sets");
                for n in ns1.iter().chain(ns2) {
                    if ctx.field(&n.name).is_none() {
                        self.err(n.span, K::Undeclared, format!("`{n}` is not a state field"));
                    }
                }
                if let Some(n) = ns1.iter().find(|n| ns2.iter().any(|m| m.name == n.name)) {
                    self.err(n.span, K::NotIndependent, format!("name sets overlap on `{n}`"));
                }
                self.event_set(sync, ctx);
                self.proc(left, ctx);
                self.proc(right, ctx);
                Kind::Unit
            }
            ProcKind::Hide(a, es) => {
                self.event_set(es, ctx);
                self.proc(a, ctx)
            }
            ProcKind::Seq(a, b) => {
                self.proc(a, ctx);
                self.proc(b, ctx)
            }
            ProcKind::Assign(xs, es) => {
                self.require(p.span, ctx, Mode::Circus, "assignment");
                if xs.len() != es.len() {
                    self.err(
                        p.span,
                        K::Arity,
                        format!("{} variable(s) assigned {} value(s)", xs.len(), es.len()),
                    );
                }
                let mut seen = HashSet::new();
                for x in xs {
                    if !seen.insert(x.name.clone()) {
                        self.err(x.span, K::Duplicate, format!("`{x}` is assigned twice"));
                    }
                }
                for (x, e) in xs.iter().zip(es) {
                    let ke = self.expr(e, ctx);
                    match ctx.field(&x.name).cloned() {
                        Some(k) => {
                            self.expect(e.span, &ke, &k, &format!("assignment to `{x}`"));
                        }
                        None => self.err(x.span, K::Undeclared, format!("`{x}` is not a state field")),
                    }
                }
                Kind::Unit
            }
            ProcKind::Do(stmts) => {
                self.require(p.span, ctx, Mode::Csp, "a `do` block");
                let mut ctx = ctx.clone();
                let mut last = Kind::Unit;
                for s in stmts {
                    last = self.proc(&s.proc, &ctx);
                    if let Some(b) = &s.binder {
                        ctx = ctx.bind(b, last.clone());
                    }
                }
                if stmts.last().is_some_and(|s| s.binder.is_some()) {
                    self.err(p.span, K::TypeMismatch, "a `do` block cannot end with a binding");
                }
                last
            }
            ProcKind::Loop(body) => {
                self.proc(body, ctx);
                Kind::Any
            }
            ProcKind::LoopFrom { var, body, init } => {
                self.require(p.span, ctx, Mode::Csp, "`loop` with a parameter");
                let k = self.expr(init, ctx);
                let kb = self.proc(body, &ctx.bind(var, k.clone()));
                self.expect(body.span, &kb, &k, "loop body result");
                Kind::Any
            }
            ProcKind::While(b, body) => {
                self.require(p.span, ctx, Mode::Circus, "`while`");
                self.bool_expr(b, ctx);
                self.proc(body, ctx);
                Kind::Unit
            }
        }
    }

    fn split_one(&mut self, c: &Ident) -> Kind {
        self.channel(c).unwrap_or(Kind::Any)
    }

    /// The type of an input variable: the explicit domain's element type,
    /// which must fit the channel, or the channel component's own type when
    /// that is finite.
    fn domain(&mut self, span: Span, domain: Option<&SetExpr>, k: &Kind, chan: &Ident, ctx: &Ctx) -> Kind {
        match domain {
            Some(s) => {
                let ks = self.set(s, ctx);
                self.expect(s.span, &ks, k, &format!("input domain of `{chan}`"))
            }
            None => {
                if k.finite_domain().is_none() {
                    self.err(
                        span,
                        K::NotEnumerable,
                        format!("input on `{chan}` needs an explicit finite set: {k} is not enumerable"),
                    );
                }
                k.clone()
            }
        }
    }

    /// Rejects recursion that reaches a process again before any event.
    fn guardedness(&mut self, prog: &Program) {
        let mut graph: HashMap<Arc<str>, Vec<(Arc<str>, Span)>> = HashMap::new();
        for p in prog.processes() {
            let mut calls = Vec::new();
            let body = match &p.body {
                ProcBody::Csp(b) => b,
                ProcBody::Circus { action, .. } => action,
            };
            unguarded_calls(body, &mut calls);
            graph.insert(p.name.name.clone(), calls);
        }
        let mut reported = BTreeSet::new();
        for p in prog.processes() {
            let start = &p.name.name;
            let mut stack: Vec<Arc<str>> = vec![start.clone()];
            let mut seen = HashSet::new();
            while let Some(n) = stack.pop() {
                for (m, span) in graph.get(&n).into_iter().flatten() {
                    if m == start && reported.insert(start.clone()) {
                        self.err(
                            *span,
                            K::UnguardedRecursion,
                            format!("process `{start}` can call itself before performing any event"),
                        );
                    }
                    if seen.insert(m.clone()) {
                        stack.push(m.clone());
                    }
                }
            }
        }
    }
}

/// Whether every path through `p` performs an event before terminating.
fn communicates(p: &Proc) -> bool {
    match &p.kind {
        ProcKind::Prefix { .. } | ProcKind::Inp(..) | ProcKind::Outp(..) => true,
        ProcKind::Stop | ProcKind::Div | ProcKind::Loop(_) | ProcKind::LoopFrom { .. } => true,
        ProcKind::Guarded(_, b) => communicates(b),
        ProcKind::Seq(a, b) => communicates(a) || communicates(b),
        ProcKind::Choice(a, b) => communicates(a) && communicates(b),
        ProcKind::Do(stmts) => stmts.iter().any(|s| communicates(&s.proc)),
        _ => false,
    }
}

fn unguarded_calls(p: &Proc, out: &mut Vec<(Arc<str>, Span)>) {
    match &p.kind {
        ProcKind::Call(n, _) => out.push((n.name.clone(), n.span)),
        ProcKind::Prefix { .. } => {}
        ProcKind::Guarded(_, b) | ProcKind::Hide(b, _) | ProcKind::Loop(b) | ProcKind::While(_, b) => {
            unguarded_calls(b, out)
        }
        ProcKind::LoopFrom { body, .. } | ProcKind::RepInterleave { body, .. } => unguarded_calls(body, out),
        ProcKind::Choice(a, b) | ProcKind::Par(a, _, b) | ProcKind::Interleave(a, b) => {
            unguarded_calls(a, out);
            unguarded_calls(b, out);
        }
        ProcKind::CircusPar { left, right, .. } => {
            unguarded_calls(left, out);
            unguarded_calls(right, out);
        }
        ProcKind::Seq(a, b) => {
            unguarded_calls(a, out);
            if !communicates(a) {
                unguarded_calls(b, out);
            }
        }
        ProcKind::Do(stmts) => {
            for s in stmts {
                unguarded_calls(&s.proc, out);
                if communicates(&s.proc) {
                    break;
                }
            }
        }
        _ => {}
    }
}
