//! Elaboration of checked programs into interaction trees.
//!
//! Plain processes become `ITree<Value>`; state-based ones become Circus
//! actions run from their initial state, terminating with the final state
//! rendered as a value. Process calls are suspended and shared through a
//! cache keyed by name and arguments, so recursion yields cyclic trees.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, Weak};

use itree_core::circus::{self, Action};
use itree_core::csp::{self, EventSet};
use itree_core::itree::{bind, div, iter, loop_, map};
use itree_core::optics::{self as op, ChanRegistry, Kind, Lens, OpticsError, Schema, StateSpace, Subst};
use itree_core::{Event, ITree, KTree, PFun, Value};

use crate::ast::*;
use crate::check::{check, pack, split_kind, Checked};
use crate::error::{ElabError, ElabErrorKind, LangError};
use crate::eval::{Env, EvalError, Globals, Scope};
use crate::parser::parse;

/// Cached instantiations beyond which the cache is cleared.
const CACHE_LIMIT: usize = 10_000;

type Key = (Arc<str>, Vec<Value>);

/// An elaborated program: a table of named processes.
#[derive(Clone)]
pub struct Program {
    inner: Arc<Inner>,
}

struct Inner {
    checked: Checked,
    cx: Arc<Cx>,
    cache: Mutex<HashMap<Key, ITree<Value>>>,
}

/// What suspended computations need. The back reference is weak so that
/// cached trees do not keep their program alive.
struct Cx {
    globals: Globals,
    channels: ChanRegistry,
    program: Weak<Inner>,
}

impl std::fmt::Debug for Program {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Program")
            .field("processes", &self.process_names())
            .finish_non_exhaustive()
    }
}

/// Parses, checks and elaborates source text.
pub fn load(src: &str) -> Result<Program, LangError> {
    let ast = parse(src)?;
    let checked = check(&ast).map_err(LangError::Elab)?;
    Ok(Program::new(checked))
}

/// The value a field or parameter of this type starts with by default.
pub fn default_value(k: &Kind) -> Value {
    match k {
        Kind::Any | Kind::Unit => Value::Unit,
        Kind::Bool => Value::Bool(false),
        Kind::Int => Value::Int(0),
        Kind::Str => Value::Str(String::new()),
        Kind::List(_) => Value::List(Vec::new()),
        Kind::Pair(a, b) => Value::pair(default_value(a), default_value(b)),
        Kind::Enum(tags) => tags.first().map_or(Value::Unit, |t| Value::Enum(t.clone())),
    }
}

impl Program {
    pub fn new(checked: Checked) -> Program {
        let inner = Arc::new_cyclic(|me| Inner {
            cx: Arc::new(Cx {
                globals: checked.globals.clone(),
                channels: checked.channels.clone(),
                program: me.clone(),
            }),
            checked,
            cache: Mutex::new(HashMap::new()),
        });
        Program { inner }
    }

    pub fn process_names(&self) -> Vec<&str> {
        self.inner.checked.procs.iter().map(|p| &*p.name.name).collect()
    }

    pub fn decl(&self, name: &str) -> Option<&Arc<ProcDecl>> {
        self.inner.checked.proc(name)
    }

    pub fn channels(&self) -> &ChanRegistry {
        &self.inner.checked.channels
    }

    /// Arguments used when none are given: each parameter's default.
    pub fn default_args(&self, name: &str) -> Vec<Value> {
        self.decl(name)
            .map(|d| d.params.iter().map(|p| default_value(&p.ty.kind)).collect())
            .unwrap_or_default()
    }

    pub fn instantiate(&self, name: &str, args: Vec<Value>) -> Result<ITree<Value>, ElabError> {
        let decl = self.decl(name).ok_or_else(|| {
            ElabError::new(
                Span::default(),
                ElabErrorKind::Undeclared,
                format!("process `{name}` is not declared"),
            )
        })?;
        if decl.params.len() != args.len() {
            return Err(ElabError::new(
                decl.span,
                ElabErrorKind::Arity,
                format!("`{name}` takes {} argument(s), given {}", decl.params.len(), args.len()),
            ));
        }
        for (p, a) in decl.params.iter().zip(&args) {
            if !p.ty.kind.matches(a) {
                return Err(ElabError::new(
                    p.name.span,
                    ElabErrorKind::TypeMismatch,
                    format!("argument `{}` of `{name}`: expected {}, found {a}", p.name, p.ty.kind),
                ));
            }
        }
        Ok(self.inner.instance(decl.name.name.clone(), args))
    }

    /// Number of cached instantiations.
    pub fn cache_len(&self) -> usize {
        self.inner.cache.lock().unwrap_or_else(|e| e.into_inner()).len()
    }
}

impl Inner {
    fn instance(&self, name: Arc<str>, args: Vec<Value>) -> ITree<Value> {
        let key = (name, args);
        if let Some(t) = self.cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return t.clone();
        }
        let built = self.build(&key.0, &key.1);
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.entry(key).or_insert(built).clone()
    }

    fn build(&self, name: &str, args: &[Value]) -> ITree<Value> {
        let decl = self.checked.proc(name).expect("checked call").clone();
        let env = decl
            .params
            .iter()
            .zip(args)
            .fold(Env::default(), |env, (p, a)| env.bind(p.name.name.clone(), a.clone()));
        match &decl.body {
            ProcBody::Csp(body) => csp_tree(&self.cx, body, &env),
            ProcBody::Circus { fields, action } => {
                let s0 = match initial_state(&self.cx, fields, &env) {
                    Ok(s) => s,
                    Err(e) => return failed(&format!("initial state of {name}"), &e.message),
                };
                let schema = s0.schema().clone();
                let act = circus_action(&self.cx, action, &env, &schema);
                map(act.run(s0), |s| s.to_value())
            }
        }
    }
}

fn initial_state(cx: &Cx, fields: &[Field], env: &Env) -> Result<StateSpace, EvalError> {
    let schema = Arc::new(
        Schema::new(fields.iter().map(|f| (f.name.name.clone(), f.ty.kind.clone()))).map_err(|e| EvalError {
            span: Span::default(),
            message: e.to_string(),
        })?,
    );
    let scope = Scope {
        globals: &cx.globals,
        env,
        state: None,
    };
    let values = fields
        .iter()
        .map(|f| match &f.init {
            Some(e) => scope.eval(e),
            None => Ok(default_value(&f.ty.kind)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    StateSpace::new(schema, values).map_err(|e| EvalError {
        span: Span::default(),
        message: e.to_string(),
    })
}

fn failed<R: Send + Sync + 'static>(context: &str, msg: &str) -> ITree<R> {
    let note = format!("{context}: {msg}");
    log::warn!("{note}");
    ITree::stop_noted(note)
}

fn call(cx: &Cx, name: &Ident, args: Vec<Value>) -> ITree<Value> {
    let program = cx.program.clone();
    let name = name.name.clone();
    ITree::lazy(move || match program.upgrade() {
        Some(p) => p.instance(name, args),
        None => ITree::stop_noted("the program defining this process was dropped"),
    })
}

fn scope<'a>(cx: &'a Cx, env: &'a Env, state: Option<&'a StateSpace>) -> Scope<'a> {
    Scope {
        globals: &cx.globals,
        env,
        state,
    }
}

fn eval_all(sc: &Scope, es: &[Expr]) -> Result<Vec<Value>, EvalError> {
    es.iter().map(|e| sc.eval(e)).collect()
}

fn event_set(cx: &Cx, es: &EventSetExpr, env: &Env) -> Result<EventSet, EvalError> {
    match &es.kind {
        EventSetKind::Channels(cs) => Ok(EventSet::of_channels(cs.iter().map(|c| c.name.clone()))),
        EventSetKind::Events(evs) => {
            let sc = scope(cx, env, None);
            evs.iter()
                .map(|ev| Ok(Event::new(ev.chan.name.clone(), pack(eval_all(&sc, &ev.fields)?))))
                .collect()
        }
    }
}

/// Values an input may receive: the explicit set, else the enumeration of
/// the channel component's type.
fn input_domain(cx: &Cx, ev: &EventExpr, domain: Option<&SetExpr>, sc: &Scope) -> Result<Vec<Value>, EvalError> {
    match domain {
        Some(s) => sc.set(s),
        None => {
            let kind = &cx.channels.get(&ev.chan.name).expect("checked channel").kind;
            split_kind(kind, ev.fields.len() + 1)
                .and_then(|ks| ks.last().and_then(Kind::finite_domain))
                .ok_or_else(|| EvalError {
                    span: ev.span,
                    message: format!("input on {} is not enumerable", ev.chan),
                })
        }
    }
}

/// The last dotted component of a payload that starts with `n` fields.
fn last_component(mut v: Value, n: usize) -> Value {
    for _ in 0..n {
        match v {
            Value::Pair(_, b) => v = *b,
            other => return other,
        }
    }
    v
}

fn admissible(cx: &Cx, e: &Event) -> Result<(), EvalError> {
    cx.channels.check_event(e).map_err(|err| EvalError {
        span: Span::default(),
        message: err.to_string(),
    })
}

fn csp_tree(cx: &Arc<Cx>, p: &Arc<Proc>, env: &Env) -> ITree<Value> {
    match csp_node(cx, p, env) {
        Ok(t) => t,
        Err(e) => failed("evaluation error", &e.message),
    }
}

/// A continuation elaborated on first use.
fn later(cx: &Arc<Cx>, p: &Arc<Proc>, env: Env) -> ITree<Value> {
    let (cx, p) = (cx.clone(), p.clone());
    ITree::lazy(move || csp_tree(&cx, &p, &env))
}

fn csp_node(cx: &Arc<Cx>, p: &Arc<Proc>, env: &Env) -> Result<ITree<Value>, EvalError> {
    let sc = scope(cx, env, None);
    Ok(match &p.kind {
        ProcKind::Skip => ITree::ret(Value::Unit),
        ProcKind::Stop => ITree::stop(),
        ProcKind::Div => div(),
        ProcKind::Return(e) => ITree::ret(sc.eval(e)?),
        ProcKind::Call(name, args) => call(cx, name, eval_all(&sc, args)?),
        ProcKind::Prefix { event, comm, body } => {
            let fields = eval_all(&sc, &event.fields)?;
            let chan = event.chan.name.clone();
            match comm {
                Comm::Sync | Comm::Out(_) => {
                    let mut parts = fields;
                    if let Comm::Out(e) = comm {
                        parts.push(sc.eval(e)?);
                    }
                    let ev = Event::new(chan, pack(parts));
                    admissible(cx, &ev)?;
                    csp::prefix(ev, later(cx, body, env.clone()))
                }
                Comm::In { var, domain } => {
                    let mut menu = Vec::new();
                    for d in input_domain(cx, event, domain.as_ref(), &sc)? {
                        let mut parts = fields.clone();
                        parts.push(d.clone());
                        let ev = Event::new(chan.clone(), pack(parts));
                        if admissible(cx, &ev).is_ok() {
                            menu.push((ev, later(cx, body, env.bind(var.name.clone(), d))));
                        }
                    }
                    ITree::vis(PFun::from_alist(menu))
                }
            }
        }
        ProcKind::Inp(c, s) => csp::inp(cx.channels.get(&c.name).expect("checked channel"), sc.set(s)?),
        ProcKind::Outp(c, e) => {
            let chan = cx.channels.get(&c.name).expect("checked channel");
            let t = csp::outp(chan, sc.eval(e)?).map_err(|err| EvalError {
                span: e.span,
                message: err.to_string(),
            })?;
            map(t, |()| Value::Unit)
        }
        ProcKind::GuardStmt(b) => map(csp::guard(bool_of(&sc, b)?), |()| Value::Unit),
        ProcKind::Guarded(b, body) => {
            if bool_of(&sc, b)? {
                csp_tree(cx, body, env)
            } else {
                ITree::stop()
            }
        }
        ProcKind::Choice(a, b) => csp::extchoice(csp_tree(cx, a, env), csp_tree(cx, b, env)),
        ProcKind::Par(a, es, b) => pair_up(csp::gpar(
            csp_tree(cx, a, env),
            event_set(cx, es, env)?,
            csp_tree(cx, b, env),
        )),
        ProcKind::Interleave(a, b) => pair_up(csp::gpar(csp_tree(cx, a, env), EventSet::empty(), csp_tree(cx, b, env))),
        ProcKind::RepInterleave { var, set, body } => {
            let trees: Vec<ITree<Value>> = sc
                .set(set)?
                .into_iter()
                .map(|v| csp_tree(cx, body, &env.bind(var.name.clone(), v)))
                .collect();
            trees
                .into_iter()
                .rev()
                .reduce(|acc, t| pair_up(csp::gpar(t, EventSet::empty(), acc)))
                .unwrap_or_else(|| ITree::ret(Value::Unit))
        }
        ProcKind::Hide(a, es) => csp::hide(csp_tree(cx, a, env), event_set(cx, es, env)?),
        ProcKind::Seq(a, b) => bind(csp_tree(cx, a, env), KTree::constant(later(cx, b, env.clone()))),
        ProcKind::Do(stmts) => do_block(cx, Arc::from(stmts.clone().into_boxed_slice()), 0, env.clone()),
        ProcKind::Loop(body) => iter(csp_tree(cx, body, env)),
        ProcKind::LoopFrom { var, body, init } => {
            let (cx2, body, var, env2) = (cx.clone(), body.clone(), var.name.clone(), env.clone());
            let step = KTree::new(move |v: Value| csp_tree(&cx2, &body, &env2.bind(var.clone(), v)));
            loop_(step).apply(sc.eval(init)?)
        }
        ProcKind::CircusPar { .. } | ProcKind::Assign(..) | ProcKind::While(..) => {
            unreachable!("state-based construct in a plain process")
        }
    })
}

fn bool_of(sc: &Scope, b: &Expr) -> Result<bool, EvalError> {
    match sc.eval(b)? {
        Value::Bool(v) => Ok(v),
        other => Err(EvalError {
            span: b.span,
            message: format!("expected a boolean, found {other}"),
        }),
    }
}

fn pair_up(t: ITree<(Value, Value)>) -> ITree<Value> {
    map(t, |(a, b)| Value::pair(a, b))
}

fn do_block(cx: &Arc<Cx>, stmts: Arc<[Stmt]>, i: usize, env: Env) -> ITree<Value> {
    let s = &stmts[i];
    let first = csp_tree(cx, &s.proc, &env);
    if i + 1 == stmts.len() {
        return first;
    }
    let (cx, binder) = (cx.clone(), s.binder.clone());
    let stmts = stmts.clone();
    bind(
        first,
        KTree::new(move |v| {
            let env = match &binder {
                Some(b) => env.bind(b.name.clone(), v),
                None => env.clone(),
            };
            do_block(&cx, stmts.clone(), i + 1, env)
        }),
    )
}

/// The free variables of `e` that name state fields.
fn reads(e: &Expr, schema: &Schema, out: &mut Vec<Arc<str>>) {
    match &e.kind {
        ExprKind::Var(x) => {
            if schema.index_of(x).is_some() && !out.contains(x) {
                out.push(x.clone());
            }
        }
        ExprKind::Lit(_) => {}
        ExprKind::List(xs) | ExprKind::Call(_, xs) => xs.iter().for_each(|x| reads(x, schema, out)),
        ExprKind::Pair(a, b) | ExprKind::Binary(_, a, b) => {
            reads(a, schema, out);
            reads(b, schema, out);
        }
        ExprKind::Unary(_, a) => reads(a, schema, out),
        ExprKind::If(c, a, b) => {
            reads(c, schema, out);
            reads(a, schema, out);
            reads(b, schema, out);
        }
    }
}

fn state_expr(cx: &Arc<Cx>, e: &Expr, env: &Env, schema: &Schema) -> op::Expr {
    let mut fields = Vec::new();
    reads(e, schema, &mut fields);
    let (cx, e, env) = (cx.clone(), e.clone(), env.clone());
    op::Expr::new(fields, move |s| {
        scope(&cx, &env, Some(s))
            .eval(&e)
            .map_err(|err| OpticsError::Eval(err.message))
    })
}

/// Packs the dotted fields of an event with an optional last component.
fn packed_expr(cx: &Arc<Cx>, ev: &EventExpr, last: Option<&Expr>, env: &Env, schema: &Schema) -> op::Expr {
    ev.fields
        .iter()
        .chain(last)
        .map(|f| state_expr(cx, f, env, schema).map(|v| Ok(Value::List(vec![v]))))
        .reduce(|a, b| {
            a.zip_with(&b, |x, y| {
                let (Value::List(mut xs), Value::List(ys)) = (x, y) else {
                    unreachable!("components are collected as lists")
                };
                xs.extend(ys);
                Ok(Value::List(xs))
            })
        })
        .map(|e| {
            e.map(|v| match v {
                Value::List(xs) => Ok(pack(xs)),
                _ => unreachable!("components are collected as lists"),
            })
        })
        .unwrap_or_else(|| op::Expr::constant(Value::Unit))
}

fn circus_action(cx: &Arc<Cx>, p: &Arc<Proc>, env: &Env, schema: &Arc<Schema>) -> Action {
    match &p.kind {
        ProcKind::Skip => circus::skip(),
        ProcKind::Stop => circus::stop(),
        ProcKind::Div => Action::new(|_| div()),
        ProcKind::Call(name, args) => {
            let (cx, name, args, env) = (cx.clone(), name.clone(), args.clone(), env.clone());
            Action::new(move |s| match eval_all(&scope(&cx, &env, Some(&s)), &args) {
                Ok(vs) => map(call(&cx, &name, vs), move |_| s.clone()),
                Err(e) => failed("process arguments", &e.message),
            })
        }
        ProcKind::Prefix { event, comm, body } => {
            let chan = cx.channels.get(&event.chan.name).expect("checked channel").clone();
            match comm {
                Comm::Sync | Comm::Out(_) => {
                    let last = match comm {
                        Comm::Out(e) => Some(e),
                        _ => None,
                    };
                    let payload = packed_expr(cx, event, last, env, schema);
                    circus::output_prefix(&chan, payload, circus_action(cx, body, env, schema))
                }
                Comm::In { var, domain } => {
                    let (cx, event, domain, env) = (cx.clone(), event.clone(), domain.clone(), env.clone());
                    let (body, var, schema) = (body.clone(), var.name.clone(), schema.clone());
                    let n = event.fields.len();
                    Action::new(move |s| {
                        let sc = scope(&cx, &env, Some(&s));
                        let prepared = eval_all(&sc, &event.fields).and_then(|fields| {
                            let ds = input_domain(&cx, &event, domain.as_ref(), &sc)?;
                            Ok(ds
                                .into_iter()
                                .map(|d| {
                                    let mut parts = fields.clone();
                                    parts.push(d);
                                    pack(parts)
                                })
                                .collect::<Vec<_>>())
                        });
                        let payloads = match prepared {
                            Ok(p) => p,
                            Err(e) => return failed(&format!("input on {}", chan.name), &e.message),
                        };
                        let (cx, body, var, env, schema) =
                            (cx.clone(), body.clone(), var.clone(), env.clone(), schema.clone());
                        circus::input_prefix(&chan, payloads, move |v| {
                            let env = env.bind(var.clone(), last_component(v, n));
                            circus_action(&cx, &body, &env, &schema)
                        })
                        .run(s)
                    })
                }
            }
        }
        ProcKind::Guarded(b, body) => {
            circus::guard(state_expr(cx, b, env, schema), &circus_action(cx, body, env, schema))
        }
        ProcKind::Choice(a, b) => {
            circus::extchoice(&circus_action(cx, a, env, schema), &circus_action(cx, b, env, schema))
        }
        ProcKind::CircusPar {
            left,
            ns1,
            sync,
            ns2,
            right,
        } => {
            let names = |ns: &[Ident]| Lens::fields(ns.iter().map(|n| n.name.clone()));
            let built = event_set(cx, sync, env).map_err(|e| e.message).and_then(|es| {
                circus::par(
                    &circus_action(cx, left, env, schema),
                    names(ns1),
                    es,
                    names(ns2),
                    &circus_action(cx, right, env, schema),
                )
                .map_err(|e| e.to_string())
            });
            built.unwrap_or_else(|msg| Action::new(move |_| failed("parallel composition", &msg)))
        }
        ProcKind::Hide(a, es) => match event_set(cx, es, env) {
            Ok(es) => circus::hide(&circus_action(cx, a, env, schema), es),
            Err(e) => Action::new(move |_| failed("hiding", &e.message)),
        },
        ProcKind::Seq(a, b) => circus_action(cx, a, env, schema).seq(&circus_action(cx, b, env, schema)),
        ProcKind::Assign(xs, es) => {
            let sigma = xs.iter().zip(es).fold(Subst::id(), |sigma, (x, e)| {
                sigma.with(Lens::field(x.name.clone()), state_expr(cx, e, env, schema))
            });
            circus::assigns(sigma)
        }
        ProcKind::Loop(body) => circus::loop_action(&circus_action(cx, body, env, schema)),
        ProcKind::While(b, body) => {
            circus::while_action(state_expr(cx, b, env, schema), &circus_action(cx, body, env, schema))
        }
        ProcKind::Return(_)
        | ProcKind::Inp(..)
        | ProcKind::Outp(..)
        | ProcKind::GuardStmt(_)
        | ProcKind::Par(..)
        | ProcKind::Interleave(..)
        | ProcKind::RepInterleave { .. }
        | ProcKind::Do(_)
        | ProcKind::LoopFrom { .. } => unreachable!("plain construct in a state-based process"),
    }
}
