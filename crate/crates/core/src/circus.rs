//! Circus actions: Kleisli trees over a state space.
//!
//! An action maps an initial state to an interaction tree that returns the
//! final state. Visible nodes built by communication prefixes carry a note
//! rendering the state at that point. Evaluation errors (an ill-typed
//! expression, an output outside the channel's domain) deadlock with a note
//! describing the error.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::csp::{self, EventSet};
use crate::itree::{bind, loop_, while_, ITree, KTree, Node};
use crate::optics::{lens_indep, lens_override, ChanDecl, Expr, Lens, OpticsError, StateSpace, Subst, Value};
use crate::pfun::PFun;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircusError {
    #[error("name sets {{{left}}} and {{{right}}} overlap")]
    NotIndependent { left: String, right: String },
}

#[derive(Clone)]
pub struct Action(KTree<StateSpace, StateSpace>);

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Action(..)")
    }
}

fn failed(context: &str, err: OpticsError) -> ITree<StateSpace> {
    let msg = format!("{context}: {err}");
    log::warn!("{msg}");
    ITree::stop_noted(msg)
}

fn state_note(s: &StateSpace) -> Option<String> {
    (!s.values().is_empty()).then(|| s.to_string())
}

fn noted_vis(menu: PFun<crate::optics::Event, ITree<StateSpace>>, s: &StateSpace) -> ITree<StateSpace> {
    match state_note(s) {
        Some(n) => ITree::vis_noted(menu, n),
        None => ITree::vis(menu),
    }
}

impl Action {
    pub fn new(f: impl Fn(StateSpace) -> ITree<StateSpace> + Send + Sync + 'static) -> Self {
        Action(KTree::new(f))
    }

    pub fn from_ktree(k: KTree<StateSpace, StateSpace>) -> Self {
        Action(k)
    }

    pub fn ktree(&self) -> &KTree<StateSpace, StateSpace> {
        &self.0
    }

    pub fn run(&self, s: StateSpace) -> ITree<StateSpace> {
        self.0.apply(s)
    }

    /// `P ; Q`.
    pub fn seq(&self, next: &Action) -> Action {
        Action(self.0.then(&next.0))
    }
}

/// `⟨σ⟩`.
pub fn assigns(sigma: Subst) -> Action {
    Action::new(move |s| match sigma.apply(&s) {
        Ok(s2) => ITree::ret(s2),
        Err(e) => failed("assignment", e),
    })
}

/// `x := e`.
pub fn assign(x: Lens, e: Expr) -> Action {
    assigns(Subst::assign(x, e))
}

pub fn skip() -> Action {
    Action::new(ITree::ret)
}

pub fn stop() -> Action {
    Action::new(|_| ITree::stop())
}

/// `c?x:A → F(x)`.
pub fn input_prefix(
    chan: &ChanDecl,
    domain: Vec<Value>,
    body: impl Fn(Value) -> Action + Send + Sync + 'static,
) -> Action {
    let chan = chan.clone();
    let body = Arc::new(body);
    Action::new(move |s| {
        let menu = match csp::inp(&chan, domain.iter().cloned()).force() {
            Node::Vis(m) => m.map_with_key(|_, t| match t.force() {
                Node::Ret(v) => body(v.clone()).run(s.clone()),
                _ => unreachable!("inp continues with Ret"),
            }),
            _ => unreachable!("inp is visible"),
        };
        noted_vis(menu, &s)
    })
}

/// `c!e → P`.
pub fn output_prefix(chan: &ChanDecl, e: Expr, p: Action) -> Action {
    let chan = chan.clone();
    Action::new(move |s| {
        let v = match e.eval(&s) {
            Ok(v) => v,
            Err(err) => return failed(&format!("output on {}", chan.name), err),
        };
        match csp::outp(&chan, v) {
            Ok(t) => {
                let Node::Vis(m) = t.force() else {
                    unreachable!("outp is visible")
                };
                let s2 = s.clone();
                let p = p.clone();
                noted_vis(m.map_values(move |_| p.run(s2.clone())), &s)
            }
            Err(err) => failed("output", err),
        }
    })
}

/// `P □ Q`.
pub fn extchoice(p: &Action, q: &Action) -> Action {
    let (p, q) = (p.clone(), q.clone());
    Action::new(move |s| csp::extchoice(p.run(s.clone()), q.run(s)))
}

/// `b & P`.
pub fn guard(b: Expr, p: &Action) -> Action {
    let p = p.clone();
    Action::new(move |s| match b.eval(&s) {
        Ok(Value::Bool(true)) => p.run(s),
        Ok(Value::Bool(false)) => ITree::stop(),
        Ok(other) => failed(
            "guard",
            OpticsError::KindMismatch {
                context: "guard".into(),
                expected: crate::optics::Kind::Bool,
                found: other,
            },
        ),
        Err(err) => failed("guard", err),
    })
}

/// `P ⟦ns₁ | E | ns₂⟧ Q`: each side owns its name set; the final state takes
/// `ns₁` from the left, `ns₂` from the right and the rest from the start.
pub fn par(p: &Action, ns1: Lens, sync: EventSet, ns2: Lens, q: &Action) -> Result<Action, CircusError> {
    if !lens_indep(&ns1, &ns2) {
        let names = |l: &Lens| {
            l.field_names()
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        return Err(CircusError::NotIndependent {
            left: names(&ns1),
            right: names(&ns2),
        });
    }
    let (p, q) = (p.clone(), q.clone());
    let (ns1, ns2) = (Arc::new(ns1), Arc::new(ns2));
    Ok(Action::new(move |s| {
        let (ns1, ns2, s0) = (ns1.clone(), ns2.clone(), s.clone());
        let merge = KTree::new(move |(s1, s2): (StateSpace, StateSpace)| {
            match lens_override(&s0, &s1, &ns1).and_then(|m| lens_override(&m, &s2, &ns2)) {
                Ok(m) => ITree::ret(m),
                Err(e) => failed("parallel merge", e),
            }
        });
        bind(csp::gpar(p.run(s.clone()), sync.clone(), q.run(s)), merge)
    }))
}

/// `P \ A`.
pub fn hide(p: &Action, hidden: EventSet) -> Action {
    let p = p.clone();
    Action::new(move |s| csp::hide(p.run(s), hidden.clone()))
}

/// `loop P`.
pub fn loop_action(p: &Action) -> Action {
    Action(loop_(p.0.clone()))
}

/// `while b do P`; a condition that fails to evaluate ends the loop with a
/// logged warning.
pub fn while_action(b: Expr, p: &Action) -> Action {
    Action(while_(
        move |s: &StateSpace| match b.eval(s) {
            Ok(Value::Bool(v)) => v,
            Ok(other) => {
                log::warn!("while condition is not boolean: {other}");
                false
            }
            Err(err) => {
                log::warn!("while condition: {err}");
                false
            }
        },
        p.0.clone(),
    ))
}
