//! Monadic structure and iteration.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use super::memo::Memo;
use super::{ITree, Node, Output, Step};
use crate::optics::Event;
use crate::pfun::PFun;

/// A Kleisli tree `R → ITree<S>`.
pub struct KTree<R, S>(Arc<dyn Fn(R) -> ITree<S> + Send + Sync>);

impl<R, S> Clone for KTree<R, S> {
    fn clone(&self) -> Self {
        KTree(self.0.clone())
    }
}

impl<R, S> fmt::Debug for KTree<R, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KTree(..)")
    }
}

impl<R: Output, S: Output> KTree<R, S> {
    pub fn new(f: impl Fn(R) -> ITree<S> + Send + Sync + 'static) -> Self {
        KTree(Arc::new(f))
    }

    pub fn apply(&self, r: R) -> ITree<S> {
        (self.0)(r)
    }

    /// Kleisli composition: `self ⨾ next`.
    pub fn then<T: Output>(&self, next: &KTree<S, T>) -> KTree<R, T> {
        let (f, g) = (self.clone(), next.clone());
        KTree::new(move |r| bind(f.apply(r), g.clone()))
    }

    /// `λ_. t`.
    pub fn constant(t: ITree<S>) -> Self {
        KTree::new(move |_| t.clone())
    }
}

impl<R: Output> KTree<R, R> {
    /// `Ret`, the unit of Kleisli composition.
    pub fn ret() -> Self {
        KTree::new(ITree::ret)
    }
}

struct BindCtx<R, S> {
    k: KTree<R, S>,
    memo: Memo<S>,
}

/// `p ⤜ k`.
pub fn bind<R: Output, S: Output>(p: ITree<R>, k: KTree<R, S>) -> ITree<S> {
    let ctx = Arc::new(BindCtx { k, memo: Memo::new() });
    bind_in(&ctx, p)
}

fn bind_in<R: Output, S: Output>(ctx: &Arc<BindCtx<R, S>>, p: ITree<R>) -> ITree<S> {
    if let Some(hit) = ctx.memo.lookup(&[&p]) {
        return hit;
    }
    let c = ctx.clone();
    let raw = p.clone();
    let out = ITree::from_fn(move |me| {
        let p = raw.target();
        if let Some(hit) = c.memo.lookup_or_insert(&[&p], me) {
            return Step::Forward(hit);
        }
        match p.force() {
            Node::Ret(r) => Step::Forward(c.k.apply(r.clone())),
            Node::Sil(q) => Step::node(Node::Sil(bind_in(&c, q.clone()))),
            Node::Vis(m) => Step::Node(Node::Vis(m.map_values(|q| bind_in(&c, q.clone()))), p.note().cloned()),
        }
    });
    ctx.memo.insert(&[&p], &out);
    out
}

/// `p ⤜ (Ret ∘ f)`.
pub fn map<R: Output, S: Output>(p: ITree<R>, f: impl Fn(R) -> S + Send + Sync + 'static) -> ITree<S> {
    bind(p, KTree::new(move |r| ITree::ret(f(r))))
}

/// `div = Sil div`, one shared node per return type.
pub fn div<R: Send + Sync + 'static>() -> ITree<R> {
    static DIVS: OnceLock<Mutex<HashMap<TypeId, Box<dyn Any + Send + Sync>>>> = OnceLock::new();
    let mut divs = DIVS
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|e| e.into_inner());
    divs.entry(TypeId::of::<R>())
        .or_insert_with(|| Box::new(ITree::<R>::cyclic(|me| Node::Sil(me.clone()))))
        .downcast_ref::<ITree<R>>()
        .expect("div cache keyed by type")
        .clone()
}

/// `run E`: offers every event of `E` forever.
pub fn run<R: Send + Sync + 'static>(events: impl IntoIterator<Item = Event>) -> ITree<R> {
    let events: Vec<Event> = events.into_iter().collect();
    ITree::cyclic(|me| Node::Vis(PFun::from_alist(events.into_iter().map(|e| (e, me.clone())))))
}

struct Loop<S> {
    cond: Box<dyn Fn(&S) -> bool + Send + Sync>,
    body: KTree<S, S>,
    /// Iteration bodies by starting value, so that a value seen again yields
    /// the same node. The table keeps its trees alive, which makes the loop
    /// a reference cycle; it is cleared when it reaches `MAX_ITERATIONS`.
    iterations: Mutex<HashMap<S, ITree<S>>>,
}

const MAX_ITERATIONS: usize = 1 << 16;

fn loop_step<S: Output>(l: &Arc<Loop<S>>, s: S) -> ITree<S> {
    if !(l.cond)(&s) {
        return ITree::ret(s);
    }
    let mut its = l.iterations.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(t) = its.get(&s) {
        return ITree::sil(t.clone());
    }
    if its.len() >= MAX_ITERATIONS {
        its.clear();
    }
    let again = l.clone();
    let start = s.clone();
    let body = ITree::lazy(move || {
        let next = again.clone();
        bind(again.body.apply(start), KTree::new(move |s| loop_step(&next, s)))
    });
    its.insert(s, body.clone());
    ITree::sil(body)
}

/// `while b do P`; each iteration starts with a τ step.
pub fn while_<S: Output>(cond: impl Fn(&S) -> bool + Send + Sync + 'static, body: KTree<S, S>) -> KTree<S, S> {
    let l = Arc::new(Loop {
        cond: Box::new(cond),
        body,
        iterations: Mutex::new(HashMap::new()),
    });
    KTree::new(move |s| loop_step(&l, s))
}

/// `loop P = while true do P`.
pub fn loop_<S: Output>(body: KTree<S, S>) -> KTree<S, S> {
    while_(|_| true, body)
}

/// `iter P`: repeats `P` forever. The result is a cyclic tree, so a loop that
/// performs no visible event is recognisably divergent.
pub fn iter<R: Output, S: Output>(p: ITree<R>) -> ITree<S> {
    ITree::cyclic(|me| {
        let again = me.clone();
        Node::Sil(bind(p, KTree::constant(again)))
    })
}
