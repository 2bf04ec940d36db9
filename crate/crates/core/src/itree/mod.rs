//! Interaction trees.
//!
//! An [`ITree`] is a handle to a lazily computed node: `Ret` (terminate with a
//! value), `Sil` (an internal τ step) or `Vis` (a finite menu of events, each
//! leading to a continuation). Children are suspensions that are forced on
//! demand, at most once; every later force returns the same node.
//!
//! A suspension may also resolve to another tree instead of producing a node
//! of its own (`Ret r ⤜ K` simply *is* `K r`). Forcing follows such
//! forwards, so the identity of a tree is the identity of the cell that
//! finally holds its node. Node identity is what lets the bounded checkers
//! recognise cycles such as `div` or a hidden loop.
//!
//! Cyclic trees (`div`, `run`, `iter`) hold strong references to themselves
//! and are never freed.

mod bisim;
mod combinators;
pub(crate) mod memo;
mod stable;

use std::cell::{Cell as StdCell, RefCell};
use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;
use std::sync::{Arc, Mutex, OnceLock};

use crate::optics::Event;
use crate::pfun::PFun;

pub use bisim::{bisim_to_depth, weak_bisim_to_depth, Counterexample, Mismatch, PathStep, Verdict};
pub use combinators::{bind, div, iter, loop_, map, run, while_, KTree};
pub use stable::{stabilise, stabilises_within, StabResult, Stabilisation};

/// Return types of interaction trees.
pub trait Output: Clone + Eq + Hash + Ord + fmt::Debug + Send + Sync + 'static {}

impl<T> Output for T where T: Clone + Eq + Hash + Ord + fmt::Debug + Send + Sync + 'static {}

/// Free-text annotation attached to a visible node, e.g. a rendering of the
/// state at that point. Ignored by every equivalence.
pub type Note = Arc<str>;

/// Default visible+τ depth for bounded checks.
pub const DEFAULT_DEPTH: usize = 64;
/// Default τ budget for bounded checks.
pub const DEFAULT_FUEL: usize = 1000;

pub enum Node<R> {
    Ret(R),
    Sil(ITree<R>),
    Vis(PFun<Event, ITree<R>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Ret,
    Sil,
    Vis,
}

impl<R> Node<R> {
    pub fn kind(&self) -> NodeKind {
        match self {
            Node::Ret(_) => NodeKind::Ret,
            Node::Sil(_) => NodeKind::Sil,
            Node::Vis(_) => NodeKind::Vis,
        }
    }

    pub fn is_stable(&self) -> bool {
        !matches!(self, Node::Sil(_))
    }
}

/// What a suspension produces when forced.
pub(crate) enum Step<R> {
    Node(Node<R>, Option<Note>),
    Forward(ITree<R>),
}

impl<R> Step<R> {
    pub(crate) fn node(n: Node<R>) -> Self {
        Step::Node(n, None)
    }
}

type Thunk<R> = Box<dyn FnOnce(&ITree<R>) -> Step<R> + Send>;

enum Resolved<R> {
    Here {
        node: Node<R>,
        note: Option<Note>,
    },
    /// Points at a tree that is itself `Here`.
    There(ITree<R>),
}

pub(crate) struct Cell<R> {
    resolved: OnceLock<Resolved<R>>,
    thunk: Mutex<Option<Thunk<R>>>,
}

pub struct ITree<R>(Arc<Cell<R>>);

impl<R> Clone for ITree<R> {
    fn clone(&self) -> Self {
        ITree(self.0.clone())
    }
}

thread_local! {
    static FORCED: StdCell<u64> = const { StdCell::new(0) };
    static IN_PROGRESS: RefCell<HashSet<usize>> = RefCell::new(HashSet::new());
}

/// Number of suspensions evaluated on this thread so far.
pub fn forced_count() -> u64 {
    FORCED.with(|c| c.get())
}

impl<R: Send + Sync + 'static> ITree<R> {
    fn resolved(resolved: Resolved<R>) -> Self {
        ITree(Arc::new(Cell {
            resolved: OnceLock::from(resolved),
            thunk: Mutex::new(None),
        }))
    }

    pub fn ret(v: R) -> Self {
        Self::resolved(Resolved::Here {
            node: Node::Ret(v),
            note: None,
        })
    }

    pub fn sil(t: ITree<R>) -> Self {
        Self::resolved(Resolved::Here {
            node: Node::Sil(t),
            note: None,
        })
    }

    pub fn vis(choices: PFun<Event, ITree<R>>) -> Self {
        Self::resolved(Resolved::Here {
            node: Node::Vis(choices),
            note: None,
        })
    }

    pub fn vis_noted(choices: PFun<Event, ITree<R>>, note: impl Into<Note>) -> Self {
        Self::resolved(Resolved::Here {
            node: Node::Vis(choices),
            note: Some(note.into()),
        })
    }

    /// `stop = Vis {↦}`.
    pub fn stop() -> Self {
        Self::vis(PFun::empty())
    }

    /// Deadlock carrying a diagnostic note.
    pub fn stop_noted(note: impl Into<Note>) -> Self {
        Self::vis_noted(PFun::empty(), note)
    }

    /// `τⁿ t`.
    pub fn taus(n: usize, t: ITree<R>) -> Self {
        (0..n).fold(t, |t, _| ITree::sil(t))
    }

    /// A tree computed on first force by `f`.
    pub fn lazy(f: impl FnOnce() -> ITree<R> + Send + 'static) -> Self {
        Self::from_fn(move |_| Step::Forward(f()))
    }

    pub(crate) fn from_fn(f: impl FnOnce(&ITree<R>) -> Step<R> + Send + 'static) -> Self {
        ITree(Arc::new(Cell {
            resolved: OnceLock::new(),
            thunk: Mutex::new(Some(Box::new(f))),
        }))
    }

    /// Builds a node that may refer to itself.
    pub(crate) fn cyclic(f: impl FnOnce(&ITree<R>) -> Node<R>) -> Self {
        let me = ITree(Arc::new(Cell {
            resolved: OnceLock::new(),
            thunk: Mutex::new(None),
        }));
        let node = f(&me);
        let fresh = me.0.resolved.set(Resolved::Here { node, note: None }).is_ok();
        debug_assert!(fresh);
        me
    }

    fn resolve(&self) -> &Resolved<R> {
        if let Some(r) = self.0.resolved.get() {
            return r;
        }
        let addr = self.addr();
        let reentrant = IN_PROGRESS.with(|s| s.borrow().contains(&addr));
        assert!(
            !reentrant,
            "unguarded recursion: an interaction tree was forced while computing itself"
        );
        self.0.resolved.get_or_init(|| {
            IN_PROGRESS.with(|s| s.borrow_mut().insert(addr));
            let thunk = self
                .0
                .thunk
                .lock()
                .unwrap_or_else(|e| e.into_inner())
                .take()
                .expect("suspension already taken");
            FORCED.with(|c| c.set(c.get() + 1));
            let step = thunk(self);
            let out = match step {
                Step::Node(node, note) => Resolved::Here { node, note },
                Step::Forward(t) => Resolved::There(t.target()),
            };
            IN_PROGRESS.with(|s| s.borrow_mut().remove(&addr));
            out
        })
    }

    /// Forces the tree and returns its node.
    pub fn force(&self) -> &Node<R> {
        match self.resolve() {
            Resolved::Here { node, .. } => node,
            Resolved::There(t) => t.force(),
        }
    }

    /// The note attached to the forced node, if any.
    pub fn note(&self) -> Option<&Note> {
        match self.resolve() {
            Resolved::Here { note, .. } => note.as_ref(),
            Resolved::There(t) => t.note(),
        }
    }

    /// The tree that holds this tree's node (forces it).
    pub fn target(&self) -> ITree<R> {
        match self.resolve() {
            Resolved::Here { .. } => self.clone(),
            Resolved::There(t) => t.clone(),
        }
    }

    /// Identity of the forced node.
    pub fn id(&self) -> usize {
        match self.resolve() {
            Resolved::Here { .. } => self.addr(),
            Resolved::There(t) => t.addr(),
        }
    }

    /// Whether both trees force to the identical node.
    pub fn same(&self, other: &ITree<R>) -> bool {
        self.id() == other.id()
    }

    pub fn kind(&self) -> NodeKind {
        self.force().kind()
    }

    pub fn is_forced(&self) -> bool {
        self.0.resolved.get().is_some()
    }

    pub(crate) fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as *const () as usize
    }

    pub(crate) fn cell(&self) -> &Arc<Cell<R>> {
        &self.0
    }

    pub(crate) fn from_cell(cell: Arc<Cell<R>>) -> Self {
        ITree(cell)
    }
}

impl<R: fmt::Debug> fmt::Debug for ITree<R> {
    /// Shows the root only, without forcing anything.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.resolved.get() {
            None => write!(f, "<suspended>"),
            Some(Resolved::There(t)) => t.fmt(f),
            Some(Resolved::Here { node, .. }) => match node {
                Node::Ret(r) => write!(f, "Ret({r:?})"),
                Node::Sil(_) => write!(f, "Sil(..)"),
                Node::Vis(m) => {
                    write!(f, "Vis[")?;
                    for (i, e) in m.keys().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{e}")?;
                    }
                    write!(f, "]")
                }
            },
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn ev(name: &str) -> Event {
        Event::sync(name)
    }

    pub(crate) fn prefix<R: Output>(name: &str, k: ITree<R>) -> ITree<R> {
        ITree::vis(PFun::singleton(ev(name), k))
    }

    #[test]
    fn stop_and_skip() {
        let stop = ITree::<()>::stop();
        assert!(matches!(stop.force(), Node::Vis(m) if m.is_empty()));
        assert!(matches!(ITree::ret(()).force(), Node::Ret(())));
    }

    #[test]
    fn sil_wraps_child() {
        let t = ITree::sil(ITree::ret(7));
        match t.force() {
            Node::Sil(c) => assert!(matches!(c.force(), Node::Ret(7))),
            _ => panic!("expected Sil"),
        }
    }

    #[test]
    fn forcing_is_memoized() {
        let before = forced_count();
        let t = ITree::lazy(|| ITree::ret(1));
        let a = t.force() as *const Node<i32>;
        let b = t.force() as *const Node<i32>;
        assert_eq!(a, b);
        assert_eq!(forced_count() - before, 1);
    }

    #[test]
    fn forwarding_shares_identity() {
        let inner = ITree::sil(ITree::ret(3));
        let i2 = inner.clone();
        let outer = ITree::lazy(move || i2);
        assert!(outer.same(&inner));
        assert_eq!(outer.id(), inner.id());
    }

    #[test]
    fn notes_survive_forwarding() {
        let t = ITree::<()>::vis_noted(PFun::empty(), "x = 1");
        let t2 = t.clone();
        let f = ITree::lazy(move || t2);
        assert_eq!(f.note().map(|n| &**n), Some("x = 1"));
    }

    #[test]
    #[should_panic(expected = "unguarded recursion")]
    fn self_forcing_is_reported() {
        let slot: Arc<Mutex<Option<ITree<()>>>> = Arc::new(Mutex::new(None));
        let s2 = slot.clone();
        let t = ITree::lazy(move || s2.lock().unwrap().clone().unwrap());
        *slot.lock().unwrap() = Some(t.clone());
        t.force();
    }

    #[test]
    fn concurrent_forcing_agrees() {
        let t = ITree::lazy(|| ITree::vis(PFun::singleton(ev("a"), ITree::ret(1))));
        let ids: Vec<usize> = std::thread::scope(|s| {
            let hs: Vec<_> = (0..4).map(|_| s.spawn(|| t.id())).collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert!(ids.windows(2).all(|w| w[0] == w[1]));
    }
}
