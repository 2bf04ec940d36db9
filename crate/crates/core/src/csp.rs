//! Deterministic CSP operators on interaction trees.
//!
//! Choice, parallel composition and hiding never introduce nondeterminism:
//! where two branches would offer the same event independently, that event
//! is withdrawn; where hiding would have to choose between two hidden events,
//! the tree deadlocks.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::itree::memo::Memo;
use crate::itree::{bind, ITree, KTree, Node, Note, Output, Step};
use crate::optics::{ChanDecl, Event, OpticsError, Value};
use crate::pfun::PFun;

/// A set of events: explicitly listed events plus every event of the listed
/// channels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventSet {
    events: BTreeSet<Event>,
    channels: BTreeSet<Arc<str>>,
}

impl EventSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn of_events(events: impl IntoIterator<Item = Event>) -> Self {
        EventSet {
            events: events.into_iter().collect(),
            channels: BTreeSet::new(),
        }
    }

    /// `{| c₁, c₂ |}`.
    pub fn of_channels<S: Into<Arc<str>>>(channels: impl IntoIterator<Item = S>) -> Self {
        EventSet {
            events: BTreeSet::new(),
            channels: channels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn with_event(mut self, e: Event) -> Self {
        self.events.insert(e);
        self
    }

    pub fn with_channel(mut self, c: impl Into<Arc<str>>) -> Self {
        self.channels.insert(c.into());
        self
    }

    pub fn contains(&self, e: &Event) -> bool {
        self.channels.contains(&e.channel) || self.events.contains(e)
    }

    pub fn union(&self, other: &EventSet) -> EventSet {
        EventSet {
            events: self.events.union(&other.events).cloned().collect(),
            channels: self.channels.union(&other.channels).cloned().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty() && self.channels.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.events.iter()
    }

    pub fn channels(&self) -> impl Iterator<Item = &Arc<str>> {
        self.channels.iter()
    }
}

impl fmt::Display for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let evs: Vec<String> = self.events.iter().map(|e| e.to_string()).collect();
        let chans: Vec<&str> = self.channels.iter().map(|c| &**c).collect();
        match (evs.is_empty(), chans.is_empty()) {
            (true, true) => write!(f, "{{}}"),
            (true, false) => write!(f, "{{| {} |}}", chans.join(", ")),
            (false, true) => write!(f, "{{{}}}", evs.join(", ")),
            (false, false) => write!(f, "{{| {} |}} ∪ {{{}}}", chans.join(", "), evs.join(", ")),
        }
    }
}

impl FromIterator<Event> for EventSet {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> Self {
        EventSet::of_events(iter)
    }
}

/// `e → P`.
pub fn prefix<R: Output>(e: Event, p: ITree<R>) -> ITree<R> {
    ITree::vis(PFun::singleton(e, p))
}

/// `inp c A`: offers `c.x` for each admissible `x ∈ A` and returns the value
/// received.
pub fn inp(chan: &ChanDecl, values: impl IntoIterator<Item = Value>) -> ITree<Value> {
    let prism = chan.prism();
    let menu = PFun::from_alist(
        values
            .into_iter()
            .filter(|v| chan.admits(v))
            .map(|v| (prism.build(v.clone()), ITree::ret(v))),
    );
    ITree::vis(menu)
}

/// `outp c v`.
pub fn outp(chan: &ChanDecl, v: Value) -> Result<ITree<()>, OpticsError> {
    if !chan.admits(&v) {
        return Err(OpticsError::KindMismatch {
            context: format!("output on channel {}", chan.name),
            expected: chan.kind.clone(),
            found: v,
        });
    }
    Ok(prefix(chan.prism().build(v), ITree::ret(())))
}

/// `sync c` for a channel without data.
pub fn sync(channel: impl Into<Arc<str>>) -> ITree<()> {
    prefix(Event::sync(channel), ITree::ret(()))
}

/// `guard b`: terminates when `b` holds, deadlocks otherwise.
pub fn guard(b: bool) -> ITree<()> {
    if b {
        ITree::ret(())
    } else {
        ITree::stop()
    }
}

fn join_notes(a: Option<&Note>, b: Option<&Note>) -> Option<Note> {
    match (a, b) {
        (Some(a), Some(b)) if a == b => Some(a.clone()),
        (Some(a), Some(b)) => Some(format!("{a} | {b}").into()),
        (Some(n), None) | (None, Some(n)) => Some(n.clone()),
        (None, None) => None,
    }
}

/// `F ⊙ G`: the union of both menus minus the events they have in common.
pub fn menu_choice<V: Clone>(f: &PFun<Event, V>, g: &PFun<Event, V>) -> PFun<Event, V> {
    f.merge_excl(g)
}

struct ChoiceCtx<R> {
    memo: Memo<R>,
}

/// `P □ Q`.
pub fn extchoice<R: Output>(p: ITree<R>, q: ITree<R>) -> ITree<R> {
    let ctx = Arc::new(ChoiceCtx { memo: Memo::new() });
    choice_in(&ctx, p, q)
}

/// Right fold of `□`; `stop` for no operands.
pub fn extchoice_all<R: Output>(ps: impl IntoIterator<Item = ITree<R>>) -> ITree<R> {
    let ps: Vec<ITree<R>> = ps.into_iter().collect();
    ps.into_iter()
        .rev()
        .reduce(|acc, p| extchoice(p, acc))
        .unwrap_or_else(ITree::stop)
}

fn choice_in<R: Output>(ctx: &Arc<ChoiceCtx<R>>, p: ITree<R>, q: ITree<R>) -> ITree<R> {
    if let Some(hit) = ctx.memo.lookup(&[&p, &q]) {
        return hit;
    }
    let c = ctx.clone();
    let (rp, rq) = (p.clone(), q.clone());
    let out = ITree::from_fn(move |me| {
        let (p, q) = (rp.target(), rq.target());
        if let Some(hit) = c.memo.lookup_or_insert(&[&p, &q], me) {
            return Step::Forward(hit);
        }
        match (p.force(), q.force()) {
            (Node::Sil(p2), _) => Step::node(Node::Sil(choice_in(&c, p2.clone(), q.clone()))),
            (_, Node::Sil(q2)) => Step::node(Node::Sil(choice_in(&c, p.clone(), q2.clone()))),
            (Node::Vis(f), Node::Vis(g)) => Step::Node(Node::Vis(menu_choice(f, g)), join_notes(p.note(), q.note())),
            (Node::Ret(x), Node::Ret(y)) => {
                if x == y {
                    Step::Forward(p.clone())
                } else {
                    Step::node(Node::Vis(PFun::empty()))
                }
            }
            (Node::Ret(_), Node::Vis(_)) => Step::Forward(p.clone()),
            (Node::Vis(_), Node::Ret(_)) => Step::Forward(q.clone()),
        }
    });
    ctx.memo.insert(&[&p, &q], &out);
    out
}

/// Tag of a merged parallel event.
pub enum Side<A, B> {
    Left(A),
    Right(B),
    Both(A, B),
}

/// `merge_E(F, G)`.
pub fn merge_menus<A: Clone, B: Clone>(
    f: &PFun<Event, A>,
    g: &PFun<Event, B>,
    sync: &EventSet,
) -> PFun<Event, Side<A, B>> {
    let mut out = Vec::new();
    for (e, a) in f.iter() {
        match g.get(e) {
            None if !sync.contains(e) => out.push((e.clone(), Side::Left(a.clone()))),
            Some(b) if sync.contains(e) => out.push((e.clone(), Side::Both(a.clone(), b.clone()))),
            _ => {}
        }
    }
    for (e, b) in g.iter() {
        if !f.contains_key(e) && !sync.contains(e) {
            out.push((e.clone(), Side::Right(b.clone())));
        }
    }
    PFun::from_alist(out)
}

impl<A: Clone, B: Clone> Clone for Side<A, B> {
    fn clone(&self) -> Self {
        match self {
            Side::Left(a) => Side::Left(a.clone()),
            Side::Right(b) => Side::Right(b.clone()),
            Side::Both(a, b) => Side::Both(a.clone(), b.clone()),
        }
    }
}

struct ParCtx<R, S> {
    sync: EventSet,
    memo: Memo<(R, S)>,
}

/// `P ∥_E Q`, returning both results.
pub fn gpar<R: Output, S: Output>(p: ITree<R>, sync: EventSet, q: ITree<S>) -> ITree<(R, S)> {
    let ctx = Arc::new(ParCtx {
        sync,
        memo: Memo::new(),
    });
    par_in(&ctx, p, q)
}

fn par_in<R: Output, S: Output>(ctx: &Arc<ParCtx<R, S>>, p: ITree<R>, q: ITree<S>) -> ITree<(R, S)> {
    if let Some(hit) = ctx.memo.lookup(&[&p, &q]) {
        return hit;
    }
    let c = ctx.clone();
    let (rp, rq) = (p.clone(), q.clone());
    let out = ITree::from_fn(move |me| {
        let (p, q) = (rp.target(), rq.target());
        if let Some(hit) = c.memo.lookup_or_insert(&[&p, &q], me) {
            return Step::Forward(hit);
        }
        let note = join_notes(p.note(), q.note());
        match (p.force(), q.force()) {
            (Node::Sil(p2), _) => Step::node(Node::Sil(par_in(&c, p2.clone(), q.clone()))),
            (_, Node::Sil(q2)) => Step::node(Node::Sil(par_in(&c, p.clone(), q2.clone()))),
            (Node::Vis(f), Node::Vis(g)) => {
                let menu = merge_menus(f, g, &c.sync).map_values(|side| match side {
                    Side::Left(p2) => par_in(&c, p2.clone(), q.clone()),
                    Side::Right(q2) => par_in(&c, p.clone(), q2.clone()),
                    Side::Both(p2, q2) => par_in(&c, p2.clone(), q2.clone()),
                });
                Step::Node(Node::Vis(menu), note)
            }
            (Node::Ret(x), Node::Ret(y)) => Step::node(Node::Ret((x.clone(), y.clone()))),
            (Node::Ret(_), Node::Vis(g)) => {
                let menu = g.map_values(|q2| par_in(&c, p.clone(), q2.clone()));
                Step::Node(Node::Vis(menu), note)
            }
            (Node::Vis(f), Node::Ret(_)) => {
                let menu = f.map_values(|p2| par_in(&c, p2.clone(), q.clone()));
                Step::Node(Node::Vis(menu), note)
            }
        }
    });
    ctx.memo.insert(&[&p, &q], &out);
    out
}

/// `P ∥[E] Q`, discarding the results.
pub fn cpar<R: Output, S: Output>(p: ITree<R>, sync: EventSet, q: ITree<S>) -> ITree<()> {
    bind(gpar(p, sync, q), KTree::new(|_| ITree::ret(())))
}

/// `P ||| Q`.
pub fn interleave<R: Output, S: Output>(p: ITree<R>, q: ITree<S>) -> ITree<()> {
    cpar(p, EventSet::empty(), q)
}

struct HideCtx<R> {
    hidden: EventSet,
    memo: Memo<R>,
}

/// `P \ A`. Exactly one enabled hidden event becomes a τ step and takes
/// priority over visible events; two or more deadlock.
pub fn hide<R: Output>(p: ITree<R>, hidden: EventSet) -> ITree<R> {
    let ctx = Arc::new(HideCtx {
        hidden,
        memo: Memo::new(),
    });
    hide_in(&ctx, p)
}

fn hide_in<R: Output>(ctx: &Arc<HideCtx<R>>, p: ITree<R>) -> ITree<R> {
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
            Node::Ret(_) => Step::Forward(p.clone()),
            Node::Sil(p2) => Step::node(Node::Sil(hide_in(&c, p2.clone()))),
            Node::Vis(f) => {
                let hidden: Vec<&Event> = f.keys().filter(|e| c.hidden.contains(e)).collect();
                match hidden.as_slice() {
                    [] => Step::Node(Node::Vis(f.map_values(|p2| hide_in(&c, p2.clone()))), p.note().cloned()),
                    [e] => {
                        let next = f.get(e).expect("enabled").clone();
                        Step::node(Node::Sil(hide_in(&c, next)))
                    }
                    many => {
                        let names: Vec<String> = many.iter().map(|e| e.to_string()).collect();
                        let msg = format!("hiding {} would choose among {}", c.hidden, names.join(", "));
                        log::warn!("{msg}");
                        Step::Node(Node::Vis(PFun::empty()), Some(msg.into()))
                    }
                }
            }
        }
    });
    ctx.memo.insert(&[&p], &out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::itree::{bisim_to_depth, div, iter, stabilise, Stabilisation};
    use crate::optics::Kind;

    fn ev(n: &str) -> Event {
        Event::sync(n)
    }

    fn pre<R: Output>(n: &str, p: ITree<R>) -> ITree<R> {
        prefix(ev(n), p)
    }

    fn menu<R: Output>(t: &ITree<R>) -> Vec<String> {
        match t.force() {
            Node::Vis(m) => m.keys().map(|e| e.to_string()).collect(),
            _ => panic!("not visible"),
        }
    }

    #[test]
    fn choice_of_common_event_is_stop() {
        let t = extchoice(pre("a", ITree::ret(1)), pre("a", ITree::ret(2)));
        assert!(menu(&t).is_empty());
    }

    #[test]
    fn choice_unions_disjoint_menus() {
        let t = extchoice(pre("a", ITree::ret(1)), pre("b", ITree::ret(2)));
        assert_eq!(menu(&t), ["a", "b"]);
    }

    #[test]
    fn choice_prefers_tau_then_ret() {
        let t = extchoice(pre("a", ITree::ret(1)), ITree::sil(ITree::ret(2)));
        assert!(matches!(t.force(), Node::Sil(_)));
        let t = extchoice(pre("a", ITree::ret(1)), ITree::ret(2));
        assert!(matches!(t.force(), Node::Ret(2)));
        let t = extchoice(ITree::ret(1), ITree::ret(2));
        assert!(menu(&t).is_empty());
    }

    #[test]
    fn div_annihilates_choice() {
        let t = extchoice(div(), pre("a", ITree::ret(())));
        assert!(stabilise(&t, 100).diverges());
    }

    #[test]
    fn parallel_synchronises_on_shared_events() {
        let p = pre("a", pre("c", ITree::ret(1)));
        let q = pre("b", pre("c", ITree::ret(2)));
        let t = gpar(p, EventSet::of_events([ev("c")]), q);
        assert_eq!(menu(&t), ["a", "b"]);
        let Node::Vis(m) = t.force() else { panic!() };
        let after_a = m.get(&ev("a")).unwrap().clone();
        assert_eq!(menu(&after_a), ["b"]);
        let Node::Vis(m) = after_a.force() else { panic!() };
        let after_ab = m.get(&ev("b")).unwrap().clone();
        assert_eq!(menu(&after_ab), ["c"]);
        let Node::Vis(m) = after_ab.force() else { panic!() };
        assert!(matches!(m.get(&ev("c")).unwrap().force(), Node::Ret((1, 2))));
    }

    #[test]
    fn unsynchronised_common_event_is_withdrawn() {
        let t = interleave(pre("a", ITree::ret(())), pre("a", ITree::ret(())));
        assert!(menu(&t).is_empty());
    }

    #[test]
    fn terminated_side_waits() {
        let t = gpar(ITree::ret(0), EventSet::empty(), pre("b", ITree::ret(1)));
        let Node::Vis(m) = t.force() else { panic!() };
        assert!(matches!(m.get(&ev("b")).unwrap().force(), Node::Ret((0, 1))));
    }

    #[test]
    fn hiding_one_event_is_tau_with_priority() {
        let t = extchoice(pre("a", ITree::ret(1)), pre("b", ITree::ret(2)));
        let h = hide(t, EventSet::of_events([ev("a")]));
        match h.force() {
            Node::Sil(c) => assert!(matches!(c.force(), Node::Ret(1))),
            _ => panic!("expected τ"),
        }
    }

    #[test]
    fn hiding_two_enabled_events_deadlocks() {
        let t = extchoice(pre("a", ITree::ret(1)), pre("b", ITree::ret(2)));
        let h = hide(t, EventSet::of_events([ev("a"), ev("b")]));
        assert!(menu(&h).is_empty());
        assert!(h.note().is_some());
    }

    #[test]
    fn hidden_loop_diverges() {
        let h = hide(iter::<(), ()>(sync("e")), EventSet::of_events([ev("e")]));
        assert!(matches!(stabilise(&h, 1000), Stabilisation::Cycle { .. }));
        assert!(bisim_to_depth(&h, &div(), 64, 1000).is_true());
    }

    #[test]
    fn inp_filters_by_channel() {
        let c = ChanDecl::new("c", Kind::Int)
            .with_domain((0..4).map(Value::Int).collect())
            .unwrap();
        let t = inp(&c, [Value::Int(1), Value::Int(7), Value::Bool(true), Value::Int(1)]);
        assert_eq!(menu(&t), ["c.1"]);
        assert!(outp(&c, Value::Int(9)).is_err());
        assert_eq!(menu(&outp(&c, Value::Int(2)).unwrap()), ["c.2"]);
    }

    #[test]
    fn channel_sets_match_by_name() {
        let s = EventSet::of_channels(["rd"]).with_event(ev("x"));
        assert!(s.contains(&Event::new("rd", Value::Int(3))));
        assert!(s.contains(&ev("x")));
        assert!(!s.contains(&ev("y")));
        assert_eq!(s.to_string(), "{| rd |} ∪ {x}");
    }
}
