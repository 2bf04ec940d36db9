//! Oracles computed directly on finite trees in data form, independent of
//! the lazy kernel.

#![allow(dead_code)]

use std::collections::BTreeSet;

use itree_core::gen::FTree;
use itree_core::itree::{ITree, Node, Output};
use itree_core::optics::{Event, Value};
use itree_core::semantics::TickEvent;

/// Substitutes `k` at every leaf.
pub fn fbind(t: &FTree, k: &dyn Fn(i64) -> FTree) -> FTree {
    match t {
        FTree::Ret(v) => k(*v),
        FTree::Sil(c) => FTree::Sil(Box::new(fbind(c, k))),
        FTree::Vis(m) => FTree::Vis(m.iter().map(|(e, c)| (e.clone(), fbind(c, k))).collect()),
    }
}

pub type OTrace = Vec<TickEvent<Value>>;

fn strip(t: &FTree) -> &FTree {
    match t {
        FTree::Sil(c) => strip(c),
        other => other,
    }
}

/// Traces of a finite tree up to `len`, straight from the step relation.
pub fn ftraces(t: &FTree, len: usize) -> BTreeSet<OTrace> {
    let mut out = BTreeSet::from([vec![]]);
    if len == 0 {
        return out;
    }
    match strip(t) {
        FTree::Ret(v) => {
            out.insert(vec![TickEvent::Tick(Value::Int(*v))]);
        }
        FTree::Vis(m) => {
            for (e, c) in m {
                for mut rest in ftraces(c, len - 1) {
                    rest.insert(0, TickEvent::Ev(e.clone()));
                    out.insert(rest);
                }
            }
        }
        FTree::Sil(_) => unreachable!(),
    }
    out
}

/// Failures of a finite tree up to `len` as `(trace, enabled)`; the refusals
/// after `trace` are the sets disjoint from `enabled`.
pub fn ffailures(t: &FTree, len: usize) -> BTreeSet<(OTrace, BTreeSet<TickEvent<Value>>)> {
    let mut out = BTreeSet::new();
    match strip(t) {
        FTree::Ret(v) => {
            let tick = TickEvent::Tick(Value::Int(*v));
            out.insert((vec![], BTreeSet::from([tick.clone()])));
            if len >= 1 {
                out.insert((vec![tick], BTreeSet::new()));
            }
        }
        FTree::Vis(m) => {
            out.insert((vec![], m.iter().map(|(e, _)| TickEvent::Ev(e.clone())).collect()));
            if len >= 1 {
                for (e, c) in m {
                    for (mut tr, en) in ffailures(c, len - 1) {
                        tr.insert(0, TickEvent::Ev(e.clone()));
                        out.insert((tr, en));
                    }
                }
            }
        }
        FTree::Sil(_) => unreachable!(),
    }
    out
}

/// Forces the tree to `depth` and checks every menu has distinct events.
pub fn assert_deterministic<R: Output>(t: &ITree<R>, depth: usize) {
    let mut stack = vec![(t.clone(), 0)];
    let mut seen = std::collections::HashSet::new();
    while let Some((t, d)) = stack.pop() {
        if d > depth || !seen.insert(t.id()) {
            continue;
        }
        match t.force() {
            Node::Vis(m) => {
                let keys: BTreeSet<&Event> = m.keys().collect();
                assert_eq!(keys.len(), m.len(), "duplicate events in a menu");
                for c in m.values() {
                    stack.push((c.clone(), d + 1));
                }
            }
            Node::Sil(c) => stack.push((c.clone(), d + 1)),
            Node::Ret(_) => {}
        }
    }
}
