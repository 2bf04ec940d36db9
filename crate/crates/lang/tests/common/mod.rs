#![allow(dead_code)]

use itree_core::itree::{stabilise, Stabilisation};
use itree_core::{Event, ITree, Node, Value};

/// The stable node reached from `t`, following at most 10 000 τ steps.
pub fn settle(t: &ITree<Value>) -> ITree<Value> {
    match stabilise(t, 10_000) {
        Stabilisation::Stable { node, .. } => node,
        other => panic!("no stable node: {other:?}"),
    }
}

pub fn menu(t: &ITree<Value>) -> Vec<Event> {
    match settle(t).force() {
        Node::Vis(m) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

pub fn sorted_menu(t: &ITree<Value>) -> Vec<String> {
    let mut m: Vec<String> = menu(t).iter().map(|e| e.to_string()).collect();
    m.sort();
    m
}

pub fn after(t: &ITree<Value>, e: &str) -> ITree<Value> {
    let ev: Event = e.parse().expect("event syntax");
    match settle(t).force() {
        Node::Vis(m) => m
            .get(&ev)
            .cloned()
            .unwrap_or_else(|| panic!("{e} not offered; menu {:?}", sorted_menu(t))),
        _ => panic!("{e} not offered: not a visible node"),
    }
}

pub fn run(t: &ITree<Value>, events: &[&str]) -> ITree<Value> {
    events.iter().fold(t.clone(), |t, e| after(&t, e))
}

pub fn ev(e: &str) -> String {
    e.parse::<Event>().unwrap().to_string()
}
