//! Operators on infinite trees do bounded work per observed step.

use itree_core::csp::{extchoice, gpar, hide, interleave, prefix, sync, EventSet};
use itree_core::itree::{bind, forced_count, iter, while_, ITree, KTree, Node};
use itree_core::optics::Event;

fn e(n: &str) -> Event {
    Event::sync(n)
}

/// Follows `path` from `t`, skipping τs, and returns the number of
/// suspensions forced on the way.
fn cost_of_walk<R: itree_core::itree::Output>(t: &ITree<R>, path: &[&str]) -> u64 {
    let before = forced_count();
    let mut cur = t.clone();
    for name in path {
        loop {
            match cur.force() {
                Node::Sil(c) => cur = c.clone(),
                Node::Vis(m) => {
                    cur = m.get(&e(name)).unwrap_or_else(|| panic!("{name} not offered")).clone();
                    break;
                }
                Node::Ret(_) => panic!("terminated early"),
            }
        }
    }
    forced_count() - before
}

/// A fresh infinite tree `a → b → a → …` with no sharing.
fn alternating(first: &'static str, second: &'static str) -> ITree<()> {
    ITree::lazy(move || prefix(e(first), alternating(second, first)))
}

#[test]
fn operators_on_infinite_inputs_are_productive() {
    let n = 200;
    let path: Vec<&str> = (0..n).map(|i| if i % 2 == 0 { "a" } else { "b" }).collect();
    let cases: Vec<(&str, Box<dyn Fn() -> ITree<()>>)> = vec![
        (
            "bind",
            Box::new(|| bind(alternating("a", "b"), KTree::constant(ITree::ret(())))),
        ),
        (
            "extchoice",
            Box::new(|| extchoice(alternating("a", "b"), prefix(e("c"), ITree::stop()))),
        ),
        (
            "gpar",
            Box::new(|| {
                let t = gpar(
                    alternating("a", "b"),
                    EventSet::of_events([e("a"), e("b")]),
                    alternating("a", "b"),
                );
                bind(t, KTree::constant(ITree::ret(())))
            }),
        ),
        (
            "interleave",
            Box::new(|| {
                bind(
                    interleave(alternating("a", "b"), ITree::<()>::stop()),
                    KTree::constant(ITree::ret(())),
                )
            }),
        ),
        (
            "hide",
            Box::new(|| hide(alternating("a", "b"), EventSet::of_events([e("z")]))),
        ),
    ];
    for (name, build) in cases {
        let t = build();
        let cost = cost_of_walk(&t, &path);
        assert!(cost <= 8 * n as u64, "{name}: {cost} forces for {n} steps");
    }
}

#[test]
fn hiding_every_other_event_stays_productive() {
    let t = hide(alternating("a", "b"), EventSet::of_events([e("b")]));
    let path = vec!["a"; 200];
    assert!(cost_of_walk(&t, &path) <= 1600);
}

#[test]
fn loops_do_constant_work_per_iteration() {
    let body = extchoice(sync("a"), sync("b"));
    let t = iter::<(), ()>(body);
    let small = cost_of_walk(&t, &vec!["a"; 10]);
    let large = cost_of_walk(&iter::<(), ()>(extchoice(sync("a"), sync("b"))), &vec!["a"; 1000]);
    assert!(large <= 20 + small * 100, "{small} vs {large}");

    let counter = while_(
        |n: &i64| *n < 1_000_000,
        KTree::new(|n: i64| {
            prefix(
                Event::new("tick", itree_core::optics::Value::Int(n % 3)),
                ITree::ret(n + 1),
            )
        }),
    );
    let before = forced_count();
    let mut cur = counter.apply(0);
    for i in 0..500 {
        loop {
            match cur.force() {
                Node::Sil(c) => cur = c.clone(),
                Node::Vis(m) => {
                    cur = m
                        .get(&Event::new("tick", itree_core::optics::Value::Int(i % 3)))
                        .unwrap()
                        .clone();
                    break;
                }
                Node::Ret(_) => panic!(),
            }
        }
    }
    assert!(forced_count() - before <= 500 * 8);
}

#[test]
fn repeated_walks_reuse_forced_nodes() {
    let t = bind(alternating("a", "b"), KTree::constant(ITree::ret(())));
    let path: Vec<&str> = (0..100).map(|i| if i % 2 == 0 { "a" } else { "b" }).collect();
    let first = cost_of_walk(&t, &path);
    assert!(first > 0);
    assert_eq!(cost_of_walk(&t, &path), 0);
}
