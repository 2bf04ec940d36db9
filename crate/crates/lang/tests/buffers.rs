mod common;

use common::{after, menu, run, sorted_menu};
use itree_core::itree::weak_bisim_to_depth;
use itree_core::{ITree, Value};
use itree_lang::ast::{ProcBody, ProcKind};
use itree_lang::corpus::BUFFER;
use itree_lang::{load, Program};
use proptest::prelude::*;

fn program() -> Program {
    load(BUFFER).expect("buffer example loads")
}

fn expected(contents: &[i64]) -> Vec<String> {
    let mut m: Vec<String> = (0..4).map(|d| format!("Input.{d}")).collect();
    if let Some(h) = contents.first() {
        m.push(format!("Output.{h}"));
    }
    m.push(format!("State.{}", Value::ints(contents.iter().copied())));
    m.sort();
    m
}

#[test]
fn loop_body_is_a_three_way_choice_of_blocks() {
    let prog = program();
    let ProcBody::Csp(body) = &prog.decl("buffer").unwrap().body else {
        panic!("buffer is a plain process")
    };
    let ProcKind::LoopFrom { body, .. } = &body.kind else {
        panic!("buffer is a parameterised loop")
    };
    let ProcKind::Choice(left, third) = &body.kind else {
        panic!("loop body is a choice")
    };
    let ProcKind::Choice(first, second) = &left.kind else {
        panic!("left operand is a choice")
    };
    for b in [first, second, third] {
        assert!(matches!(b.kind, ProcKind::Do(_)), "{b:?}");
    }
}

#[test]
fn both_buffers_offer_the_expected_menus() {
    let prog = program();
    for (name, args) in [("buffer", vec![Value::List(vec![])]), ("cbuffer", vec![])] {
        let t = prog.instantiate(name, args).unwrap();
        assert_eq!(sorted_menu(&t), expected(&[]), "{name}");
        let t = run(&t, &["Input.1", "Input.2"]);
        assert_eq!(sorted_menu(&t), expected(&[1, 2]), "{name}");
        let t = after(&t, "Output.1");
        assert_eq!(sorted_menu(&t), expected(&[2]), "{name}");
        let t = run(&t, &["Input.3", "State.[2,3]", "Output.2", "Output.3"]);
        assert_eq!(sorted_menu(&t), expected(&[]), "{name}");
    }
}

#[test]
fn state_based_buffer_shows_its_state() {
    let prog = program();
    let t = common::settle(&run(&prog.instantiate("cbuffer", vec![]).unwrap(), &["Input.3"]));
    assert_eq!(t.note().map(|n| n.to_string()), Some("{buf: [3]}".to_string()));
    assert!(!menu(&t).is_empty());
}

fn pair(src: &str) -> (ITree<Value>, ITree<Value>) {
    let prog = load(src).unwrap();
    let p = prog.instantiate("buffer", vec![Value::List(vec![])]).unwrap();
    let q = prog.instantiate("cbuffer", vec![]).unwrap();
    (p, q)
}

// Four data values give 4^d reachable buffer contents at depth d, so the
// exhaustive check stops at depth 6 here; depth 32 is explored exhaustively
// over a single data value and along random schedules over all four.

#[test]
fn the_two_buffers_are_weakly_bisimilar_to_depth_six() {
    let (p, q) = pair(BUFFER);
    let v = weak_bisim_to_depth(&p, &q, 6, 1000);
    assert!(!v.is_false(), "{v}");
}

#[test]
fn the_two_buffers_are_weakly_bisimilar_to_depth_32_over_one_value() {
    let (p, q) = pair(&BUFFER.replace("{0..3}", "{0..0}"));
    let v = weak_bisim_to_depth(&p, &q, 32, 1000);
    assert!(!v.is_false(), "{v}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn the_two_buffers_agree_along_random_schedules(choices in prop::collection::vec(0usize..64, 32)) {
        let (mut p, mut q) = pair(BUFFER);
        for c in choices {
            let (mp, mq) = (sorted_menu(&p), sorted_menu(&q));
            prop_assert_eq!(&mp, &mq);
            let e = &mp[c % mp.len()];
            p = after(&p, e);
            q = after(&q, e);
        }
    }
}
