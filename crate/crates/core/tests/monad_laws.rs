mod common;

use common::fbind;
use itree_core::gen::{event, random_kfun, random_ktree, FTree, GenConfig};
use itree_core::itree::{bind, bisim_to_depth, div, run, ITree, KTree, Verdict};
use itree_core::laws::{monad_laws, LawBounds};
use itree_core::optics::Value;
use proptest::prelude::*;

fn cfg() -> GenConfig {
    GenConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn eight_laws_hold_on_random_trees(seed in any::<u64>(), x in 0i64..3) {
        let p = FTree::from_seed(seed, &cfg()).to_itree();
        let ks = [random_ktree(seed ^ 1, cfg()), random_ktree(seed ^ 2, cfg()), random_ktree(seed ^ 3, cfg())];
        for law in monad_laws(&p, [&ks[0], &ks[1], &ks[2]], Value::Int(x), &[event(0), event(2)], &LawBounds::default()) {
            prop_assert_eq!(&law.verdict, &Verdict::True, "{}", law);
        }
    }

    #[test]
    fn bind_matches_substitution(seed in any::<u64>()) {
        let t = FTree::from_seed(seed, &cfg());
        let k = random_kfun(seed.rotate_left(7), cfg());
        let expected = fbind(&t, &k).to_itree();
        let got = bind(t.to_itree(), random_ktree(seed.rotate_left(7), cfg()));
        prop_assert_eq!(bisim_to_depth(&got, &expected, 64, 1000), Verdict::True);
    }

    #[test]
    fn bisim_reflexive_and_symmetric(a in any::<u64>(), b in any::<u64>()) {
        let (p, q) = (FTree::from_seed(a, &cfg()).to_itree(), FTree::from_seed(b, &cfg()).to_itree());
        prop_assert!(bisim_to_depth(&p, &p, 64, 1000).is_true());
        let pq = bisim_to_depth(&p, &q, 64, 1000);
        let qp = bisim_to_depth(&q, &p, 64, 1000);
        prop_assert_eq!(pq.is_true(), qp.is_true());
        prop_assert_eq!(pq.is_false(), qp.is_false());
        let same = FTree::from_seed(a, &cfg()) == FTree::from_seed(b, &cfg());
        prop_assert_eq!(pq.is_true(), same);
    }
}

#[test]
fn laws_on_constants() {
    let b = LawBounds::default();
    let ks = [random_ktree(1, cfg()), random_ktree(2, cfg()), random_ktree(3, cfg())];
    for p in [div(), run([event(0), event(1)]), ITree::stop()] {
        for law in monad_laws(&p, [&ks[0], &ks[1], &ks[2]], Value::Int(0), &[event(1)], &b) {
            assert_eq!(law.verdict, Verdict::True, "{law}");
        }
    }
}

#[test]
fn ret_bind_applies() {
    let k = KTree::new(|v: Value| ITree::ret(Value::Int(v.as_int().unwrap() * 2)));
    let t = bind(ITree::ret(Value::Int(5)), k);
    assert!(bisim_to_depth(&t, &ITree::ret(Value::Int(10)), 4, 4).is_true());
}

#[test]
fn run_of_nothing_is_stop() {
    assert!(bisim_to_depth(&run::<()>([]), &ITree::stop(), 8, 8).is_true());
}

#[test]
fn iter_skip_is_div() {
    let t = itree_core::itree::iter::<(), ()>(ITree::ret(()));
    assert_eq!(bisim_to_depth(&t, &div(), 64, 1000), Verdict::True);
    assert!(itree_core::itree::weak_bisim_to_depth(&t, &div(), 64, 1000).is_true());
}

#[test]
fn peeling_div_returns_div() {
    let d = div::<()>();
    let mut cur = d.clone();
    for _ in 0..10 {
        let next = match cur.force() {
            itree_core::Node::Sil(c) => c.clone(),
            _ => panic!("div is silent"),
        };
        cur = next;
    }
    assert!(cur.same(&d));
}

#[test]
fn weak_bisim_examples() {
    for seed in 0..32 {
        let p = FTree::from_seed(seed, &cfg()).to_itree();
        assert!(itree_core::itree::weak_bisim_to_depth(&ITree::taus(5, p.clone()), &p, 32, 1000).is_true());
    }
    let a = itree_core::csp::prefix(event(0), ITree::<()>::stop());
    let b = itree_core::csp::prefix(event(1), ITree::<()>::stop());
    assert!(itree_core::itree::weak_bisim_to_depth(&a, &b, 32, 1000).is_false());
    assert!(itree_core::itree::weak_bisim_to_depth(&div::<()>(), &div(), 32, 1000).is_true());
}

#[test]
fn while_unfolds_twice() {
    let inc = KTree::new(|s: i64| ITree::ret(s + 1));
    let t = itree_core::itree::while_(|s: &i64| *s < 2, inc).apply(0);
    assert!(bisim_to_depth(&t, &ITree::taus(2, ITree::ret(2)), 8, 8).is_true());
    let never = itree_core::itree::while_(|_: &i64| false, KTree::new(|s: i64| ITree::ret(s + 1)));
    assert!(bisim_to_depth(&never.apply(7), &ITree::ret(7), 8, 8).is_true());
}
