use std::sync::Arc;

use itree_core::circus::{
    assign, assigns, extchoice, guard, hide, input_prefix, output_prefix, par, skip, stop, Action,
};
use itree_core::csp::EventSet;
use itree_core::itree::{bisim_to_depth, weak_bisim_to_depth, ITree, Node};
use itree_core::optics::{ChanDecl, Event, Expr, Kind, Lens, OpticsError, Schema, StateSpace, Subst, Value};
use itree_core::semantics::{steps, traces};
use proptest::prelude::*;

const FIELDS: [&str; 3] = ["x", "y", "z"];

fn state(vals: [i64; 3]) -> StateSpace {
    let schema = Arc::new(Schema::new(FIELDS.map(|f| (f, Kind::Int))).unwrap());
    StateSpace::new(schema, vals.map(Value::Int).to_vec()).unwrap()
}

fn int(v: Value) -> Result<i64, OpticsError> {
    v.as_int()
        .ok_or_else(|| OpticsError::Eval(format!("{v} is not an integer")))
}

/// A small expression language over the three fields.
#[derive(Debug, Clone)]
enum E {
    Const(i64),
    Plus(usize, i64),
    Sum(usize, usize),
}

impl E {
    fn expr(&self) -> Expr {
        match *self {
            E::Const(n) => Expr::constant(Value::Int(n)),
            E::Plus(f, n) => Expr::var(FIELDS[f]).map(move |v| Ok(Value::Int(int(v)? + n))),
            E::Sum(a, b) => {
                Expr::var(FIELDS[a]).zip_with(&Expr::var(FIELDS[b]), |u, v| Ok(Value::Int(int(u)? + int(v)?)))
            }
        }
    }

    fn reads(&self, f: usize) -> bool {
        match *self {
            E::Const(_) => false,
            E::Plus(g, _) => g == f,
            E::Sum(a, b) => a == f || b == f,
        }
    }
}

fn arb_expr() -> impl Strategy<Value = E> {
    prop_oneof![
        (-3i64..4).prop_map(E::Const),
        (0usize..3, -3i64..4).prop_map(|(f, n)| E::Plus(f, n)),
        (0usize..3, 0usize..3).prop_map(|(a, b)| E::Sum(a, b)),
    ]
}

fn arb_state() -> impl Strategy<Value = StateSpace> {
    prop::array::uniform3(-5i64..6).prop_map(state)
}

fn arb_subst() -> impl Strategy<Value = Subst> {
    prop::collection::vec((0usize..3, arb_expr()), 0..3).prop_map(|ms| {
        let mut seen = Vec::new();
        ms.into_iter().fold(Subst::id(), |s, (f, e)| {
            if seen.contains(&f) {
                s
            } else {
                seen.push(f);
                s.with(Lens::field(FIELDS[f]), e.expr())
            }
        })
    })
}

fn chan(name: &str) -> ChanDecl {
    ChanDecl::new(name, Kind::Int)
}

/// Some actions with communication, for the distribution laws.
fn sample_actions() -> Vec<Action> {
    vec![
        skip(),
        stop(),
        output_prefix(
            &chan("out"),
            Expr::var("x"),
            assign(Lens::field("y"), E::Plus(1, 1).expr()),
        ),
        input_prefix(&chan("inp"), (0..3).map(Value::Int).collect(), |v| {
            assign(Lens::field("z"), Expr::constant(v))
        }),
        output_prefix(&chan("out"), Expr::var("z"), skip()),
    ]
}

fn same(p: &ITree<StateSpace>, q: &ITree<StateSpace>) -> bool {
    bisim_to_depth(p, q, 16, 50).is_true()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn independent_assignments_commute(
        x in 0usize..3, y in 0usize..3, e in arb_expr(), f in arb_expr(), s in arb_state()
    ) {
        prop_assume!(x != y && !f.reads(x) && !e.reads(y));
        let ax = assign(Lens::field(FIELDS[x]), e.expr());
        let ay = assign(Lens::field(FIELDS[y]), f.expr());
        prop_assert!(same(&ax.seq(&ay).run(s.clone()), &ay.seq(&ax).run(s)));
    }

    #[test]
    fn assignment_sequence_is_composition(sigma in arb_subst(), rho in arb_subst(), s in arb_state()) {
        let lhs = assigns(sigma.clone()).seq(&assigns(rho.clone()));
        let rhs = assigns(rho.compose(&sigma));
        prop_assert!(same(&lhs.run(s.clone()), &rhs.run(s)));
    }

    #[test]
    fn assignment_distributes_over_choice(sigma in arb_subst(), i in 0usize..5, j in 0usize..5, s in arb_state()) {
        let acts = sample_actions();
        let a = assigns(sigma);
        let lhs = a.seq(&extchoice(&acts[i], &acts[j]));
        let rhs = extchoice(&a.seq(&acts[i]), &a.seq(&acts[j]));
        prop_assert!(same(&lhs.run(s.clone()), &rhs.run(s)));
    }

    #[test]
    fn parallel_is_commutative(i in 0usize..5, j in 0usize..5, sync_out in any::<bool>(), s in arb_state()) {
        let acts = sample_actions();
        let sync = if sync_out { EventSet::of_channels(["out"]) } else { EventSet::empty() };
        let (ns1, ns2) = (Lens::fields(["y"]), Lens::fields(["z"]));
        let pq = par(&acts[i], ns1.clone(), sync.clone(), ns2.clone(), &acts[j]).unwrap();
        let qp = par(&acts[j], ns2, sync, ns1, &acts[i]).unwrap();
        prop_assert!(weak_bisim_to_depth(&pq.run(s.clone()), &qp.run(s), 16, 50).is_true());
    }

    #[test]
    fn states_keep_their_schema(sigma in arb_subst(), i in 0usize..5, j in 0usize..5, s in arb_state()) {
        let acts = sample_actions();
        let p = assigns(sigma).seq(&extchoice(&acts[i], &acts[j])).seq(&acts[i]);
        for entry in steps(&p.run(s.clone()), 4, 50) {
            if let Node::Ret(out) = entry.node.force() {
                prop_assert!(Arc::ptr_eq(out.schema(), s.schema()));
            }
        }
    }

    #[test]
    fn guards_select(b in any::<bool>(), i in 0usize..5, s in arb_state()) {
        let p = &sample_actions()[i];
        let g = guard(Expr::constant(Value::Bool(b)), p);
        let expected = if b { p.run(s.clone()) } else { ITree::stop() };
        prop_assert!(same(&g.run(s), &expected));
    }
}

#[test]
fn communication_carries_state() {
    let p = output_prefix(
        &chan("out"),
        E::Sum(0, 1).expr(),
        assign(Lens::field("x"), Expr::constant(Value::Int(0))),
    );
    let t = p.run(state([2, 3, 0]));
    assert_eq!(t.note().map(|n| n.to_string()), Some("{x: 2, y: 3, z: 0}".into()));
    let Node::Vis(m) = t.force() else {
        panic!("expected a visible node")
    };
    let after = m.get(&Event::new("out", Value::Int(5))).expect("out.5 offered");
    assert!(matches!(after.force(), Node::Ret(s) if *s == state([0, 3, 0])));
}

#[test]
fn hiding_internalises_communication() {
    let p = output_prefix(
        &chan("out"),
        Expr::var("x"),
        assign(Lens::field("y"), Expr::constant(Value::Int(9))),
    );
    let h = hide(&p, EventSet::of_channels(["out"]));
    let t = h.run(state([1, 0, 0]));
    let ts = traces(&t, 3, 50);
    assert_eq!(ts.len(), 2);
    let Node::Sil(c) = t.force() else { panic!("expected τ") };
    assert!(matches!(c.force(), Node::Ret(s) if *s == state([1, 9, 0])));
}
