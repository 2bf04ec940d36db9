//! The algebraic laws of bind, choice, parallel composition and hiding, as
//! bounded bisimulation checks on given operands.

use std::fmt;

use crate::csp::{cpar, extchoice, gpar, hide, interleave, prefix, EventSet};
use crate::itree::{bind, bisim_to_depth, div, map, run, ITree, KTree, Output, Verdict};
use crate::optics::Event;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawCheck {
    pub law: String,
    pub verdict: Verdict,
}

impl fmt::Display for LawCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.law, self.verdict)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LawBounds {
    pub depth: usize,
    pub fuel: usize,
}

impl Default for LawBounds {
    fn default() -> Self {
        LawBounds {
            depth: crate::itree::DEFAULT_DEPTH,
            fuel: crate::itree::DEFAULT_FUEL,
        }
    }
}

struct Checks<'a> {
    out: Vec<LawCheck>,
    b: &'a LawBounds,
}

impl Checks<'_> {
    fn eq<R: Output>(&mut self, law: impl Into<String>, lhs: &ITree<R>, rhs: &ITree<R>) {
        self.out.push(LawCheck {
            law: law.into(),
            verdict: bisim_to_depth(lhs, rhs, self.b.depth, self.b.fuel),
        });
    }
}

/// The eight bind and Kleisli laws, instantiated at `p`, `k1..k3`, the
/// argument `x` and the alphabet `events` for `run`.
pub fn monad_laws<R: Output>(
    p: &ITree<R>,
    [k1, k2, k3]: [&KTree<R, R>; 3],
    x: R,
    events: &[Event],
    b: &LawBounds,
) -> Vec<LawCheck> {
    let mut c = Checks { out: Vec::new(), b };
    let ret = KTree::<R, R>::ret();
    c.eq(
        "Ret x ⤜ K = K x",
        &bind(ITree::ret(x.clone()), k1.clone()),
        &k1.apply(x.clone()),
    );
    c.eq("P ⤜ Ret = P", &bind(p.clone(), ret.clone()), p);
    let (q, r) = (k2.clone(), k3.clone());
    let inner = KTree::new(move |y| bind(q.apply(y), r.clone()));
    c.eq(
        "P ⤜ (λx. Q x ⤜ R) = (P ⤜ Q) ⤜ R",
        &bind(p.clone(), inner),
        &bind(bind(p.clone(), k2.clone()), k3.clone()),
    );
    c.eq("div ⤜ K = div", &bind(div(), k1.clone()), &div());
    c.eq("Ret ⨾ K = K", &ret.then(k1).apply(x.clone()), &k1.apply(x.clone()));
    c.eq("K ⨾ Ret = K", &k1.then(&ret).apply(x.clone()), &k1.apply(x.clone()));
    c.eq(
        "K1 ⨾ (K2 ⨾ K3) = (K1 ⨾ K2) ⨾ K3",
        &k1.then(&k2.then(k3)).apply(x.clone()),
        &k1.then(k2).then(k3).apply(x),
    );
    let r = run::<R>(events.iter().cloned());
    c.eq("run E ⤜ K = run E", &bind(r.clone(), k1.clone()), &r);
    c.out
}

/// Commutativity, unit, annihilator, τ-extraction and left distribution of
/// external choice.
pub fn choice_laws<R: Output>(p: &ITree<R>, q: &ITree<R>, h: &KTree<R, R>, b: &LawBounds) -> Vec<LawCheck> {
    let mut c = Checks { out: Vec::new(), b };
    c.eq(
        "P □ Q = Q □ P",
        &extchoice(p.clone(), q.clone()),
        &extchoice(q.clone(), p.clone()),
    );
    c.eq("stop □ P = P", &extchoice(ITree::stop(), p.clone()), p);
    c.eq("div □ P = div", &extchoice(div(), p.clone()), &div());
    for n in 1..=3 {
        let pq = extchoice(p.clone(), q.clone());
        c.eq(
            format!("P □ τ^{n} Q = τ^{n} (P □ Q)"),
            &extchoice(p.clone(), ITree::taus(n, q.clone())),
            &ITree::taus(n, pq.clone()),
        );
        c.eq(
            format!("τ^{n} P □ Q = τ^{n} (P □ Q)"),
            &extchoice(ITree::taus(n, p.clone()), q.clone()),
            &ITree::taus(n, pq),
        );
    }
    if p.force().kind() == crate::itree::NodeKind::Vis && q.force().kind() == crate::itree::NodeKind::Vis {
        c.eq(
            "(Vis F □ Vis G) ⤜ H = (Vis F ⤜ H) □ (Vis G ⤜ H)",
            &bind(extchoice(p.clone(), q.clone()), h.clone()),
            &extchoice(bind(p.clone(), h.clone()), bind(q.clone(), h.clone())),
        );
    }
    c.out
}

/// Commutativity laws, the unit of interleaving and the annihilator of
/// parallel composition.
pub fn parallel_laws<R: Output>(p: &ITree<R>, q: &ITree<R>, sync: &EventSet, b: &LawBounds) -> Vec<LawCheck> {
    let mut c = Checks { out: Vec::new(), b };
    c.eq(
        "P ∥E Q = (Q ∥E P) ⤜ swap",
        &gpar(p.clone(), sync.clone(), q.clone()),
        &map(gpar(q.clone(), sync.clone(), p.clone()), |(x, y)| (y, x)),
    );
    c.eq(
        "P ⟦E⟧ Q = Q ⟦E⟧ P",
        &cpar(p.clone(), sync.clone(), q.clone()),
        &cpar(q.clone(), sync.clone(), p.clone()),
    );
    c.eq(
        "P ||| Q = Q ||| P",
        &interleave(p.clone(), q.clone()),
        &interleave(q.clone(), p.clone()),
    );
    c.eq(
        "skip ||| P = P",
        &interleave(ITree::ret(()), p.clone()),
        &map(p.clone(), |_| ()),
    );
    c.eq("div ∥E P = div", &gpar(div::<R>(), sync.clone(), p.clone()), &div());
    c.out
}

/// `(a → P □ b → Q) \ {a} = τ (P \ {a})` for distinct `a`, `b`.
pub fn hiding_law<R: Output>(p: &ITree<R>, q: &ITree<R>, a: &Event, bev: &Event, b: &LawBounds) -> LawCheck {
    let hidden = EventSet::of_events([a.clone()]);
    let lhs = hide(
        extchoice(prefix(a.clone(), p.clone()), prefix(bev.clone(), q.clone())),
        hidden.clone(),
    );
    let rhs = ITree::sil(hide(p.clone(), hidden));
    LawCheck {
        law: format!("({a} → P □ {bev} → Q) \\ {{{a}}} = τ (P \\ {{{a}}})"),
        verdict: bisim_to_depth(&lhs, &rhs, b.depth, b.fuel),
    }
}
