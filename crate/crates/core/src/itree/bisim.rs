//! Bounded strong and weak bisimulation.
//!
//! Both checks explore pairs of nodes breadth-first, so a counterexample, when
//! one exists within the bound, is a shortest one. A pair already under
//! examination is assumed bisimilar (the coinductive hypothesis), which makes
//! the checks terminate on cyclic trees with a definite answer.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use super::stable::{stabilise, Stabilisation};
use super::{ITree, Node, NodeKind, Output};
use crate::optics::Event;

/// Pairs explored before giving up.
const MAX_PAIRS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathStep {
    Tau,
    Event(Event),
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathStep::Tau => write!(f, "τ"),
            PathStep::Event(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mismatch {
    Shape {
        left: NodeKind,
        right: NodeKind,
    },
    Returns {
        left: String,
        right: String,
    },
    Menus {
        only_left: Vec<Event>,
        only_right: Vec<Event>,
    },
    /// One side diverges, the other reaches a stable node.
    Divergence {
        left_diverges: bool,
    },
    /// Some other property failed at the end of the path.
    Property(String),
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |es: &[Event]| es.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ");
        match self {
            Mismatch::Shape { left, right } => write!(f, "{left:?} vs {right:?}"),
            Mismatch::Returns { left, right } => write!(f, "returns {left} vs {right}"),
            Mismatch::Menus { only_left, only_right } => write!(
                f,
                "menus differ: only left {{{}}}, only right {{{}}}",
                list(only_left),
                list(only_right)
            ),
            Mismatch::Divergence { left_diverges } => {
                let side = if *left_diverges { "left" } else { "right" };
                write!(f, "{side} side diverges, the other stabilises")
            }
            Mismatch::Property(what) => write!(f, "{what}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub path: Vec<PathStep>,
    pub mismatch: Mismatch,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|s| s.to_string()).collect();
        write!(f, "after <{}>: {}", path.join(", "), self.mismatch)
    }
}

/// Outcome of a bounded check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    True,
    False(Counterexample),
    /// Not refuted, and exploration stopped only because this depth ran out.
    Bounded(usize),
    /// Not refuted, but some branch was cut short by fuel or a budget.
    Unknown(String),
}

impl Verdict {
    pub fn is_true(&self) -> bool {
        matches!(self, Verdict::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Verdict::False(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    /// True, or true as far as the depth bound reaches.
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::True | Verdict::Bounded(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::True => write!(f, "true"),
            Verdict::False(c) => write!(f, "false ({c})"),
            Verdict::Bounded(d) => write!(f, "true to depth {d}"),
            Verdict::Unknown(why) => write!(f, "unknown ({why})"),
        }
    }
}

/// Why exploration stopped short, if it did.
#[derive(Default)]
struct Cut {
    depth: bool,
    other: Option<String>,
}

impl Cut {
    fn verdict(self, depth: usize) -> Verdict {
        match (self.other, self.depth) {
            (Some(why), _) => Verdict::Unknown(why),
            (None, true) => Verdict::Bounded(depth),
            (None, false) => Verdict::True,
        }
    }
}

/// Parent links for reconstructing the path to a pair.
struct Paths {
    links: Vec<(usize, Option<PathStep>)>,
}

impl Paths {
    fn new() -> Self {
        Paths { links: vec![(0, None)] }
    }

    fn push(&mut self, parent: usize, step: PathStep) -> usize {
        self.links.push((parent, Some(step)));
        self.links.len() - 1
    }

    fn path(&self, mut at: usize) -> Vec<PathStep> {
        let mut out = Vec::new();
        while let (parent, Some(step)) = &self.links[at] {
            out.push(step.clone());
            at = *parent;
        }
        out.reverse();
        out
    }
}

fn compare_menus<R: Output>(
    m: &crate::pfun::PFun<Event, ITree<R>>,
    n: &crate::pfun::PFun<Event, ITree<R>>,
) -> Option<Mismatch> {
    let only_left: Vec<Event> = m.keys().filter(|e| !n.contains_key(e)).cloned().collect();
    let only_right: Vec<Event> = n.keys().filter(|e| !m.contains_key(e)).cloned().collect();
    (!only_left.is_empty() || !only_right.is_empty()).then_some(Mismatch::Menus { only_left, only_right })
}

/// Strong bisimilarity explored to `depth` steps (visible and τ alike).
/// A τ-spine longer than `fuel` is left undecided.
pub fn bisim_to_depth<R: Output>(p: &ITree<R>, q: &ITree<R>, depth: usize, fuel: usize) -> Verdict {
    let mut paths = Paths::new();
    let mut queue = VecDeque::from([(p.clone(), q.clone(), depth, 0usize, 0usize)]);
    let mut visited = HashSet::new();
    let mut cut = Cut::default();

    while let Some((p, q, left, taus, at)) = queue.pop_front() {
        if !visited.insert((p.id(), q.id())) {
            continue;
        }
        if visited.len() > MAX_PAIRS {
            cut.other = Some(format!("explored {MAX_PAIRS} node pairs"));
            break;
        }
        let fail = |mismatch| {
            Verdict::False(Counterexample {
                path: paths.path(at),
                mismatch,
            })
        };
        match (p.force(), q.force()) {
            (Node::Ret(a), Node::Ret(b)) => {
                if a != b {
                    return fail(Mismatch::Returns {
                        left: format!("{a:?}"),
                        right: format!("{b:?}"),
                    });
                }
            }
            (Node::Sil(a), Node::Sil(b)) => {
                if left == 0 {
                    cut.depth = true;
                } else if taus >= fuel {
                    cut.other.get_or_insert_with(|| format!("τ fuel {fuel} exhausted"));
                } else {
                    let (a, b) = (a.clone(), b.clone());
                    let next = paths.push(at, PathStep::Tau);
                    queue.push_back((a, b, left - 1, taus + 1, next));
                }
            }
            (Node::Vis(m), Node::Vis(n)) => {
                if let Some(mm) = compare_menus(m, n) {
                    return fail(mm);
                }
                if left == 0 {
                    if !m.is_empty() {
                        cut.depth = true;
                    }
                    continue;
                }
                for (e, a) in m.iter() {
                    let b = n.get(e).expect("menus agree").clone();
                    let next = paths.push(at, PathStep::Event(e.clone()));
                    queue.push_back((a.clone(), b, left - 1, 0, next));
                }
            }
            (x, y) => {
                return fail(Mismatch::Shape {
                    left: x.kind(),
                    right: y.kind(),
                })
            }
        }
    }
    cut.verdict(depth)
}

/// Weak bisimilarity (equality up to finite τ steps) explored to `depth`
/// visible steps. Each side is stabilised with at most `fuel` τ steps; two
/// sides that both provably diverge are equal, a provably divergent side
/// against a stable one is a counterexample.
pub fn weak_bisim_to_depth<R: Output>(p: &ITree<R>, q: &ITree<R>, depth: usize, fuel: usize) -> Verdict {
    let mut paths = Paths::new();
    let mut queue = VecDeque::from([(p.clone(), q.clone(), depth, 0usize)]);
    let mut visited = HashSet::new();
    let mut cut = Cut::default();

    while let Some((p, q, left, at)) = queue.pop_front() {
        let fail = |paths: &Paths, mismatch| {
            Verdict::False(Counterexample {
                path: paths.path(at),
                mismatch,
            })
        };
        let (a, b) = match (stabilise(&p, fuel), stabilise(&q, fuel)) {
            (Stabilisation::Stable { node: a, .. }, Stabilisation::Stable { node: b, .. }) => (a, b),
            (Stabilisation::Cycle { .. }, Stabilisation::Cycle { .. }) => continue,
            (Stabilisation::Cycle { .. }, Stabilisation::Stable { .. }) => {
                return fail(&paths, Mismatch::Divergence { left_diverges: true })
            }
            (Stabilisation::Stable { .. }, Stabilisation::Cycle { .. }) => {
                return fail(&paths, Mismatch::Divergence { left_diverges: false })
            }
            _ => {
                cut.other.get_or_insert_with(|| format!("τ fuel {fuel} exhausted"));
                continue;
            }
        };
        if !visited.insert((a.id(), b.id())) {
            continue;
        }
        if visited.len() > MAX_PAIRS {
            cut.other = Some(format!("explored {MAX_PAIRS} node pairs"));
            break;
        }
        match (a.force(), b.force()) {
            (Node::Ret(x), Node::Ret(y)) => {
                if x != y {
                    return fail(
                        &paths,
                        Mismatch::Returns {
                            left: format!("{x:?}"),
                            right: format!("{y:?}"),
                        },
                    );
                }
            }
            (Node::Vis(m), Node::Vis(n)) => {
                if let Some(mm) = compare_menus(m, n) {
                    return fail(&paths, mm);
                }
                if left == 0 {
                    if !m.is_empty() {
                        cut.depth = true;
                    }
                    continue;
                }
                for (e, x) in m.iter() {
                    let y = n.get(e).expect("menus agree").clone();
                    let next = paths.push(at, PathStep::Event(e.clone()));
                    queue.push_back((x.clone(), y, left - 1, next));
                }
            }
            (x, y) => {
                return fail(
                    &paths,
                    Mismatch::Shape {
                        left: x.kind(),
                        right: y.kind(),
                    },
                )
            }
        }
    }
    cut.verdict(depth)
}
