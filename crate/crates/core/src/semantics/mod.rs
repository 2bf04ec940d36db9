//! Bounded traces, failures and divergences of interaction trees.
//!
//! Everything here explores a tree only to a given trace length, with each
//! τ-run limited by a fuel budget. A τ-run that revisits a node is divergent;
//! one that merely exhausts its fuel is reported as divergent too, but
//! marked as such, since it may yet stabilise.

mod health;
mod report;

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::itree::{
    stabilise, Counterexample, ITree, Mismatch, Node, Output, PathStep, Stabilisation, Verdict, DEFAULT_FUEL,
};
use crate::optics::Event;

pub use health::{healthiness_suite, HealthCheck, HealthReport, Outcome};
pub use report::{DivergenceRecord, FailureRecord, Record, TraceRecord};

/// An event of `Σ✓`: a visible event or termination with a value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TickEvent<R> {
    Ev(Event),
    Tick(R),
}

impl<R: fmt::Display> fmt::Display for TickEvent<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TickEvent::Ev(e) => write!(f, "{e}"),
            TickEvent::Tick(v) => write!(f, "✓{v}"),
        }
    }
}

pub type Trace<R> = Vec<TickEvent<R>>;

pub fn show_trace<R: fmt::Display>(t: &[TickEvent<R>]) -> String {
    let parts: Vec<String> = t.iter().map(|e| e.to_string()).collect();
    format!("<{}>", parts.join(", "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Longest trace explored, ticks included.
    pub max_len: usize,
    /// τ steps allowed per τ-run.
    pub fuel: usize,
    /// Stable states visited by `div_free`.
    pub state_budget: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_len: 4,
            fuel: DEFAULT_FUEL,
            state_budget: 10_000,
        }
    }
}

impl Bounds {
    pub fn with_len(max_len: usize) -> Self {
        Bounds {
            max_len,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DivergenceKind {
    /// The τ-run returns to a node it has passed.
    Cycle,
    /// The τ-run outlasted the fuel.
    FuelExhausted,
}

/// One element of the big-step relation `P =tr=> P'`.
#[derive(Debug, Clone)]
pub struct StepEntry<R> {
    pub trace: Vec<Event>,
    pub node: ITree<R>,
    /// Set when `node` lies on a τ-run that never stabilises.
    pub divergent: Option<DivergenceKind>,
}

/// All `(tr, P')` with `P =tr=> P'` and `|tr| ≤ max_len`, every node of each
/// τ-run included.
pub fn steps<R: Output>(p: &ITree<R>, max_len: usize, fuel: usize) -> Vec<StepEntry<R>> {
    let mut out = Vec::new();
    let mut stack = vec![(p.clone(), Vec::<Event>::new())];
    while let Some((start, trace)) = stack.pop() {
        let mut seen = HashSet::new();
        let mut spine = Vec::new();
        let mut cur = start;
        let mut divergent = None;
        loop {
            if !seen.insert(cur.id()) {
                divergent = Some(DivergenceKind::Cycle);
                break;
            }
            spine.push(cur.target());
            let next = match cur.force() {
                Node::Sil(c) => c.clone(),
                Node::Vis(m) => {
                    if trace.len() < max_len {
                        for (e, k) in m.entries().iter().rev() {
                            let mut t = trace.clone();
                            t.push(e.clone());
                            stack.push((k.clone(), t));
                        }
                    }
                    break;
                }
                Node::Ret(_) => break,
            };
            if spine.len() > fuel {
                divergent = Some(DivergenceKind::FuelExhausted);
                break;
            }
            cur = next;
        }
        out.extend(spine.into_iter().map(|node| StepEntry {
            trace: trace.clone(),
            node,
            divergent,
        }));
    }
    out
}

/// Roscoe's step relation `P ⟹s P'` within the bound: visible steps, plus
/// `tr ++ [✓x]` leading to `stop` whenever `P =tr=> Ret x` and the extended
/// trace still fits.
pub fn tick_steps<R: Output>(p: &ITree<R>, max_len: usize, fuel: usize) -> Vec<(Trace<R>, ITree<R>)> {
    let mut out = Vec::new();
    for entry in steps(p, max_len, fuel) {
        let trace: Trace<R> = entry.trace.iter().cloned().map(TickEvent::Ev).collect();
        if let Node::Ret(x) = entry.node.force() {
            if trace.len() < max_len {
                let mut t = trace.clone();
                t.push(TickEvent::Tick(x.clone()));
                out.push((t, ITree::stop()));
            }
        }
        out.push((trace, entry.node));
    }
    out
}

/// `traces(P)` up to `max_len`.
pub fn traces<R: Output>(p: &ITree<R>, max_len: usize, fuel: usize) -> BTreeSet<Trace<R>> {
    tick_steps(p, max_len, fuel).into_iter().map(|(t, _)| t).collect()
}

/// A subset of `Σ✓` that is either finite or the complement of a finite set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TickSet<R: Ord> {
    Finite(BTreeSet<TickEvent<R>>),
    Cofinite(BTreeSet<TickEvent<R>>),
}

impl<R: Output> TickSet<R> {
    pub fn empty() -> Self {
        TickSet::Finite(BTreeSet::new())
    }

    pub fn everything() -> Self {
        TickSet::Cofinite(BTreeSet::new())
    }

    pub fn of(items: impl IntoIterator<Item = TickEvent<R>>) -> Self {
        TickSet::Finite(items.into_iter().collect())
    }

    pub fn all_except(items: impl IntoIterator<Item = TickEvent<R>>) -> Self {
        TickSet::Cofinite(items.into_iter().collect())
    }

    pub fn contains(&self, e: &TickEvent<R>) -> bool {
        match self {
            TickSet::Finite(xs) => xs.contains(e),
            TickSet::Cofinite(xs) => !xs.contains(e),
        }
    }

    pub fn union(&self, other: &TickSet<R>) -> TickSet<R> {
        use TickSet::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a.union(b).cloned().collect()),
            (Cofinite(a), Cofinite(b)) => Cofinite(a.intersection(b).cloned().collect()),
            (Finite(f), Cofinite(c)) | (Cofinite(c), Finite(f)) => Cofinite(c.difference(f).cloned().collect()),
        }
    }

    /// Whether the set avoids every element of `xs`.
    pub fn disjoint_from<'a>(&self, mut xs: impl Iterator<Item = &'a TickEvent<R>>) -> bool {
        xs.all(|x| !self.contains(x))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("refusals are only defined for stable nodes")]
    Unstable,
}

/// `P ref X` for a stable node.
pub fn refuses<R: Output>(p: &ITree<R>, x: &TickSet<R>) -> Result<bool, SemanticsError> {
    match p.force() {
        Node::Sil(_) => Err(SemanticsError::Unstable),
        Node::Vis(m) => Ok(m.keys().all(|e| !x.contains(&TickEvent::Ev(e.clone())))),
        Node::Ret(v) => Ok(!x.contains(&TickEvent::Tick(v.clone()))),
    }
}

/// Where a trace leads a deterministic tree.
enum Walk<R> {
    /// The stable node reached (`stop` after a tick).
    Stable(ITree<R>),
    /// The trace cannot be performed.
    Blocked,
    /// A τ-run on the way diverges.
    Diverges(DivergenceKind),
}

fn walk<R: Output>(p: &ITree<R>, s: &[TickEvent<R>], fuel: usize) -> Walk<R> {
    let mut cur = p.clone();
    for (i, step) in s.iter().enumerate() {
        let node = match stabilise(&cur, fuel) {
            Stabilisation::Stable { node, .. } => node,
            Stabilisation::Cycle { .. } => return Walk::Diverges(DivergenceKind::Cycle),
            Stabilisation::FuelExhausted => return Walk::Diverges(DivergenceKind::FuelExhausted),
        };
        cur = match (node.force(), step) {
            (Node::Vis(m), TickEvent::Ev(e)) => match m.get(e) {
                Some(k) => k.clone(),
                None => return Walk::Blocked,
            },
            (Node::Ret(v), TickEvent::Tick(x)) if v == x && i + 1 == s.len() => return Walk::Stable(ITree::stop()),
            _ => return Walk::Blocked,
        };
    }
    match stabilise(&cur, fuel) {
        Stabilisation::Stable { node, .. } => Walk::Stable(node),
        Stabilisation::Cycle { .. } => Walk::Diverges(DivergenceKind::Cycle),
        Stabilisation::FuelExhausted => Walk::Diverges(DivergenceKind::FuelExhausted),
    }
}

/// Decides `(s, X) ∈ failures(P)`.
pub fn failure_check<R: Output>(p: &ITree<R>, s: &[TickEvent<R>], x: &TickSet<R>, fuel: usize) -> Verdict {
    match walk(p, s, fuel) {
        Walk::Stable(q) => {
            if refuses(&q, x).expect("walk ends on a stable node") {
                Verdict::True
            } else {
                Verdict::False(Counterexample {
                    path: path_of(s),
                    mismatch: Mismatch::Property("the state reached does not refuse the set".into()),
                })
            }
        }
        Walk::Blocked => Verdict::False(Counterexample {
            path: path_of(s),
            mismatch: Mismatch::Property("the trace cannot be performed".into()),
        }),
        Walk::Diverges(DivergenceKind::Cycle) => Verdict::False(Counterexample {
            path: path_of(s),
            mismatch: Mismatch::Divergence { left_diverges: true },
        }),
        Walk::Diverges(DivergenceKind::FuelExhausted) => Verdict::Unknown(format!("τ fuel {fuel} exhausted")),
    }
}

fn path_of<R>(s: &[TickEvent<R>]) -> Vec<PathStep> {
    s.iter()
        .filter_map(|e| match e {
            TickEvent::Ev(e) => Some(PathStep::Event(e.clone())),
            TickEvent::Tick(_) => None,
        })
        .collect()
}

/// The refusals of one stable state: every set disjoint from `enabled`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Failure<R: Ord> {
    pub trace: Trace<R>,
    /// The maximal refusal is `Σ✓ \ enabled`.
    pub enabled: BTreeSet<TickEvent<R>>,
}

impl<R: Output> Failure<R> {
    pub fn max_refusal(&self) -> TickSet<R> {
        TickSet::Cofinite(self.enabled.clone())
    }

    pub fn admits(&self, x: &TickSet<R>) -> bool {
        x.disjoint_from(self.enabled.iter())
    }
}

fn enabled_of<R: Output>(node: &ITree<R>) -> BTreeSet<TickEvent<R>> {
    match node.force() {
        Node::Vis(m) => m.keys().cloned().map(TickEvent::Ev).collect(),
        Node::Ret(v) => BTreeSet::from([TickEvent::Tick(v.clone())]),
        Node::Sil(_) => unreachable!("stable nodes only"),
    }
}

/// The failures of `P` with traces up to `max_len`, one refusal family per
/// reachable stable state.
pub fn failures_enum<R: Output>(p: &ITree<R>, max_len: usize, fuel: usize) -> BTreeSet<Failure<R>> {
    let mut out = BTreeSet::new();
    for entry in steps(p, max_len, fuel) {
        if entry.divergent.is_some() || !entry.node.force().is_stable() {
            continue;
        }
        let trace: Trace<R> = entry.trace.iter().cloned().map(TickEvent::Ev).collect();
        if let Node::Ret(x) = entry.node.force() {
            if trace.len() < max_len {
                let mut t = trace.clone();
                t.push(TickEvent::Tick(x.clone()));
                out.insert(Failure {
                    trace: t,
                    enabled: BTreeSet::new(),
                });
            }
        }
        out.insert(Failure {
            trace,
            enabled: enabled_of(&entry.node),
        });
    }
    out
}

/// A minimal divergent trace; every extension is divergent as well.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Divergence {
    pub trace: Vec<Event>,
    pub kind: DivergenceKind,
}

/// Minimal divergences of `P` up to `max_len`.
pub fn divergences<R: Output>(p: &ITree<R>, max_len: usize, fuel: usize) -> BTreeSet<Divergence> {
    steps(p, max_len, fuel)
        .into_iter()
        .filter_map(|e| e.divergent.map(|kind| Divergence { trace: e.trace, kind }))
        .collect()
}

/// Decides `s ∈ divergences(P)`.
pub fn divergence_check<R: Output>(p: &ITree<R>, s: &[Event], fuel: usize) -> Verdict {
    let ticked: Vec<TickEvent<R>> = s.iter().cloned().map(TickEvent::Ev).collect();
    match walk(p, &ticked, fuel) {
        Walk::Diverges(DivergenceKind::Cycle) => Verdict::True,
        Walk::Diverges(DivergenceKind::FuelExhausted) => Verdict::Unknown(format!("τ fuel {fuel} exhausted")),
        Walk::Stable(_) | Walk::Blocked => Verdict::False(Counterexample {
            path: path_of(&ticked),
            mismatch: Mismatch::Property("no divergence along the trace".into()),
        }),
    }
}

/// Divergence freedom, by exploring stable states breadth-first.
///
/// `True` means the reachable stable states were exhausted and each
/// stabilised; `False` carries a trace to a τ-cycle; `Unknown` means the
/// budget ran out or some τ-run outlasted the fuel.
pub fn div_free<R: Output>(p: &ITree<R>, state_budget: usize, fuel: usize) -> Verdict {
    div_free_search(p, state_budget, fuel, None)
}

/// Divergence freedom of the part of `P` reachable by traces of at most
/// `max_len` events.
pub fn div_free_within<R: Output>(p: &ITree<R>, max_len: usize, state_budget: usize, fuel: usize) -> Verdict {
    div_free_search(p, state_budget, fuel, Some(max_len))
}

fn div_free_search<R: Output>(p: &ITree<R>, state_budget: usize, fuel: usize, max_len: Option<usize>) -> Verdict {
    let mut queue = VecDeque::from([(p.clone(), Vec::<PathStep>::new())]);
    let mut visited = HashSet::new();
    let mut unknown = None;
    while let Some((t, path)) = queue.pop_front() {
        let node = match stabilise(&t, fuel) {
            Stabilisation::Stable { node, .. } => node,
            Stabilisation::Cycle { .. } => {
                return Verdict::False(Counterexample {
                    path,
                    mismatch: Mismatch::Divergence { left_diverges: true },
                })
            }
            Stabilisation::FuelExhausted => {
                unknown.get_or_insert_with(|| format!("τ fuel {fuel} exhausted"));
                continue;
            }
        };
        if !visited.insert((node.id(), max_len.map(|_| path.len()))) {
            continue;
        }
        if visited.len() > state_budget {
            unknown = Some(format!("state budget {state_budget} exhausted with open frontier"));
            break;
        }
        if max_len.is_some_and(|n| path.len() >= n) {
            continue;
        }
        if let Node::Vis(m) = node.force() {
            for (e, k) in m.iter() {
                let mut p2 = path.clone();
                p2.push(PathStep::Event(e.clone()));
                queue.push_back((k.clone(), p2));
            }
        }
    }
    match unknown {
        Some(why) => Verdict::Unknown(why),
        None => Verdict::True,
    }
}
