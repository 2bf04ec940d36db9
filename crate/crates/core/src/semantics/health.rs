//! Bounded checks of the failures-divergences healthiness properties.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{
    div_free, div_free_within, divergence_check, divergences, failure_check, failures_enum, traces, Bounds, TickEvent,
    TickSet,
};
use crate::itree::{weak_bisim_to_depth, ITree, Output, PathStep, Verdict};
use crate::optics::Event;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct HealthCheck {
    pub property: String,
    pub outcome: Outcome,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct HealthReport {
    pub checks: Vec<HealthCheck>,
}

impl HealthReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }

    pub fn get(&self, property: &str) -> Option<&HealthCheck> {
        self.checks.iter().find(|c| c.property == property)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }

    fn push(&mut self, property: &str, outcome: Outcome, detail: impl Into<String>) {
        self.checks.push(HealthCheck {
            property: property.into(),
            outcome,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for HealthReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match c.outcome {
                Outcome::Pass => "pass",
                Outcome::Fail => "FAIL",
                Outcome::Inconclusive => "inconclusive",
            };
            writeln!(f, "{tag:<12} {:<28} {}", c.property, c.detail)?;
        }
        Ok(())
    }
}

pub const F3: &str = "F3";
pub const D1: &str = "D1";
pub const WEAK_BISIM: &str = "weak-bisim-invariance";
pub const DIV_FREE: &str = "div-free-iff-no-divergence";
pub const NO_REFUSAL: &str = "no-refusal-of-possible";

/// How many τ prefixes the weak-bisimulation check adds.
const TAU_PREFIXES: [usize; 3] = [1, 2, 5];
/// Extension length tried beyond each divergence for D1.
const D1_EXTENSION: usize = 2;

fn show<R: fmt::Display>(t: &[TickEvent<R>]) -> String {
    super::show_trace(t)
}

/// Runs every check on `p` within `bounds`.
pub fn healthiness_suite<R: Output + fmt::Display>(p: &ITree<R>, bounds: &Bounds) -> HealthReport {
    let mut report = HealthReport::default();
    let Bounds {
        max_len,
        fuel,
        state_budget,
    } = *bounds;
    let ts = traces(p, max_len, fuel);
    let fs = failures_enum(p, max_len, fuel);
    let ds = divergences(p, max_len, fuel);

    check_f3(&mut report, p, &ts, &fs, max_len, fuel);
    check_d1(&mut report, p, &ts, &ds, max_len, fuel);
    check_weak_bisim(&mut report, p, &fs, &ds, max_len, fuel);
    check_div_free(&mut report, p, &ds, max_len, state_budget, fuel);
    check_no_refusal(&mut report, p, &ts, &ds, fuel);
    report
}

fn check_f3<R: Output + fmt::Display>(
    report: &mut HealthReport,
    p: &ITree<R>,
    ts: &BTreeSet<Vec<TickEvent<R>>>,
    fs: &BTreeSet<super::Failure<R>>,
    max_len: usize,
    fuel: usize,
) {
    let mut checked = 0;
    let mut unknown = 0;
    for f in fs {
        if !ts.contains(&f.trace) {
            report.push(
                F3,
                Outcome::Fail,
                format!("failure trace {} is not a trace", show(&f.trace)),
            );
            return;
        }
        if f.trace.len() >= max_len {
            continue;
        }
        let initials: BTreeSet<TickEvent<R>> = ts
            .iter()
            .filter(|t| t.len() == f.trace.len() + 1 && t.starts_with(&f.trace))
            .map(|t| t.last().expect("nonempty").clone())
            .collect();
        // X = Σ✓ \ enabled is refused; Y = Σ✓ \ initials is impossible next.
        let xy = f.max_refusal().union(&TickSet::Cofinite(initials));
        match failure_check(p, &f.trace, &xy, fuel) {
            Verdict::True => checked += 1,
            Verdict::Unknown(_) | Verdict::Bounded(_) => unknown += 1,
            Verdict::False(c) => {
                report.push(F3, Outcome::Fail, format!("after {}: {c}", show(&f.trace)));
                return;
            }
        }
    }
    let outcome = if unknown > 0 {
        Outcome::Inconclusive
    } else {
        Outcome::Pass
    };
    report.push(
        F3,
        outcome,
        format!("{checked} refusal families closed, {unknown} undecided"),
    );
}

fn check_d1<R: Output + fmt::Display>(
    report: &mut HealthReport,
    p: &ITree<R>,
    ts: &BTreeSet<Vec<TickEvent<R>>>,
    ds: &BTreeSet<super::Divergence>,
    max_len: usize,
    fuel: usize,
) {
    if ds.is_empty() {
        report.push(D1, Outcome::Pass, "no divergences within the bound");
        return;
    }
    let mut alphabet: BTreeSet<Event> = ts
        .iter()
        .flatten()
        .filter_map(|e| match e {
            TickEvent::Ev(e) => Some(e.clone()),
            TickEvent::Tick(_) => None,
        })
        .collect();
    alphabet.insert(Event::sync("probe"));
    let alphabet: Vec<Event> = alphabet.into_iter().collect();
    let mut checked = 0;
    for d in ds {
        let room = max_len.saturating_sub(d.trace.len()).min(D1_EXTENSION);
        let mut frontier = vec![d.trace.clone()];
        for _ in 0..=room {
            let mut next = Vec::new();
            for s in &frontier {
                match divergence_check(p, s, fuel) {
                    Verdict::True => checked += 1,
                    v @ (Verdict::Unknown(_) | Verdict::Bounded(_)) => {
                        report.push(D1, Outcome::Inconclusive, v.to_string());
                        return;
                    }
                    Verdict::False(_) => {
                        let path: Vec<String> = s.iter().map(|e| e.to_string()).collect();
                        report.push(
                            D1,
                            Outcome::Fail,
                            format!("<{}> extends a divergence but is not one", path.join(", ")),
                        );
                        return;
                    }
                }
                for e in &alphabet {
                    let mut s2 = s.clone();
                    s2.push(e.clone());
                    next.push(s2);
                }
            }
            frontier = next;
        }
    }
    report.push(
        D1,
        Outcome::Pass,
        format!("{} divergences, {checked} extensions divergent", ds.len()),
    );
}

fn check_weak_bisim<R: Output + fmt::Display>(
    report: &mut HealthReport,
    p: &ITree<R>,
    fs: &BTreeSet<super::Failure<R>>,
    ds: &BTreeSet<super::Divergence>,
    max_len: usize,
    fuel: usize,
) {
    for k in TAU_PREFIXES {
        let q = ITree::taus(k, p.clone());
        if let Verdict::False(c) = weak_bisim_to_depth(p, &q, max_len, fuel) {
            report.push(
                WEAK_BISIM,
                Outcome::Fail,
                format!("P and τ^{k} P not weakly bisimilar: {c}"),
            );
            return;
        }
        if &failures_enum(&q, max_len, fuel) != fs {
            report.push(WEAK_BISIM, Outcome::Fail, format!("failures of τ^{k} P differ"));
            return;
        }
        let dq: BTreeSet<Vec<Event>> = divergences(&q, max_len, fuel).into_iter().map(|d| d.trace).collect();
        let dp: BTreeSet<Vec<Event>> = ds.iter().map(|d| d.trace.clone()).collect();
        if dq != dp {
            report.push(WEAK_BISIM, Outcome::Fail, format!("divergences of τ^{k} P differ"));
            return;
        }
    }
    report.push(
        WEAK_BISIM,
        Outcome::Pass,
        format!("τ^k P for k in {TAU_PREFIXES:?}: equal failures and divergences"),
    );
}

fn check_div_free<R: Output>(
    report: &mut HealthReport,
    p: &ITree<R>,
    ds: &BTreeSet<super::Divergence>,
    max_len: usize,
    state_budget: usize,
    fuel: usize,
) {
    let traces_of = |path: &[PathStep]| -> Vec<Event> {
        path.iter()
            .filter_map(|s| match s {
                PathStep::Event(e) => Some(e.clone()),
                PathStep::Tau => None,
            })
            .collect()
    };
    match div_free(p, state_budget, fuel) {
        Verdict::True if ds.is_empty() => report.push(DIV_FREE, Outcome::Pass, "divergence free; no divergences"),
        Verdict::True => report.push(DIV_FREE, Outcome::Fail, "divergence free, yet divergences were found"),
        Verdict::False(c) => {
            let w = traces_of(&c.path);
            if w.len() > max_len {
                report.push(DIV_FREE, Outcome::Pass, "divergent beyond the trace bound");
            } else if ds.iter().any(|d| d.trace == w) {
                report.push(
                    DIV_FREE,
                    Outcome::Pass,
                    format!("divergent; witness {c} is a divergence"),
                );
            } else {
                report.push(DIV_FREE, Outcome::Fail, format!("witness {c} missing from divergences"));
            }
        }
        v @ (Verdict::Unknown(_) | Verdict::Bounded(_)) => {
            let why = v.to_string();
            match div_free_within(p, max_len, state_budget, fuel) {
                Verdict::True if ds.is_empty() => report.push(
                    DIV_FREE,
                    Outcome::Pass,
                    format!("unbounded check {why}; divergence free within {max_len} events, no divergences"),
                ),
                Verdict::False(c) if ds.iter().any(|d| d.trace == traces_of(&c.path)) => report.push(
                    DIV_FREE,
                    Outcome::Pass,
                    format!("unbounded check {why}; divergent within {max_len} events"),
                ),
                Verdict::Unknown(why2) => report.push(DIV_FREE, Outcome::Inconclusive, format!("{why}; {why2}")),
                v => report.push(
                    DIV_FREE,
                    Outcome::Fail,
                    format!("bounded divergence freedom {v} disagrees with divergences"),
                ),
            }
        }
    }
}

fn check_no_refusal<R: Output + fmt::Display>(
    report: &mut HealthReport,
    p: &ITree<R>,
    ts: &BTreeSet<Vec<TickEvent<R>>>,
    ds: &BTreeSet<super::Divergence>,
    fuel: usize,
) {
    if !ds.is_empty() {
        report.push(NO_REFUSAL, Outcome::Pass, "vacuous: the process diverges");
        return;
    }
    let mut checked = 0;
    for t in ts.iter().filter(|t| !t.is_empty()) {
        let (a, s) = t.split_last().expect("nonempty");
        match failure_check(p, s, &TickSet::of([a.clone()]), fuel) {
            Verdict::False(_) => checked += 1,
            Verdict::True => {
                report.push(NO_REFUSAL, Outcome::Fail, format!("{} can refuse {a}", show(s)));
                return;
            }
            v @ (Verdict::Unknown(_) | Verdict::Bounded(_)) => {
                report.push(NO_REFUSAL, Outcome::Inconclusive, v.to_string());
                return;
            }
        }
    }
    report.push(
        NO_REFUSAL,
        Outcome::Pass,
        format!("{checked} possible events never refused"),
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{inp, prefix};
    use crate::itree::{div, run};
    use crate::optics::{ChanDecl, Kind, Value};

    #[test]
    fn inp_is_healthy() {
        let c = ChanDecl::new("c", Kind::Int);
        let p = inp(&c, (0..4).map(Value::Int));
        let r = healthiness_suite(&p, &Bounds::with_len(2));
        assert!(r.passed(), "{r}");
        assert_eq!(r.get(F3).unwrap().outcome, Outcome::Pass);
    }

    #[test]
    fn div_is_healthy() {
        let r = healthiness_suite(&div::<Value>(), &Bounds::with_len(3));
        assert!(r.passed(), "{r}");
        assert_eq!(r.get(D1).unwrap().outcome, Outcome::Pass);
        assert_eq!(r.get(DIV_FREE).unwrap().outcome, Outcome::Pass);
    }

    #[test]
    fn run_and_late_divergence() {
        let r = healthiness_suite(&run::<Value>([Event::sync("a")]), &Bounds::with_len(3));
        assert!(r.checks.iter().all(|c| c.outcome == Outcome::Pass), "{r}");
        let p = prefix(Event::sync("a"), div::<Value>());
        let r = healthiness_suite(&p, &Bounds::with_len(3));
        assert!(r.checks.iter().all(|c| c.outcome == Outcome::Pass), "{r}");
    }

    #[test]
    fn report_serialises() {
        let r = healthiness_suite(&ITree::ret(Value::Unit), &Bounds::with_len(2));
        assert!(r
            .to_json()
            .starts_with(r#"{"checks":[{"property":"F3","outcome":"pass""#));
    }
}
