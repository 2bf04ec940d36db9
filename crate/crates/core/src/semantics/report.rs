//! Machine-readable records for traces, failures and divergences.
//!
//! One record per line of JSON:
//!
//! ```text
//! {"kind":"trace","trace":["Input.1","State.[1]"]}
//! {"kind":"failure","trace":["c.1"],"refusesAllExcept":["✓1"]}
//! {"kind":"divergence","trace":[],"cause":"cycle","allExtensions":true}
//! ```
//!
//! A failure record stands for every refusal set disjoint from
//! `refusesAllExcept`. A divergence record stands for its trace and all of
//! its extensions.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{Divergence, DivergenceKind, Failure, Trace};
use crate::itree::Output;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FailureRecord {
    pub trace: Vec<String>,
    pub refuses_all_except: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DivergenceRecord {
    pub trace: Vec<String>,
    pub cause: &'static str,
    pub all_extensions: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    Trace(TraceRecord),
    Failure(FailureRecord),
    Divergence(DivergenceRecord),
}

fn strings<T: fmt::Display>(xs: impl IntoIterator<Item = T>) -> Vec<String> {
    xs.into_iter().map(|x| x.to_string()).collect()
}

impl Record {
    pub fn traces<R: Output + fmt::Display>(ts: &BTreeSet<Trace<R>>) -> Vec<Record> {
        ts.iter()
            .map(|t| Record::Trace(TraceRecord { trace: strings(t) }))
            .collect()
    }

    pub fn failures<R: Output + fmt::Display>(fs: &BTreeSet<Failure<R>>) -> Vec<Record> {
        fs.iter()
            .map(|f| {
                Record::Failure(FailureRecord {
                    trace: strings(&f.trace),
                    refuses_all_except: strings(&f.enabled),
                })
            })
            .collect()
    }

    pub fn divergences(ds: &BTreeSet<Divergence>) -> Vec<Record> {
        ds.iter()
            .map(|d| {
                Record::Divergence(DivergenceRecord {
                    trace: strings(&d.trace),
                    cause: match d.kind {
                        DivergenceKind::Cycle => "cycle",
                        DivergenceKind::FuelExhausted => "fuel",
                    },
                    all_extensions: true,
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialise")
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tr = |t: &[String]| format!("<{}>", t.join(", "));
        match self {
            Record::Trace(r) => write!(f, "{}", tr(&r.trace)),
            Record::Failure(r) => write!(f, "({}, Σ✓ \\ {{{}}})", tr(&r.trace), r.refuses_all_except.join(", ")),
            Record::Divergence(r) => write!(f, "{} ++ _  ({})", tr(&r.trace), r.cause),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::inp;
    use crate::optics::{ChanDecl, Kind, Value};
    use crate::semantics::failures_enum;

    #[test]
    fn failure_records_render() {
        let p = inp(&ChanDecl::new("c", Kind::Int), [Value::Int(1)]);
        let recs = Record::failures(&failures_enum(&p, 2, 10));
        let json: Vec<String> = recs.iter().map(|r| r.to_json()).collect();
        assert!(json.contains(&r#"{"kind":"failure","trace":["c.1"],"refusesAllExcept":["✓1"]}"#.to_string()));
        let text: Vec<String> = recs.iter().map(|r| r.to_string()).collect();
        assert!(text.contains(&"(<c.1, ✓1>, Σ✓ \\ {})".to_string()));
    }

    #[test]
    fn divergence_records_render() {
        let ds = BTreeSet::from([Divergence {
            trace: vec![],
            kind: DivergenceKind::Cycle,
        }]);
        let r = &Record::divergences(&ds)[0];
        assert_eq!(
            r.to_json(),
            r#"{"kind":"divergence","trace":[],"cause":"cycle","allExtensions":true}"#
        );
    }
}
