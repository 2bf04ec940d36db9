//! Scripted console sessions compared against recorded transcripts.
//!
//! Run with `UPDATE_GOLDEN=1` to rewrite the transcripts after an intended
//! change to the console output.

mod common;

use common::{cases, expected, golden_path, transcript};
use itree_core::Value;
use itree_sim::Status;

#[test]
fn transcripts_match() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut stale = Vec::new();
    for c in cases() {
        let (text, _) = transcript(&c);
        let path = golden_path(c.name);
        if update {
            std::fs::write(&path, &text).unwrap();
            continue;
        }
        let want = expected(c.name);
        if text != want {
            stale.push(format!("--- {} expected\n{want}--- got\n{text}", c.name));
        }
    }
    assert!(stale.is_empty(), "{}", stale.join("\n"));
}

#[test]
fn sessions_are_deterministic() {
    for c in cases() {
        assert_eq!(transcript(&c), transcript(&c), "{}", c.name);
    }
}

#[test]
fn final_statuses() {
    let status = |name: &str| {
        let c = cases().into_iter().find(|c| c.name == name).unwrap();
        transcript(&c).1
    };
    assert_eq!(status("deadlock"), Status::Deadlocked);
    assert_eq!(status("terminate"), Status::Terminated(Value::Int(42)));
    assert_eq!(status("skip"), Status::Terminated(Value::Unit));
    assert_eq!(status("diverge"), Status::Ended);
    assert_eq!(status("buffer"), Status::Ended);
}
