//! The JSON protocol spoken between a simulation session and its client.
//!
//! Every message is one JSON object, one per WebSocket frame or per line on
//! a byte stream, tagged by `type`. Server to client:
//!
//! ```text
//! {"type":"hello","version":1,"process":"buffer"}
//! {"type":"internalActivity"}
//! {"type":"stateNote","text":"{buf: [3]}"}
//! {"type":"menu","events":["Input.0","Output.3"]}
//! {"type":"menu","events":["a.0","a.1"],"more":98}
//! {"type":"accepted","event":"Input.0"}
//! {"type":"rejected","input":"Foo","reason":"notEnabled"}
//! {"type":"manySteps","count":20}
//! {"type":"terminated","value":"()"}
//! {"type":"deadlocked"}
//! {"type":"ended"}
//! ```
//!
//! Client to server:
//!
//! ```text
//! {"type":"choose","event":"Input.0"}
//! {"type":"choose","index":0}
//! {"type":"continue"}
//! {"type":"end"}
//! {"type":"reset"}
//! ```
//!
//! Values and events travel in their printed text form. A `menu` lists at
//! most the session's menu limit; `more` counts the events left out, which
//! can still be chosen by name.

use itree_core::{Event, Value};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum SimMsg {
    Hello {
        version: u32,
        process: String,
    },
    InternalActivity,
    StateNote {
        text: String,
    },
    Menu {
        events: Vec<Event>,
        #[serde(default, skip_serializing_if = "is_zero")]
        more: usize,
    },
    Accepted {
        event: Event,
    },
    Rejected {
        input: String,
        reason: RejectReason,
    },
    ManySteps {
        count: usize,
    },
    Terminated {
        value: Value,
    },
    Deadlocked,
    Ended,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RejectReason {
    /// The input is not an event or a menu index.
    NoParse,
    /// A well-formed event the process does not offer now.
    NotEnabled,
    /// A command that does not fit the session's current status.
    Unexpected,
    /// A frame that is not a command.
    BadFrame,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Command {
    Choose {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        event: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        index: Option<usize>,
    },
    Continue,
    End,
    Reset,
}

impl Command {
    pub fn choose_event(e: impl Into<String>) -> Command {
        Command::Choose {
            event: Some(e.into()),
            index: None,
        }
    }

    pub fn choose_index(i: usize) -> Command {
        Command::Choose {
            event: None,
            index: Some(i),
        }
    }
}

impl SimMsg {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("messages serialise")
    }

    /// The console line for this message, as the terminal simulator prints
    /// it. `threshold` is the τ budget shown in the continue prompt.
    pub fn console_line(&self, threshold: usize) -> Option<String> {
        Some(match self {
            SimMsg::Hello { .. } | SimMsg::Accepted { .. } => return None,
            SimMsg::InternalActivity => "Internal Activity...".into(),
            SimMsg::StateNote { text } => format!("State: {text}"),
            SimMsg::Menu { events, more } => {
                let mut shown: Vec<String> = events.iter().map(|e| e.to_string()).collect();
                if *more > 0 {
                    shown.push(format!("... {more} more"));
                }
                format!("Events: [{}]", shown.join(", "))
            }
            SimMsg::Rejected { reason, .. } => match reason {
                RejectReason::NoParse | RejectReason::BadFrame => "No parse".into(),
                RejectReason::NotEnabled | RejectReason::Unexpected => "Rejected".into(),
            },
            SimMsg::ManySteps { .. } => format!("Many steps (> {threshold}); Continue?"),
            SimMsg::Terminated { value } => format!("Terminated: {value}"),
            SimMsg::Deadlocked => "Deadlocked.".into(),
            SimMsg::Ended => "Ended.".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_forms() {
        let menu = SimMsg::Menu {
            events: vec!["Input.0".parse().unwrap(), "State.[1,2]".parse().unwrap()],
            more: 0,
        };
        assert_eq!(menu.to_json(), r#"{"type":"menu","events":["Input.0","State.[1,2]"]}"#);
        assert_eq!(
            SimMsg::ManySteps { count: 20 }.to_json(),
            r#"{"type":"manySteps","count":20}"#
        );
        assert_eq!(SimMsg::Deadlocked.to_json(), r#"{"type":"deadlocked"}"#);
        assert_eq!(
            SimMsg::Terminated { value: Value::Unit }.to_json(),
            r#"{"type":"terminated","value":"()"}"#
        );
        assert_eq!(
            SimMsg::Rejected {
                input: "x".into(),
                reason: RejectReason::NoParse
            }
            .to_json(),
            r#"{"type":"rejected","input":"x","reason":"noParse"}"#
        );
        assert_eq!(SimMsg::InternalActivity.to_json(), r#"{"type":"internalActivity"}"#);
    }

    #[test]
    fn commands_parse() {
        let c: Command = serde_json::from_str(r#"{"type":"choose","event":"Input.1"}"#).unwrap();
        assert_eq!(c, Command::choose_event("Input.1"));
        let c: Command = serde_json::from_str(r#"{"type":"choose","index":3}"#).unwrap();
        assert_eq!(c, Command::choose_index(3));
        let c: Command = serde_json::from_str(r#"{"type":"continue"}"#).unwrap();
        assert_eq!(c, Command::Continue);
        assert!(serde_json::from_str::<Command>(r#"{"type":"jump"}"#).is_err());
    }

    #[test]
    fn messages_round_trip() {
        let msgs = [
            SimMsg::Hello {
                version: PROTOCOL_VERSION,
                process: "buffer".into(),
            },
            SimMsg::Menu {
                events: vec!["a".parse().unwrap()],
                more: 4,
            },
            SimMsg::Accepted {
                event: "rd.(1,2)".parse().unwrap(),
            },
            SimMsg::StateNote { text: "{n: 1}".into() },
            SimMsg::Ended,
        ];
        for m in msgs {
            let back: SimMsg = serde_json::from_str(&m.to_json()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn console_lines() {
        assert_eq!(SimMsg::Deadlocked.console_line(20).unwrap(), "Deadlocked.");
        assert_eq!(
            SimMsg::ManySteps { count: 20 }.console_line(20).unwrap(),
            "Many steps (> 20); Continue?"
        );
        assert_eq!(
            SimMsg::Terminated { value: Value::Int(3) }.console_line(20).unwrap(),
            "Terminated: 3"
        );
        assert_eq!(
            SimMsg::Accepted {
                event: "a".parse().unwrap()
            }
            .console_line(20),
            None
        );
    }
}
