//! A simulation session: one process being stepped through by one user.
//!
//! The control flow follows the classic console simulator. τ steps are taken
//! silently, announcing "Internal Activity..." on the first one; once the
//! τ count reaches the threshold the user is asked whether to go on. A return
//! ends the session, an empty menu is a deadlock, and a non-empty menu waits
//! for a choice. Choosing an event resets the τ count.

use itree_core::semantics::TickEvent;
use itree_core::{Event, ITree, Node, Value};

use crate::protocol::{Command, RejectReason, SimMsg, PROTOCOL_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    /// τ steps taken before asking whether to continue; at least 1.
    pub tau_prompt_threshold: usize,
    /// Longest menu sent in full.
    pub max_menu: usize,
    /// Visible events after which the session ends by itself.
    pub max_depth: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            tau_prompt_threshold: 20,
            max_menu: 1000,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    /// Showing a menu and waiting for a choice.
    Running,
    /// Asked whether to keep taking τ steps.
    AwaitingContinue,
    Terminated(Value),
    Deadlocked,
    /// Stopped by the user or by the depth limit.
    Ended,
}

impl Status {
    pub fn is_over(&self) -> bool {
        matches!(self, Status::Terminated(_) | Status::Deadlocked | Status::Ended)
    }
}

pub struct Session {
    name: String,
    initial: ITree<Value>,
    current: ITree<Value>,
    trace: Vec<TickEvent<Value>>,
    tau_count: usize,
    config: SimConfig,
    status: Status,
}

impl Session {
    /// A session on `tree`, not yet started.
    pub fn new(name: impl Into<String>, tree: ITree<Value>, mut config: SimConfig) -> Session {
        config.tau_prompt_threshold = config.tau_prompt_threshold.max(1);
        config.max_menu = config.max_menu.max(1);
        Session {
            name: name.into(),
            initial: tree.clone(),
            current: tree,
            trace: Vec::new(),
            tau_count: 0,
            config,
            status: Status::Running,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn trace(&self) -> &[TickEvent<Value>] {
        &self.trace
    }

    pub fn tau_count(&self) -> usize {
        self.tau_count
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// The events on offer, in menu order; empty unless running.
    pub fn menu(&self) -> Vec<Event> {
        match (&self.status, self.current.force()) {
            (Status::Running, Node::Vis(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Greets the client and runs to the first prompt.
    pub fn start(&mut self) -> Vec<SimMsg> {
        let mut out = vec![SimMsg::Hello {
            version: PROTOCOL_VERSION,
            process: self.name.clone(),
        }];
        self.advance(&mut out);
        out
    }

    /// Back to the initial process with an empty trace.
    pub fn reset(&mut self) -> Vec<SimMsg> {
        self.current = self.initial.clone();
        self.trace.clear();
        self.tau_count = 0;
        self.status = Status::Running;
        self.start()
    }

    pub fn handle(&mut self, cmd: Command) -> Vec<SimMsg> {
        match cmd {
            Command::Choose {
                event: Some(e),
                index: None,
            } => match e.trim().parse::<Event>() {
                Ok(ev) => self.choose_event(&e, &ev),
                Err(_) => self.reject(e, RejectReason::NoParse),
            },
            Command::Choose {
                event: None,
                index: Some(i),
            } => self.choose_index(i),
            c @ Command::Choose { .. } => self.reject(command_text(&c), RejectReason::BadFrame),
            Command::Continue if self.status == Status::AwaitingContinue => self.respond(true),
            Command::End if !self.status.is_over() => {
                self.status = Status::Ended;
                vec![SimMsg::Ended]
            }
            Command::Reset => self.reset(),
            c => self.reject(command_text(&c), RejectReason::Unexpected),
        }
    }

    /// A line typed at a menu: a menu index or an event literal.
    pub fn choose_text(&mut self, input: &str) -> Vec<SimMsg> {
        let text = input.trim();
        if let Ok(i) = text.parse::<usize>() {
            return self.choose_index(i);
        }
        match text.parse::<Event>() {
            Ok(ev) => self.choose_event(text, &ev),
            Err(_) => self.reject(text.to_string(), RejectReason::NoParse),
        }
    }

    pub fn choose_index(&mut self, i: usize) -> Vec<SimMsg> {
        if self.status != Status::Running {
            return self.reject(i.to_string(), RejectReason::Unexpected);
        }
        match self.menu().get(i) {
            Some(ev) => {
                let ev = ev.clone();
                self.take(ev)
            }
            None => self.reject(i.to_string(), RejectReason::NotEnabled),
        }
    }

    fn choose_event(&mut self, input: &str, ev: &Event) -> Vec<SimMsg> {
        if self.status != Status::Running {
            return self.reject(input.to_string(), RejectReason::Unexpected);
        }
        let offered = match self.current.force() {
            Node::Vis(m) => m.contains_key(ev),
            _ => false,
        };
        if offered {
            self.take(ev.clone())
        } else {
            self.reject(input.to_string(), RejectReason::NotEnabled)
        }
    }

    /// Answers the continue prompt.
    pub fn respond(&mut self, go_on: bool) -> Vec<SimMsg> {
        if self.status != Status::AwaitingContinue {
            return self.reject(if go_on { "Y" } else { "N" }.into(), RejectReason::Unexpected);
        }
        if !go_on {
            self.status = Status::Ended;
            return vec![SimMsg::Ended];
        }
        let Node::Sil(next) = self.current.force() else {
            unreachable!("the continue prompt is only shown at a τ")
        };
        self.current = next.clone();
        self.tau_count = 0;
        self.status = Status::Running;
        let mut out = Vec::new();
        self.advance(&mut out);
        out
    }

    fn take(&mut self, ev: Event) -> Vec<SimMsg> {
        let Node::Vis(m) = self.current.force() else {
            unreachable!("choices are only taken at a menu")
        };
        let next = m.get(&ev).cloned().expect("event is on the menu");
        self.current = next;
        self.trace.push(TickEvent::Ev(ev.clone()));
        self.tau_count = 0;
        let mut out = vec![SimMsg::Accepted { event: ev }];
        self.advance(&mut out);
        out
    }

    /// Answers a frame that is not a command.
    pub fn bad_frame(&mut self, text: &str) -> Vec<SimMsg> {
        self.reject(text.to_string(), RejectReason::BadFrame)
    }

    /// Reports a rejected input and repeats the pending prompt.
    fn reject(&mut self, input: String, reason: RejectReason) -> Vec<SimMsg> {
        let mut out = vec![SimMsg::Rejected { input, reason }];
        match self.status {
            Status::Running => out.push(self.menu_msg()),
            Status::AwaitingContinue => out.push(SimMsg::ManySteps { count: self.tau_count }),
            _ => {}
        }
        out
    }

    fn menu_msg(&self) -> SimMsg {
        let mut events = self.menu();
        let more = events.len().saturating_sub(self.config.max_menu);
        events.truncate(self.config.max_menu);
        SimMsg::Menu { events, more }
    }

    fn advance(&mut self, out: &mut Vec<SimMsg>) {
        loop {
            let next = match self.current.force() {
                Node::Ret(v) => {
                    self.trace.push(TickEvent::Tick(v.clone()));
                    self.status = Status::Terminated(v.clone());
                    out.push(SimMsg::Terminated { value: v.clone() });
                    return;
                }
                Node::Sil(p) => {
                    if self.tau_count == 0 {
                        out.push(SimMsg::InternalActivity);
                    }
                    if self.tau_count >= self.config.tau_prompt_threshold {
                        self.status = Status::AwaitingContinue;
                        out.push(SimMsg::ManySteps { count: self.tau_count });
                        return;
                    }
                    self.tau_count += 1;
                    p.clone()
                }
                Node::Vis(m) if m.is_empty() => {
                    self.status = Status::Deadlocked;
                    out.push(SimMsg::Deadlocked);
                    return;
                }
                Node::Vis(_) => {
                    if self.config.max_depth.is_some_and(|d| self.trace.len() >= d) {
                        self.status = Status::Ended;
                        out.push(SimMsg::Ended);
                        return;
                    }
                    self.status = Status::Running;
                    if let Some(note) = self.current.note() {
                        out.push(SimMsg::StateNote { text: note.to_string() });
                    }
                    out.push(self.menu_msg());
                    return;
                }
            };
            self.current = next;
        }
    }
}

fn command_text(c: &Command) -> String {
    serde_json::to_string(c).expect("commands serialise")
}

#[cfg(test)]
mod tests {
    use itree_core::itree::div;
    use itree_core::PFun;

    use super::*;

    fn ev(s: &str) -> Event {
        s.parse().unwrap()
    }

    fn ab() -> ITree<Value> {
        let b = ITree::vis(PFun::singleton(ev("b"), ITree::ret(Value::Int(7))));
        ITree::vis(PFun::from_alist([(ev("a"), b), (ev("c"), ITree::stop())]))
    }

    #[test]
    fn terminates_and_deadlocks() {
        let mut s = Session::new("p", ITree::ret(Value::Unit), SimConfig::default());
        assert_eq!(s.start()[1], SimMsg::Terminated { value: Value::Unit });
        assert_eq!(s.trace(), &[TickEvent::Tick(Value::Unit)]);

        let mut s = Session::new("p", ITree::stop(), SimConfig::default());
        assert_eq!(s.start()[1], SimMsg::Deadlocked);
        assert_eq!(s.status(), &Status::Deadlocked);
    }

    #[test]
    fn divergence_prompts_after_threshold() {
        let mut s = Session::new("p", div(), SimConfig::default());
        let out = s.start();
        assert_eq!(out[1..], [SimMsg::InternalActivity, SimMsg::ManySteps { count: 20 }]);
        assert_eq!(s.status(), &Status::AwaitingContinue);
        let out = s.respond(true);
        assert_eq!(out, [SimMsg::InternalActivity, SimMsg::ManySteps { count: 20 }]);
        assert_eq!(s.respond(false), [SimMsg::Ended]);
        assert!(s.status().is_over());
    }

    #[test]
    fn threshold_counts_exactly() {
        let cfg = SimConfig {
            tau_prompt_threshold: 3,
            ..SimConfig::default()
        };
        let mut s = Session::new("p", ITree::taus(3, ab()), cfg);
        assert!(matches!(s.start().last(), Some(SimMsg::Menu { .. })));
        let mut s = Session::new("p", ITree::taus(4, ab()), cfg);
        assert_eq!(s.start().last(), Some(&SimMsg::ManySteps { count: 3 }));
        // The prompt stands on the fourth τ; continuing takes it.
        let out = s.respond(true);
        assert!(matches!(out[..], [SimMsg::Menu { .. }]));
    }

    #[test]
    fn choices_by_name_and_index() {
        let mut s = Session::new("p", ab(), SimConfig::default());
        s.start();
        let out = s.choose_text("d");
        assert_eq!(
            out[0],
            SimMsg::Rejected {
                input: "d".into(),
                reason: RejectReason::NotEnabled
            }
        );
        assert_eq!(
            out[1],
            SimMsg::Menu {
                events: vec![ev("a"), ev("c")],
                more: 0
            }
        );
        let out = s.choose_text("?!");
        assert_eq!(
            out[0],
            SimMsg::Rejected {
                input: "?!".into(),
                reason: RejectReason::NoParse
            }
        );
        let out = s.choose_text("0");
        assert_eq!(out[0], SimMsg::Accepted { event: ev("a") });
        assert_eq!(s.tau_count(), 0);
        let out = s.handle(Command::choose_event("b"));
        assert_eq!(out[1], SimMsg::Terminated { value: Value::Int(7) });
        assert_eq!(s.trace().len(), 3);
        let out = s.handle(Command::choose_index(0));
        assert_eq!(
            out,
            [SimMsg::Rejected {
                input: "0".into(),
                reason: RejectReason::Unexpected
            }]
        );
        let out = s.handle(Command::Reset);
        assert!(matches!(out.last(), Some(SimMsg::Menu { .. })));
        assert!(s.trace().is_empty());
    }

    #[test]
    fn long_menus_are_cut() {
        let cfg = SimConfig {
            max_menu: 1,
            ..SimConfig::default()
        };
        let mut s = Session::new("p", ab(), cfg);
        assert_eq!(
            s.start()[1],
            SimMsg::Menu {
                events: vec![ev("a")],
                more: 1
            }
        );
        assert_eq!(s.choose_text("c")[1], SimMsg::Deadlocked);
    }

    #[test]
    fn depth_limit_ends_the_session() {
        let cfg = SimConfig {
            max_depth: Some(1),
            ..SimConfig::default()
        };
        let mut s = Session::new("p", ab(), cfg);
        s.start();
        assert_eq!(s.choose_text("a"), [SimMsg::Accepted { event: ev("a") }, SimMsg::Ended]);
    }

    #[test]
    fn notes_precede_menus() {
        let t = ITree::vis_noted(PFun::singleton(ev("a"), ITree::stop()), "{n: 1}");
        let mut s = Session::new("p", t, SimConfig::default());
        let out = s.start();
        assert_eq!(out[1], SimMsg::StateNote { text: "{n: 1}".into() });
        assert!(matches!(out[2], SimMsg::Menu { .. }));
    }
}
