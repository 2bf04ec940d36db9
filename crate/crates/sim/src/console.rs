//! The terminal front end, and the same session spoken as JSON lines.

use std::io::{self, BufRead, Write};

use crate::protocol::{Command, SimMsg};
use crate::session::{Session, Status};

/// Runs `session` as an interactive console dialogue until it ends or the
/// input runs out. With `echo`, input lines are copied to the output so a
/// scripted run reads like a terminal transcript.
pub fn run_console(
    session: &mut Session,
    input: &mut impl BufRead,
    out: &mut impl Write,
    echo: bool,
) -> io::Result<Status> {
    let threshold = session.config().tau_prompt_threshold;
    let mut msgs = session.start();
    loop {
        for m in &msgs {
            match (m, m.console_line(threshold)) {
                (SimMsg::ManySteps { .. }, Some(line)) => write!(out, "{line} ")?,
                (_, Some(line)) => writeln!(out, "{line}")?,
                (_, None) => {}
            }
        }
        if session.status().is_over() {
            out.flush()?;
            return Ok(session.status().clone());
        }
        if *session.status() == Status::Running {
            write!(out, "> ")?;
        }
        out.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            if echo {
                writeln!(out)?;
            }
            msgs = session.handle(Command::End);
            continue;
        }
        let line = line.trim_end_matches(['\n', '\r']);
        if echo {
            writeln!(out, "{line}")?;
        }
        msgs = match session.status() {
            Status::AwaitingContinue => session.respond(line == "Y"),
            _ => session.choose_text(line),
        };
    }
}

/// Runs `session` over newline-delimited JSON: commands in, messages out.
pub fn run_json(session: &mut Session, input: &mut impl BufRead, out: &mut impl Write) -> io::Result<()> {
    let emit = |out: &mut dyn Write, msgs: Vec<SimMsg>| -> io::Result<()> {
        for m in msgs {
            writeln!(out, "{}", m.to_json())?;
        }
        out.flush()
    };
    emit(out, session.start())?;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let msgs = match serde_json::from_str::<Command>(&line) {
            Ok(cmd) => session.handle(cmd),
            Err(_) => session.bad_frame(&line),
        };
        emit(out, msgs)?;
    }
    Ok(())
}
