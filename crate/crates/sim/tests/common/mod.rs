//! Scripted console sessions with recorded transcripts.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use itree_core::Value;
use itree_lang::corpus;
use itree_sim::console::run_console;
use itree_sim::{Session, SimConfig, Status};

const CONTROL: &str = include_str!("../golden/control.itp");

pub struct Case {
    pub name: &'static str,
    pub src: &'static str,
    pub process: &'static str,
    pub args: Vec<Value>,
    pub input: &'static str,
}

fn case(name: &'static str, src: &'static str, process: &'static str, input: &'static str) -> Case {
    Case {
        name,
        src,
        process,
        args: Vec::new(),
        input,
    }
}

pub fn cases() -> Vec<Case> {
    let buffer_script = "Input.1\nInput.2\nInput.7\nInput 2\nState.[1,2]\nOutput.1\nState.[2]\n";
    vec![
        Case {
            args: vec![Value::List(vec![])],
            ..case("buffer", corpus::BUFFER, "buffer", buffer_script)
        },
        case("cbuffer", corpus::BUFFER, "cbuffer", buffer_script),
        case("buffer_by_index", corpus::BUFFER, "cbuffer", "2\n9\n4\n"),
        case("diverge", CONTROL, "Diverge", "Y\nno\n"),
        case("diverge_eof", CONTROL, "Diverge", ""),
        case("deadlock", CONTROL, "Stuck", "a\n"),
        case("terminate", CONTROL, "Answer", "b\na\n"),
        case("skip", CONTROL, "Done", ""),
        case("quiet", CONTROL, "Quiet", "b\n"),
        case("long_run", CONTROL, "Long", "Y\nb\n"),
        case("emit", CONTROL, "Emit", "out.2\nout.1\nout.2\n"),
        case(
            "ring",
            corpus::RING,
            "ring",
            "Input.3\nInput.1\nOutput.3\nInput.2\nOutput.1\nOutput.2\n",
        ),
    ]
}

pub fn transcript(c: &Case) -> (String, Status) {
    let program = itree_lang::load(c.src).expect("golden source loads");
    let args = if c.args.is_empty() {
        program.default_args(c.process)
    } else {
        c.args.clone()
    };
    let tree = program.instantiate(c.process, args).expect("process instantiates");
    let mut session = Session::new(c.process, tree, SimConfig::default());
    let mut out = Vec::new();
    let status = run_console(&mut session, &mut c.input.as_bytes(), &mut out, true).expect("in-memory io");
    (String::from_utf8(out).expect("utf-8"), status)
}

pub fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.txt"))
}

/// The recorded transcript for a case.
pub fn expected(name: &str) -> String {
    let path = golden_path(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
