//! Command-line front end: `itsim sim|check|enum|serve`.

use std::io::{self, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use itree_core::csp::EventSet;
use itree_core::gen::random_ktree;
use itree_core::itree::{stabilise, Stabilisation, DEFAULT_FUEL};
use itree_core::laws::{choice_laws, hiding_law, monad_laws, parallel_laws, LawBounds, LawCheck};
use itree_core::semantics::{divergences, failures_enum, healthiness_suite, traces, Bounds, Record};
use itree_core::{Event, ITree, Node, Value};
use itree_lang::Program;

use crate::console::{run_console, run_json};
use crate::server::{self, App};
use crate::session::{Session, SimConfig};

#[derive(Debug, Parser)]
#[command(name = "itsim", version, about = "Simulate and check interaction-tree processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Step through a process interactively.
    Sim {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        sim: SimFlags,
        /// Speak JSON lines on stdin/stdout instead of the console dialogue.
        #[arg(long)]
        json: bool,
    },
    /// Run bounded law or healthiness checks.
    Check {
        what: CheckKind,
        #[command(flatten)]
        target: Target,
        /// Second operand for the binary laws; defaults to the process itself.
        #[arg(long)]
        with: Option<String>,
        /// Bisimulation depth for laws. Exploration is exhaustive, so its cost
        /// grows with the branching of the process raised to this power.
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Trace length bound for healthiness.
        #[arg(long, default_value_t = 4)]
        len: usize,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        #[arg(long)]
        json: bool,
    },
    /// List bounded traces, failures or divergences.
    Enum {
        what: EnumKind,
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        len: usize,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        #[arg(long)]
        json: bool,
    },
    /// Serve simulation sessions over WebSocket at `/ws`.
    Serve {
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        sim: SimFlags,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        port: u16,
    },
}

#[derive(Debug, Args)]
pub struct Target {
    /// Source file.
    pub file: PathBuf,
    /// Process name.
    pub process: String,
    /// Process argument, one per parameter, as a value literal such as `[]`.
    #[arg(long = "init")]
    pub init: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SimFlags {
    /// τ steps before asking whether to continue.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub tau_limit: u64,
    /// End the session after this many visible events.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Longest menu shown in full.
    #[arg(long, default_value_t = 1000)]
    pub max_menu: usize,
}

impl SimFlags {
    fn config(&self) -> SimConfig {
        SimConfig {
            tau_prompt_threshold: self.tau_limit as usize,
            max_menu: self.max_menu,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CheckKind {
    Laws,
    Health,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EnumKind {
    Traces,
    Failures,
    Divergences,
}

/// Exit code for a check that found a counterexample.
const FAILED: u8 = 1;
/// Exit code for unreadable or ill-formed input.
const BAD_INPUT: u8 = 2;

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("{msg}");
            ExitCode::from(BAD_INPUT)
        }
    }
}

pub fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Cmd::Sim { target, sim, json } => {
            let (_, tree) = load(&target)?;
            let mut session = Session::new(target.process.clone(), tree, sim.config());
            let stdin = io::stdin();
            let mut input = stdin.lock();
            let mut out = io::stdout().lock();
            let res = if json {
                run_json(&mut session, &mut input, &mut out)
            } else {
                let echo = !stdin.is_terminal();
                run_console(&mut session, &mut input, &mut out, echo).map(|_| ())
            };
            res.map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Check {
            what: CheckKind::Laws,
            target,
            with,
            depth,
            fuel,
            ..
        } => {
            let (program, p) = load(&target)?;
            let q = match with {
                Some(name) => instantiate(&program, &name, &[])?,
                None => p.clone(),
            };
            let checks = law_checks(&program, &p, &q, &LawBounds { depth, fuel });
            print_lines(checks.iter().map(|c| {
                let tag = match &c.verdict {
                    v if v.holds() => "pass",
                    v if v.is_false() => "FAIL",
                    _ => "unknown",
                };
                format!("{tag:<8} {c}")
            }))?;
            Ok(exit(checks.iter().all(|c| !c.verdict.is_false())))
        }
        Cmd::Check {
            what: CheckKind::Health,
            target,
            len,
            fuel,
            json,
            ..
        } => {
            let (_, p) = load(&target)?;
            let bounds = Bounds {
                max_len: len,
                fuel,
                ..Bounds::default()
            };
            let report = healthiness_suite(&p, &bounds);
            let text = if json { report.to_json() } else { report.to_string() };
            print_lines(text.lines().map(str::to_string))?;
            Ok(exit(report.passed()))
        }
        Cmd::Enum {
            what,
            target,
            len,
            fuel,
            json,
        } => {
            let (_, p) = load(&target)?;
            let records = match what {
                EnumKind::Traces => Record::traces(&traces(&p, len, fuel)),
                EnumKind::Failures => Record::failures(&failures_enum(&p, len, fuel)),
                EnumKind::Divergences => Record::divergences(&divergences(&p, len, fuel)),
            };
            print_lines(records.iter().map(|r| if json { r.to_json() } else { r.to_string() }))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Serve {
            target,
            sim,
            host,
            port,
        } => {
            let (_, tree) = load(&target)?;
            let app = Arc::new(App {
                process: target.process.clone(),
                tree,
                config: sim.config(),
            });
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .map_err(|e| format!("{host}:{port}: {e}"))?;
                let addr = listener.local_addr().map_err(|e| e.to_string())?;
                eprintln!("serving `{}` on ws://{addr}/ws", target.process);
                server::serve(listener, app).await.map_err(|e| e.to_string())
            })?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Writes lines to stdout, stopping quietly if the reader has gone away.
fn print_lines(lines: impl Iterator<Item = String>) -> Result<(), String> {
    let mut out = io::stdout().lock();
    for line in lines {
        match writeln!(out, "{line}") {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => return Ok(()),
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(())
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(FAILED)
    }
}

/// Reads, checks and elaborates the file, and instantiates the process.
pub fn load(target: &Target) -> Result<(Program, ITree<Value>), String> {
    let file = target.file.display().to_string();
    let src = std::fs::read_to_string(&target.file).map_err(|e| format!("{file}: {e}"))?;
    let program = itree_lang::load(&src).map_err(|e| e.render(&file, &src))?;
    let tree = instantiate(&program, &target.process, &target.init)?;
    Ok((program, tree))
}

fn instantiate(program: &Program, name: &str, init: &[String]) -> Result<ITree<Value>, String> {
    let args = if init.is_empty() {
        program.default_args(name)
    } else {
        init.iter()
            .map(|s| s.parse::<Value>().map_err(|e| format!("--init {s}: {e}")))
            .collect::<Result<_, _>>()?
    };
    program.instantiate(name, args).map_err(|e| e.to_string())
}

/// The laws instantiated at `p` and `q`: seeded random continuations, the
/// events `p` first offers, and every declared channel as the sync set.
fn law_checks(program: &Program, p: &ITree<Value>, q: &ITree<Value>, b: &LawBounds) -> Vec<LawCheck> {
    let gen = itree_core::gen::GenConfig::default();
    let ks = [random_ktree(1, gen), random_ktree(2, gen), random_ktree(3, gen)];
    let offered: Vec<Event> = match stabilise(p, b.fuel) {
        Stabilisation::Stable { node, .. } => match node.force() {
            Node::Vis(m) => m.keys().cloned().collect(),
            _ => Vec::new(),
        },
        _ => Vec::new(),
    };
    let mut checks = monad_laws(p, [&ks[0], &ks[1], &ks[2]], Value::Unit, &offered, b);
    checks.extend(choice_laws(p, q, &ks[0], b));
    let sync = EventSet::of_channels(program.channels().iter().map(|c| c.name.clone()));
    checks.extend(parallel_laws(p, q, &sync, b));
    if let [a, e, ..] = offered.as_slice() {
        checks.push(hiding_law(p, q, a, e, b));
    }
    checks
}
