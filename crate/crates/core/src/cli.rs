//! The `qpcf` command line.
//!
//! Exit codes: 0 success, 1 parse or input error, 2 type error,
//! 3 divergence or exhausted budget, 4 circuit emission error.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::eval::{EvalConfig, DEFAULT_FUEL, DEFAULT_MASS_EPS, DEFAULT_MAX_BRANCH_DEPTH};
use crate::index::DEFAULT_INDEX_FUEL;
use crate::qasm::emit_qasm;
use crate::qsim::DEFAULT_MAX_WIRES;
use crate::session::{Error, Session};
use crate::typecheck::display_type;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_TYPE: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_EMIT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "qpcf", version, about = "Type-check, run and simulate qPCF programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the type of the main term.
    Check(Options),
    /// Evaluate once, sampling measurements from the seed.
    Run(Options),
    /// Print the exact output distribution.
    Dist(Options),
    /// Evaluate a circuit-typed program and print the circuit.
    Circuit(Options),
}

#[derive(Args, Debug)]
struct Options {
    /// Source file, or `-` for standard input.
    file: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Machine steps allowed per derivation.
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Measurements allowed along one branch of `dist`.
    #[arg(long, default_value_t = DEFAULT_MAX_BRANCH_DEPTH)]
    depth: u32,
    #[arg(long, default_value_t = DEFAULT_MASS_EPS)]
    mass_eps: f64,
    /// Extra gate definition file; may be repeated.
    #[arg(long = "gates", value_name = "FILE")]
    gates: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_WIRES)]
    max_wires: u64,
    /// Reduction steps allowed when comparing indexes.
    #[arg(long, default_value_t = DEFAULT_INDEX_FUEL)]
    index_fuel: u64,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
    #[arg(long)]
    json: bool,
    /// Leave out the prelude definitions and gates.
    #[arg(long)]
    no_prelude: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Emit {
    Text,
    Qasm,
}

/// Probabilities to 12 significant digits, trailing zeros dropped.
pub fn format_probability(p: f64) -> String {
    if p == 0.0 {
        return "0".into();
    }
    let digits = (11 - p.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{p:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::NoMain | Error::GateFile(_) | Error::Registry(_) => EXIT_PARSE,
        Error::Type(_) | Error::NotACircuit(_) => EXIT_TYPE,
        Error::Eval(_) => EXIT_DIVERGENCE,
    }
}

fn read_source(path: &PathBuf) -> std::io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

/// Runs the command line with `args` (program name first) and returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let (opts, cmd) = match &cli.command {
        Command::Check(o) => (o, "check"),
        Command::Run(o) => (o, "run"),
        Command::Dist(o) => (o, "dist"),
        Command::Circuit(o) => (o, "circuit"),
    };
    let src = match read_source(&opts.file) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "cannot read {}: {e}", opts.file.display());
            return EXIT_PARSE;
        }
    };
    match execute(cmd, opts, &src, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Lang(e)) => {
            let _ = writeln!(err, "{e}");
            exit_code(&e)
        }
        Err(Failure::Emit(msg)) => {
            let _ = writeln!(err, "{msg}");
            EXIT_EMIT
        }
    }
}

enum Failure {
    Lang(Error),
    Emit(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lang(e)
    }
}

fn execute(cmd: &str, o: &Options, src: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let base = if o.no_prelude { Session::without_prelude() } else { Session::new() };
    let mut session = base.with_index_fuel(o.index_fuel).with_config(EvalConfig {
        fuel: o.fuel,
        max_branch_depth: o.depth,
        mass_eps: o.mass_eps,
        max_wires: o.max_wires,
    });
    for path in &o.gates {
        session.load_gate_file(path)?;
    }
    let io = |e: std::io::Error| Failure::Emit(format!("cannot write output: {e}"));
    match cmd {
        "check" => {
            let ty = display_type(&session.check(src)?.ty);
            if o.json {
                writeln!(out, "{}", json!({ "type": ty })).map_err(io)?;
            } else {
                writeln!(out, "{ty}").map_err(io)?;
            }
        }
        "run" => {
            let r = session.run(src, o.seed)?;
            if o.json {
                let v = json!({ "value": r.value.to_string(), "probability": r.probability });
                writeln!(out, "{v}").map_err(io)?;
            } else {
                writeln!(out, "{} (p={})", r.value, format_probability(r.probability)).map_err(io)?;
            }
        }
        "dist" => {
            let d = session.dist(src)?;
            if o.json {
                let masses: Vec<_> = d
                    .masses
                    .iter()
                    .map(|(v, p)| json!({ "value": v.to_string(), "mass": p }))
                    .collect();
                writeln!(out, "{}", json!({ "masses": masses, "residual": d.residual })).map_err(io)?;
            } else {
                for (v, p) in &d.masses {
                    writeln!(out, "{v}: {}", format_probability(*p)).map_err(io)?;
                }
                writeln!(out, "residual: {}", format_probability(d.residual)).map_err(io)?;
            }
        }
        "circuit" => {
            let c = session.circuit(src)?;
            let text = match o.emit {
                Emit::Text => format!("{c}\n"),
                Emit::Qasm => emit_qasm(&c).map_err(|e| Failure::Emit(e.to_string()))?,
            };
            if o.json {
                let v = json!({ "circuit": text.trim_end(), "wires": c.wires(), "depth": c.depth() });
                writeln!(out, "{v}").map_err(io)?;
            } else {
                write!(out, "{text}").map_err(io)?;
            }
        }
        _ => unreachable!("subcommands are fixed by clap"),
    }
    Ok(())
}
