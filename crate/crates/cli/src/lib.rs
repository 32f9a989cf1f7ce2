//! Command-line front end: `prove`, `sat`, `convert`, `render`, `serve`.
//!
//! Exit codes:
//!
//! | code | meaning                                                   |
//! |------|-----------------------------------------------------------|
//! | 0    | VALID (or UNSATISFIABLE); other commands: success         |
//! | 1    | COUNTERMODEL (or SATISFIABLE)                             |
//! | 2    | UNKNOWN: budget ran out                                   |
//! | 64   | bad usage or malformed input (formula, problem file, JSON)|
//! | 70   | internal error, including prover/oracle disagreement      |
//! | 74   | I/O error                                                 |

pub mod problem;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use grefute_core::conversion::to_basic;
use grefute_core::json::{graph_to_json, graph_to_string, graph_from_json, Document};
use grefute_core::prover::{check_consequence, Budget, Verdict};
use grefute_core::render::{render_document, render_graph};
use grefute_core::semantics::{entails_bounded, Bounded, FiniteModel, DEFAULT_WORK_BUDGET};
use grefute_core::syntax::{parse_formula_with, Signature};
use grefute_core::{Exec, Expr};
use serde_json::json;
use thiserror::Error;

use problem::{parse_problem, Problem};

pub const EXIT_VALID: u8 = 0;
pub const EXIT_COUNTERMODEL: u8 = 1;
pub const EXIT_UNKNOWN: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_INTERNAL: u8 = 70;
pub const EXIT_IO: u8 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "grefute", version, about = "Refutation prover for first-order logic over nested graph diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the premises of a problem file entail its conclusion.
    Prove(ProveArgs),
    /// Decide whether the premises of a problem file are satisfiable
    /// (any conclusion line is ignored).
    Sat(ProveArgs),
    /// Convert a formula to basic form; prints graph JSON.
    Convert(ConvertArgs),
    /// Render expression, slice or graph JSON as DOT.
    Render(RenderArgs),
    /// Run the HTTP session service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ProveArgs {
    /// Problem file, or `-` for standard input.
    pub file: PathBuf,
    #[arg(long, value_name = "N")]
    pub budget_expansions: Option<u64>,
    #[arg(long, value_name = "SECONDS")]
    pub budget_time: Option<f64>,
    /// Largest slice (in nodes) the prover may build.
    #[arg(long, value_name = "N")]
    pub budget_nodes: Option<usize>,
    /// Write the derivation trace as JSON.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    /// Write the basic form of the problem as DOT.
    #[arg(long, value_name = "PATH")]
    pub render: Option<PathBuf>,
    /// Cross-check against exhaustive search of models up to N elements.
    #[arg(long, value_name = "N")]
    pub model_bound: Option<usize>,
    /// Print the verdict as JSON.
    #[arg(long)]
    pub json: bool,
    /// Run the prover without worker threads.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Formula text.
    pub formula: String,
    /// Arity declarations such as `p/1, r/2`.
    #[arg(long)]
    pub signature: Option<String>,
    /// Write the conversion trace as JSON.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// JSON file, or `-` for standard input.
    pub file: PathBuf,
    /// Output path; standard output by default.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Listen address; defaults to GREFUTE_ADDR or 127.0.0.1:8080.
    #[arg(long)]
    pub addr: Option<String>,
    /// Session journal directory; defaults to GREFUTE_JOURNAL_DIR.
    #[arg(long, value_name = "DIR")]
    pub journal_dir: Option<PathBuf>,
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    let io = |source| CliError::Io { path: path.display().to_string(), source };
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn budget(args: &ProveArgs) -> Result<Budget, CliError> {
    let mut b = Budget::default();
    if let Some(n) = args.budget_expansions {
        b.max_expansions = n;
    }
    if let Some(n) = args.budget_nodes {
        b.max_slice_nodes = n;
    }
    if let Some(t) = args.budget_time {
        b.max_wall_time = Duration::try_from_secs_f64(t).map_err(|e| CliError::Input(format!("--budget-time {t}: {e}")))?;
    }
    Ok(b)
}

/// `p = {(u,v), (v,v)}` lines, one per symbol.
pub fn format_model(m: &FiniteModel) -> Vec<String> {
    let mut out = vec![format!("universe = {{{}}}", m.universe().join(", "))];
    for p in m.symbols() {
        let tuples = m.labelled_tuples(p);
        let shown: Vec<String> = match p.arity() {
            0 => {
                out.push(format!("{} = {}", p.name(), !tuples.is_empty()));
                continue;
            }
            1 => tuples.iter().map(|t| t[0].clone()).collect(),
            _ => tuples.iter().map(|t| format!("({})", t.join(","))).collect(),
        };
        out.push(format!("{} = {{{}}}", p.name(), shown.join(", ")));
    }
    out
}

/// What a prove or sat run found.
pub struct Report {
    pub exit: u8,
    pub lines: Vec<String>,
    pub json: serde_json::Value,
}

fn labels(sat: bool) -> [&'static str; 3] {
    if sat {
        ["UNSATISFIABLE", "SATISFIABLE", "UNKNOWN"]
    } else {
        ["VALID", "COUNTERMODEL", "UNKNOWN"]
    }
}

pub fn run_prove(args: &ProveArgs, sat: bool) -> Result<Report, CliError> {
    let source = read_input(&args.file)?;
    let Problem { premises, mut conclusion } = parse_problem(&source).map_err(|e| CliError::Input(format!("{}: {e}", args.file.display())))?;
    if sat {
        conclusion = grefute_core::Formula::Falsum;
    }
    let budget = budget(args)?;
    let exec = if args.sequential { Exec::Sequential } else { Exec::default() };
    let verdict = check_consequence(&premises, &conclusion, &budget, exec).map_err(|e| CliError::Internal(e.to_string()))?;

    if let Some(path) = &args.trace {
        write_file(path, &verdict.trace().to_json_string())?;
    }
    if let Some(path) = &args.render {
        let start = graph_from_json(&verdict.trace().start).map_err(|e| CliError::Internal(e.to_string()))?;
        write_file(path, &render_graph(&start))?;
    }

    let [yes, no, unknown] = labels(sat);
    let mut j = verdict.to_json();
    j.as_object_mut().expect("object").remove("trace");
    let (mut exit, mut lines) = match &verdict {
        Verdict::Null { .. } => (EXIT_VALID, vec![yes.to_string()]),
        Verdict::NotNull { model, assignment, .. } => {
            let mut lines = vec![no.to_string()];
            lines.extend(format_model(model).into_iter().map(|l| format!("  {l}")));
            let moved: Vec<String> = assignment.iter().filter(|(n, e)| n.as_str() != e.as_str()).map(|(n, e)| format!("{n} -> {e}")).collect();
            if !moved.is_empty() {
                lines.push(format!("  names: {}", moved.join(", ")));
            }
            (EXIT_COUNTERMODEL, lines)
        }
        Verdict::Unknown { report, .. } => (
            EXIT_UNKNOWN,
            vec![
                unknown.to_string(),
                format!("  {} after {} expansions, {} ms; {} open, {} set aside", report.reason, report.expansions, report.elapsed_ms, report.frontier, report.stuck),
            ],
        ),
    };

    if let Some(bound) = args.model_bound {
        match entails_bounded(&premises, &conclusion, bound, DEFAULT_WORK_BUDGET, exec) {
            Ok(Bounded::HoldsUpTo(n)) => {
                lines.push(format!("  oracle: no countermodel with at most {n} elements"));
                j["oracle"] = json!({"bound": n, "countermodel": null});
            }
            Ok(Bounded::Countermodel { model, .. }) => {
                j["oracle"] = json!({"bound": bound, "countermodel": model});
                if verdict.is_null() {
                    lines.push("  oracle DISAGREES: bounded search found a countermodel".into());
                    lines.extend(format_model(&model).into_iter().map(|l| format!("    {l}")));
                    exit = EXIT_INTERNAL;
                } else if exit == EXIT_UNKNOWN {
                    lines = vec![no.to_string()];
                    lines.extend(format_model(&model).into_iter().map(|l| format!("  {l}")));
                    lines.push(format!("  found by bounded search after the prover gave up ({bound} elements)"));
                    exit = EXIT_COUNTERMODEL;
                } else {
                    lines.push(format!("  oracle: countermodel with at most {bound} elements confirmed"));
                }
            }
            Err(e) => {
                lines.push(format!("  oracle skipped: {e}"));
                j["oracle"] = json!({"bound": bound, "skipped": e.to_string()});
            }
        }
    }
    j["result"] = json!(lines[0]);
    Ok(Report { exit, lines, json: j })
}

pub fn run_convert(args: &ConvertArgs) -> Result<String, CliError> {
    let mut sig = match &args.signature {
        Some(s) => Signature::parse(s).map_err(|e| CliError::Input(e.to_string()))?,
        None => Signature::new(),
    };
    let f = parse_formula_with(&args.formula, &mut sig).map_err(|e| CliError::Input(format!("formula: {e}")))?;
    let c = to_basic(&Expr::formula(f)).map_err(|e| CliError::Internal(e.to_string()))?;
    if let Some(path) = &args.trace {
        let trace = json!({"initial": graph_to_json(&c.initial), "steps": c.steps});
        write_file(path, &trace.to_string())?;
    }
    Ok(graph_to_string(&c.graph))
}

pub fn render_json(text: &str) -> Result<String, CliError> {
    let doc = Document::parse(text).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(render_document(&doc))
}

pub fn run_render(args: &RenderArgs) -> Result<Option<String>, CliError> {
    let dot = render_json(&read_input(&args.file)?)?;
    match &args.output {
        Some(path) => write_file(path, &dot).map(|_| None),
        None => Ok(Some(dot)),
    }
}

pub fn run_serve(args: &ServeArgs) -> Result<(), CliError> {
    let mut config = grefute_service::Config::from_env().map_err(CliError::Input)?;
    if let Some(a) = &args.addr {
        config.addr = a.parse().map_err(|e| CliError::Input(format!("--addr {a}: {e}")))?;
    }
    if let Some(d) = &args.journal_dir {
        config.journal_dir = Some(d.clone());
    }
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
    rt.block_on(grefute_service::serve(config)).map_err(|source| CliError::Io { path: "serve".into(), source })
}

/// Runs a parsed command line, writing results to `out`; returns the exit
/// code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    let io = |source| CliError::Io { path: "stdout".into(), source };
    match cli.command {
        Command::Prove(ref a) | Command::Sat(ref a) => {
            let r = run_prove(a, matches!(cli.command, Command::Sat(_)))?;
            if a.json {
                writeln!(out, "{}", r.json).map_err(io)?;
            } else {
                for l in &r.lines {
                    writeln!(out, "{l}").map_err(io)?;
                }
            }
            Ok(r.exit)
        }
        Command::Convert(a) => {
            writeln!(out, "{}", run_convert(&a)?).map_err(io)?;
            Ok(0)
        }
        Command::Render(a) => {
            if let Some(dot) = run_render(&a)? {
                write!(out, "{dot}").map_err(io)?;
            }
            Ok(0)
        }
        Command::Serve(a) => run_serve(&a).map(|_| 0),
    }
}
