//! The `gradedmu` command line.
//!
//! Exit codes: 0 success, 1 engines disagree, 2 formula or usage error,
//! 3 graph or model file error, 4 safeguard tripped, 5 internal error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::counting::{CountingError, CountingMachine};
use crate::formula::{parse, Formula};
use crate::gen::{self, FormulaParams, GraphParams};
use crate::gnn::{self, GnnError, RecurrentGnn, RunOptions};
use crate::graph::{LabeledGraph, Labeling, NodeSet, Valuation};
use crate::semantics::{evaluate, model_check_stable};

#[derive(Parser, Debug)]
#[command(name = "gradedmu", version, about = "Graded modal mu-calculus checker and GNN compiler")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Direct fixpoint evaluation.
    Oracle,
    /// Uniform approximation at the first stable bound.
    Stable,
    /// The counting algorithm.
    Counting,
    /// The counting algorithm with residual countdown.
    Extended,
    /// The compiled recurrent GNN.
    Gnn,
}

impl Engine {
    pub const ALL: [Engine; 5] = [Engine::Oracle, Engine::Stable, Engine::Counting, Engine::Extended, Engine::Gnn];

    fn name(self) -> &'static str {
        match self {
            Engine::Oracle => "oracle",
            Engine::Stable => "stable",
            Engine::Counting => "counting",
            Engine::Extended => "extended",
            Engine::Gnn => "gnn",
        }
    }
}

#[derive(Args, Debug)]
struct Limits {
    /// Step (or GNN iteration) limit replacing the default safeguard.
    #[arg(long)]
    max_steps: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate a sentence on a graph and print the node labeling.
    Check {
        formula: String,
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Engine::Oracle)]
        engine: Engine,
        #[command(flatten)]
        limits: Limits,
        /// Print the full run report instead of the labeling.
        #[arg(long)]
        json: bool,
    },
    /// Compile a sentence into a GNN model file.
    Compile {
        formula: String,
        /// Output path; stdout if omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a saved GNN model on a graph.
    Run {
        model: PathBuf,
        graph: PathBuf,
        #[command(flatten)]
        limits: Limits,
        #[arg(long)]
        json: bool,
    },
    /// Run every engine and report whether they agree. Without a formula and
    /// graph, compares on random instances instead.
    Compare {
        formula: Option<String>,
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        limits: Limits,
        #[arg(long)]
        json: bool,
    },
    /// Stream a run as JSON lines, one per transition, step or iteration.
    Trace {
        formula: String,
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Engine::Extended)]
        engine: Engine,
        #[command(flatten)]
        limits: Limits,
    },
    /// Print random sentences, one per line.
    GenFormula {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        max_fixpoints: usize,
        #[arg(long, default_value_t = 3)]
        max_nesting: usize,
        #[arg(long, default_value_t = 3)]
        max_grade: u32,
        #[arg(long, default_value_t = 25)]
        max_size: usize,
        #[arg(long, value_delimiter = ',', default_value = "p,q,r")]
        props: Vec<String>,
        /// Print a JSON array instead of lines.
        #[arg(long)]
        json: bool,
    },
    /// Print a random graph as JSON.
    GenGraph {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exact node count; otherwise uniform in 1..=max-nodes.
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long, default_value_t = 10)]
        max_nodes: usize,
        #[arg(long, default_value_t = 0.3)]
        edge_prob: f64,
        #[arg(long, value_delimiter = ',', default_value = "p,q,r")]
        props: Vec<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

/// A failed command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

fn formula_error(e: impl std::fmt::Display) -> Failure {
    Failure::new(2, format!("formula error: {e}"))
}

fn graph_error(e: impl std::fmt::Display) -> Failure {
    Failure::new(3, format!("graph error: {e}"))
}

fn io_error(e: std::io::Error) -> Failure {
    Failure::new(3, format!("i/o error: {e}"))
}

fn counting_error(e: CountingError) -> Failure {
    match e {
        CountingError::Safeguard(_) => Failure::new(4, e.to_string()),
        CountingError::NotSentence(_) => formula_error(e),
    }
}

fn gnn_error(e: GnnError) -> Failure {
    match e {
        GnnError::Safeguard(_) => Failure::new(4, e.to_string()),
        GnnError::NotSentence(_) => formula_error(e),
        GnnError::Io(_) | GnnError::Json(_) | GnnError::Model(_) => Failure::new(3, format!("model error: {e}")),
        GnnError::Rfnn(_) => Failure::new(5, e.to_string()),
    }
}

fn parse_sentence(text: &str) -> Result<Formula, Failure> {
    let phi = parse(text).map_err(formula_error)?;
    if !phi.is_sentence() {
        let free: Vec<String> = phi.free_vars().into_iter().collect();
        return Err(formula_error(format!("free variables {free:?}")));
    }
    Ok(phi)
}

fn load_graph(path: &Path) -> Result<LabeledGraph, Failure> {
    LabeledGraph::load(path).map_err(graph_error)
}

/// Outcome of one engine on one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub output: NodeSet,
    pub k_used: Option<usize>,
    pub iterations: Option<u64>,
}

fn run_engine(engine: Engine, phi: &Formula, g: &LabeledGraph, max_steps: Option<u64>) -> Result<Outcome, Failure> {
    Ok(match engine {
        Engine::Oracle => {
            let output = evaluate(phi, g, &Valuation::new()).map_err(formula_error)?;
            Outcome { output, k_used: None, iterations: None }
        }
        Engine::Stable => {
            let (output, k) = model_check_stable(phi, g).map_err(formula_error)?;
            Outcome { output, k_used: Some(k), iterations: None }
        }
        Engine::Counting | Engine::Extended => {
            let m = CountingMachine::new(phi, g).map_err(counting_error)?;
            let (config, steps) = if engine == Engine::Counting {
                m.run_counting(max_steps).map_err(counting_error)?
            } else {
                let (x, steps) = m.run_extended(max_steps).map_err(counting_error)?;
                (x.config, steps)
            };
            Outcome { output: m.answer(&config), k_used: Some(config.k), iterations: Some(steps) }
        }
        Engine::Gnn => run_model(&gnn::compile(phi).map_err(gnn_error)?, g, max_steps)?,
    })
}

fn run_model(net: &RecurrentGnn, g: &LabeledGraph, max_steps: Option<u64>) -> Result<Outcome, Failure> {
    let opts = RunOptions { max_iterations: max_steps, keep_trace: false };
    let run = net.run_with(g, &opts).map_err(gnn_error)?;
    let k_used = run.state.first().map(|row| row[net.layout().k()] as usize);
    Ok(Outcome { output: run.output, k_used, iterations: Some(run.iterations) })
}

/// The report printed by `check --json` and `run --json`.
#[derive(Serialize)]
struct RunReport<'a> {
    formula: &'a str,
    graph: String,
    engine: &'a str,
    output: Labeling,
    k_used: Option<usize>,
    iterations: Option<u64>,
    wall_time_ms: f64,
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string(value).expect("serializable");
    writeln!(out, "{text}").map_err(io_error)
}

/// What a report describes, besides the outcome itself.
struct Request<'a> {
    formula: &'a str,
    graph: &'a Path,
    engine: &'static str,
    json: bool,
    started: Instant,
}

fn report(out: &mut dyn Write, req: &Request, g: &LabeledGraph, outcome: &Outcome) -> Result<(), Failure> {
    let output = g.labeling(&outcome.output);
    if !req.json {
        return emit(out, &output);
    }
    emit(
        out,
        &RunReport {
            formula: req.formula,
            graph: req.graph.display().to_string(),
            engine: req.engine,
            output,
            k_used: outcome.k_used,
            iterations: outcome.iterations,
            wall_time_ms: req.started.elapsed().as_secs_f64() * 1e3,
        },
    )
}

/// First engine disagreeing with the oracle, with the first differing node.
fn disagreement(phi: &Formula, g: &LabeledGraph, max_steps: Option<u64>) -> Result<Option<(Engine, usize)>, Failure> {
    let reference = run_engine(Engine::Oracle, phi, g, max_steps)?.output;
    for engine in &Engine::ALL[1..] {
        let got = run_engine(*engine, phi, g, max_steps)?.output;
        if let Some(n) = got.agreement(&reference).complement().iter().next() {
            return Ok(Some((*engine, n)));
        }
    }
    Ok(None)
}

#[derive(Serialize)]
struct Verdict {
    verdict: &'static str,
    trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    formula: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    engine: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    node: Option<String>,
}

fn compare(
    out: &mut dyn Write,
    instances: impl Iterator<Item = Result<(Formula, LabeledGraph), Failure>>,
    max_steps: Option<u64>,
    json: bool,
) -> Result<i32, Failure> {
    let mut trials = 0;
    for inst in instances {
        let (phi, g) = inst?;
        trials += 1;
        if let Some((engine, n)) = disagreement(&phi, &g, max_steps)? {
            let v = Verdict {
                verdict: "disagree",
                trials,
                formula: Some(phi.to_string()),
                engine: Some(engine.name()),
                node: Some(g.id(n).to_owned()),
            };
            if json {
                emit(out, &v)?;
            } else {
                writeln!(out, "disagree: {} differs from oracle at node {} on {phi}", engine.name(), g.id(n))
                    .map_err(io_error)?;
                if trials > 1 {
                    writeln!(out, "{}", g.to_json()).map_err(io_error)?;
                }
            }
            return Ok(1);
        }
    }
    if json {
        emit(out, &Verdict { verdict: "agree", trials, formula: None, engine: None, node: None })?;
    } else {
        writeln!(out, "agree ({trials} instance{})", if trials == 1 { "" } else { "s" }).map_err(io_error)?;
    }
    Ok(0)
}

fn trace(
    out: &mut dyn Write,
    phi: &Formula,
    g: &LabeledGraph,
    engine: Engine,
    max_steps: Option<u64>,
) -> Result<(), Failure> {
    let mut lines = Vec::new();
    match engine {
        Engine::Counting => {
            let m = CountingMachine::new(phi, g).map_err(counting_error)?;
            let mut step = 0;
            m.run_counting_observed(max_steps, |t, c| {
                use crate::counting::Transition::*;
                let kind = match t {
                    Initial => "init",
                    Type3 => "type3",
                    Type1 => "type1",
                    Type2 => "type2",
                };
                if t == Type3 {
                    step += 1;
                }
                lines.push(m.trace_line(step, kind, c, &[]));
            })
            .map_err(counting_error)?;
        }
        Engine::Extended => {
            let m = CountingMachine::new(phi, g).map_err(counting_error)?;
            m.run_extended_observed(max_steps, |step, kind, x| {
                lines.push(m.trace_line_extended(step, kind.as_str(), x))
            })
            .map_err(counting_error)?;
        }
        Engine::Gnn => {
            let net = gnn::compile(phi).map_err(gnn_error)?;
            let m = CountingMachine::new(phi, g).map_err(counting_error)?;
            let opts = RunOptions { max_iterations: max_steps, keep_trace: true };
            let run = net.run_with(g, &opts).map_err(gnn_error)?;
            for (i, h) in run.trace.iter().enumerate() {
                let x = net.layout().decode(h).map_err(|e| Failure::new(5, format!("undecodable GNN state: {e}")))?;
                let kind = if i == 0 { "init" } else { "layer" };
                lines.push(m.trace_line_extended(i as u64, kind, &x));
            }
        }
        Engine::Oracle | Engine::Stable => {
            return Err(Failure::new(2, format!("engine {} has no step trace", engine.name())));
        }
    }
    lines.iter().try_for_each(|l| emit(out, l))
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    match cli.cmd {
        Cmd::Check { formula, graph, engine, limits, json } => {
            let started = Instant::now();
            let phi = parse_sentence(&formula)?;
            let g = load_graph(&graph)?;
            let outcome = run_engine(engine, &phi, &g, limits.max_steps)?;
            let req = Request { formula: &formula, graph: &graph, engine: engine.name(), json, started };
            report(out, &req, &g, &outcome)?;
        }
        Cmd::Compile { formula, out: path } => {
            let net = gnn::compile(&parse_sentence(&formula)?).map_err(gnn_error)?;
            match path {
                Some(p) => net.save(p).map_err(gnn_error)?,
                None => writeln!(out, "{}", net.to_json()).map_err(io_error)?,
            }
        }
        Cmd::Run { model, graph, limits, json } => {
            let started = Instant::now();
            let net = RecurrentGnn::load(&model).map_err(gnn_error)?;
            let g = load_graph(&graph)?;
            let outcome = run_model(&net, &g, limits.max_steps)?;
            let req = Request { formula: &net.layout().formula, graph: &graph, engine: "gnn", json, started };
            report(out, &req, &g, &outcome)?;
        }
        Cmd::Compare { formula, graph, trials, seed, limits, json } => {
            return match (formula, graph) {
                (Some(f), Some(p)) => {
                    let inst = parse_sentence(&f).and_then(|phi| Ok((phi, load_graph(&p)?)));
                    compare(out, std::iter::once(inst), limits.max_steps, json)
                }
                (None, None) => {
                    let mut rng = gen::rng(seed);
                    let (fp, gp) = (FormulaParams::default(), GraphParams::default());
                    let instances = (0..trials).map(move |_| {
                        let phi = gen::random_formula(&mut rng, &fp);
                        Ok((phi, gen::random_graph(&mut rng, &gp)))
                    });
                    compare(out, instances, limits.max_steps, json)
                }
                _ => Err(Failure::new(2, "compare needs both a formula and a graph, or neither")),
            };
        }
        Cmd::Trace { formula, graph, engine, limits } => {
            let phi = parse_sentence(&formula)?;
            let g = load_graph(&graph)?;
            trace(out, &phi, &g, engine, limits.max_steps)?;
        }
        Cmd::GenFormula { seed, count, max_fixpoints, max_nesting, max_grade, max_size, props, json } => {
            if props.is_empty() || max_grade == 0 || max_size == 0 {
                return Err(Failure::new(2, "need at least one proposition, grade and size"));
            }
            let params = FormulaParams { max_fixpoints, max_nesting, max_grade, max_size, props };
            let mut rng = gen::rng(seed);
            let formulas: Vec<String> =
                (0..count).map(|_| gen::random_formula(&mut rng, &params).to_string()).collect();
            if json {
                emit(out, &formulas)?;
            } else {
                formulas.iter().try_for_each(|f| writeln!(out, "{f}")).map_err(io_error)?;
            }
        }
        Cmd::GenGraph { seed, nodes, max_nodes, edge_prob, props, out: path } => {
            if !(0.0..=1.0).contains(&edge_prob) {
                return Err(Failure::new(2, "edge probability must lie in [0, 1]"));
            }
            let mut rng = gen::rng(seed);
            let g = match nodes {
                Some(n) => gen::random_graph_with(&mut rng, n, edge_prob, &props),
                None => {
                    let params = GraphParams { min_nodes: 1, max_nodes: max_nodes.max(1), edge_prob, props };
                    gen::random_graph(&mut rng, &params)
                }
            };
            match path {
                Some(p) => g.save(p).map_err(graph_error)?,
                None => writeln!(out, "{}", g.to_json()).map_err(io_error)?,
            }
        }
    }
    Ok(0)
}

/// Run the command line with explicit arguments and output streams;
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return e.exit_code();
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
