//! The `grboot` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 negative result (no
//! percolation, disconnected graph, edge outside the closure), 3 resource
//! cap hit. Reports go to `--out` or standard output; diagnostics go to
//! standard error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::density::{self, DensityError, DensityOptions, Method};
use crate::engine::{self, Outcome, ScanMode};
use crate::ft::{self, FtError};
use crate::graph::{io, Distance, Edge, Graph};
use crate::montecarlo::{self, McError, TrialConfig};
use crate::witness::{self, OrderPolicy, WitnessError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "grboot",
    version,
    about = "K_r graph bootstrap percolation toolkit"
)]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "GRBOOT_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the process on a graph and print the round-by-round trace.
    Run(RunArgs),
    /// Build the anchored graph F_t.
    Ft(FtArgs),
    /// Exact minimum subset density and epsilon_t of F_t.
    Epsilon(EpsilonArgs),
    /// Witness subgraphs for the closure of a graph.
    Witness(WitnessArgs),
    /// Estimate P(T <= t) on G(n, p).
    Mc(McArgs),
    /// Coupled estimates over a grid of p values, as CSV.
    Sweep(SweepArgs),
    /// Percolation time of the K_3 process from the diameter.
    K3(K3Args),
    /// Bracket the p at which P(T <= t) crosses a level.
    Bisect(BisectArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file (standard output if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub r: usize,
    /// Stop after this many rounds.
    #[arg(long)]
    pub max_rounds: Option<u32>,
    /// Test every non-edge every round instead of only the frontier.
    #[arg(long)]
    pub naive: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Json,
    Dot,
}

#[derive(Debug, Args)]
pub struct FtArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub t: u32,
    #[arg(long, value_enum, default_value = "json")]
    pub format: GraphFormat,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Enumerate,
    Bnb,
}

#[derive(Debug, Args)]
pub struct EpsilonArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub t: u32,
    /// Largest number of non-anchor vertices to search over.
    #[arg(long, default_value_t = 30)]
    pub cap_bits: u32,
    #[arg(long, value_enum, default_value = "enumerate")]
    pub method: MethodArg,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Lex,
    Random,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub r: usize,
    #[arg(long, value_enum, default_value = "lex")]
    pub policy: PolicyArg,
    /// Seed for the random policy.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Only report this edge, given as `u,v`.
    #[arg(long, value_parser = parse_edge)]
    pub edge: Option<Edge>,
    /// Reduce each reported witness to an inclusion-minimal one (n <= 14).
    #[arg(long)]
    pub shrink: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub t: u32,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = montecarlo::DEFAULT_REPS)]
    pub reps: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Estimate P({0,1} in G_t) instead of P(T <= t).
    #[arg(long)]
    pub probe: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub t: u32,
    /// `a:b:steps` or `a:b:steps:log`.
    #[arg(long)]
    pub p_grid: String,
    #[arg(long, default_value_t = montecarlo::DEFAULT_REPS)]
    pub reps: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct K3Args {
    #[arg(long)]
    pub graph: PathBuf,
    /// Also run the generic engine at r = 3 and compare.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BisectArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub t: u32,
    #[arg(long, default_value_t = 0.5)]
    pub level: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = montecarlo::DEFAULT_REPS)]
    pub reps: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

fn parse_edge(s: &str) -> Result<Edge, String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected u,v, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Edge::try_new(a, b).map_err(|e| e.to_string())
}

/// A failed command: message and exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<FtError> for Failure {
    fn from(e: FtError) -> Self {
        let code = match e {
            FtError::TooManyVertices { .. }
            | FtError::AdjacencyTooLarge { .. }
            | FtError::Overflow { .. } => EXIT_CAP,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<DensityError> for Failure {
    fn from(e: DensityError) -> Self {
        match e {
            DensityError::Ft(inner) => inner.into(),
            DensityError::CapExceeded { .. } => Self {
                code: EXIT_CAP,
                message: e.to_string(),
            },
            _ => Self::usage(e),
        }
    }
}

impl From<engine::EngineError> for Failure {
    fn from(e: engine::EngineError) -> Self {
        Self::usage(e)
    }
}

impl From<McError> for Failure {
    fn from(e: McError) -> Self {
        match e {
            McError::Bracket { .. } => Self {
                code: EXIT_NEGATIVE,
                message: e.to_string(),
            },
            _ => Self::usage(e),
        }
    }
}

impl From<WitnessError> for Failure {
    fn from(e: WitnessError) -> Self {
        match e {
            WitnessError::NotInClosure(_) => Self {
                code: EXIT_NEGATIVE,
                message: e.to_string(),
            },
            WitnessError::TooLarge(_) => Self {
                code: EXIT_CAP,
                message: e.to_string(),
            },
            WitnessError::Engine(inner) => inner.into(),
        }
    }
}

/// Command output with its exit code and an optional note for stderr.
struct Report {
    text: String,
    code: i32,
    note: Option<String>,
}

impl Report {
    fn ok(text: String) -> Self {
        Self {
            text,
            code: EXIT_OK,
            note: None,
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    s.push('\n');
    s
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    io::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_output(output: &Output, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::usage(format!("stdout: {e}")))
        }
    }
}

fn cmd_run(a: &RunArgs) -> Result<Report, Failure> {
    let g = read_graph(&a.graph)?;
    let mode = if a.naive {
        ScanMode::Naive
    } else {
        ScanMode::Frontier
    };
    let trace = engine::run_with(&g, a.r, a.max_rounds, mode)?;
    let (code, note) = match trace.outcome {
        Outcome::Percolated { .. } => (EXIT_OK, None),
        Outcome::NotPercolated => (EXIT_NEGATIVE, Some("graph does not percolate".to_string())),
        Outcome::CapReached => (
            EXIT_CAP,
            Some("round cap reached before a fixed point".to_string()),
        ),
    };
    Ok(Report {
        text: pretty(&trace.to_json()),
        code,
        note,
    })
}

fn cmd_ft(a: &FtArgs) -> Result<Report, Failure> {
    let f = ft::build_ft(a.r, a.t)?;
    let text = match a.format {
        GraphFormat::Json => {
            let mut s =
                serde_json::to_string(&f.to_json()).expect("graph serialization cannot fail");
            s.push('\n');
            s
        }
        GraphFormat::Dot => f.to_dot(),
    };
    Ok(Report::ok(text))
}

fn cmd_epsilon(a: &EpsilonArgs) -> Result<Report, Failure> {
    let f = ft::build_ft(a.r, a.t)?;
    let opts = DensityOptions {
        cap_bits: a.cap_bits,
        method: match a.method {
            MethodArg::Enumerate => Method::Enumerate,
            MethodArg::Bnb => Method::BranchAndBound,
        },
    };
    let report = density::min_density(&f, opts)?;
    Ok(Report::ok(pretty(&report.to_json())))
}

#[derive(Serialize)]
struct WitnessEntry {
    #[serde(flatten)]
    witness: witness::WitnessSet,
    edge_count: usize,
    vertex_count: usize,
    bound_holds: bool,
}

fn cmd_witness(a: &WitnessArgs) -> Result<Report, Failure> {
    let g = read_graph(&a.graph)?;
    let policy = match a.policy {
        PolicyArg::Lex => OrderPolicy::Lex,
        PolicyArg::Random => OrderPolicy::SeededRandom(a.seed),
    };
    let map = witness::run_with_witnesses(&g, a.r, policy)?;
    let selected: Vec<witness::WitnessSet> = match a.edge {
        Some(e) => {
            if e.v() >= g.n() {
                return Err(Failure::usage(format!(
                    "edge {e} is outside a graph on {} vertices",
                    g.n()
                )));
            }
            vec![map.get(e).ok_or(WitnessError::NotInClosure(e))?]
        }
        None => map.iter().collect(),
    };
    let mut entries = Vec::with_capacity(selected.len());
    for w in selected {
        let w = if a.shrink {
            witness::shrink(&w, a.r)?
        } else {
            w
        };
        entries.push(WitnessEntry {
            edge_count: w.edges.len(),
            vertex_count: w.vertices.len(),
            bound_holds: witness::check_witness_bound(&w, a.r),
            witness: w,
        });
    }
    let text = if a.edge.is_some() {
        pretty(&entries[0])
    } else {
        pretty(&entries)
    };
    Ok(Report::ok(text))
}

#[derive(Serialize)]
struct McReport {
    n: usize,
    r: usize,
    t: u32,
    p: f64,
    seed: u64,
    event: &'static str,
    #[serde(flatten)]
    estimate: montecarlo::EstimateResult,
}

fn cmd_mc(a: &McArgs) -> Result<Report, Failure> {
    let cfg = TrialConfig {
        n: a.n,
        r: a.r,
        t: a.t,
        p: a.p,
        reps: a.reps,
        seed: a.seed,
    };
    let (estimate, event) = if a.probe {
        (montecarlo::estimate_probe(&cfg)?, "probe")
    } else {
        (montecarlo::estimate(&cfg)?, "percolation")
    };
    Ok(Report::ok(pretty(&McReport {
        n: a.n,
        r: a.r,
        t: a.t,
        p: a.p,
        seed: a.seed,
        event,
        estimate,
    })))
}

fn cmd_sweep(a: &SweepArgs) -> Result<Report, Failure> {
    let grid = montecarlo::parse_grid(&a.p_grid)?;
    let rows = montecarlo::sweep(a.n, a.r, a.t, &grid, a.reps, a.seed)?;
    Ok(Report::ok(montecarlo::sweep_csv(&rows, a.seed)))
}

#[derive(Serialize)]
struct K3Report {
    n: usize,
    connected: bool,
    diameter: Option<usize>,
    predicted_t: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verified_t: Option<Option<u32>>,
}

fn cmd_k3(a: &K3Args) -> Result<Report, Failure> {
    let g = read_graph(&a.graph)?;
    let diameter = match g.diameter() {
        Distance::Finite(d) => Some(d),
        Distance::Infinite => None,
    };
    let predicted = engine::percolation_time_k3(&g);
    let verified = if a.verify {
        Some(engine::run(&g, 3, None)?.percolation_time())
    } else {
        None
    };
    let report = K3Report {
        n: g.n(),
        connected: diameter.is_some(),
        diameter,
        predicted_t: predicted,
        verified_t: verified,
    };
    let mut code = EXIT_OK;
    let mut note = None;
    if diameter.is_none() {
        code = EXIT_NEGATIVE;
        note = Some("graph is disconnected and does not percolate".to_string());
    } else if verified.is_some_and(|v| v != predicted) {
        code = EXIT_NEGATIVE;
        note = Some("engine disagrees with the diameter rule".to_string());
    }
    Ok(Report {
        text: pretty(&report),
        code,
        note,
    })
}

#[derive(Serialize)]
struct BisectReport {
    n: usize,
    r: usize,
    t: u32,
    reps: u32,
    seed: u64,
    tol: f64,
    #[serde(flatten)]
    result: montecarlo::BisectResult,
}

fn cmd_bisect(a: &BisectArgs) -> Result<Report, Failure> {
    let result = montecarlo::pc_bisect(a.n, a.r, a.t, a.level, a.tol, a.reps, a.seed)?;
    Ok(Report::ok(pretty(&BisectReport {
        n: a.n,
        r: a.r,
        t: a.t,
        reps: a.reps,
        seed: a.seed,
        tol: a.tol,
        result,
    })))
}

fn output_of(command: &Command) -> &Output {
    match command {
        Command::Run(a) => &a.output,
        Command::Ft(a) => &a.output,
        Command::Epsilon(a) => &a.output,
        Command::Witness(a) => &a.output,
        Command::Mc(a) => &a.output,
        Command::Sweep(a) => &a.output,
        Command::K3(a) => &a.output,
        Command::Bisect(a) => &a.output,
    }
}

fn execute(command: &Command) -> Result<Report, Failure> {
    match command {
        Command::Run(a) => cmd_run(a),
        Command::Ft(a) => cmd_ft(a),
        Command::Epsilon(a) => cmd_epsilon(a),
        Command::Witness(a) => cmd_witness(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::K3(a) => cmd_k3(a),
        Command::Bisect(a) => cmd_bisect(a),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return EXIT_USAGE;
    }
    let result = match crate::with_threads(cli.threads, || execute(&cli.command)) {
        Ok(result) => result,
        Err(e) => Err(Failure::usage(format!("thread pool: {e}"))),
    };
    let outcome = result.and_then(|report| {
        write_output(output_of(&cli.command), &report.text)?;
        Ok(report)
    });
    match outcome {
        Ok(report) => {
            if let Some(note) = report.note {
                eprintln!("grboot: {note}");
            }
            report.code
        }
        Err(failure) => {
            eprintln!("grboot: error: {}", failure.message);
            failure.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_argument() {
        assert_eq!(parse_edge("3, 1"), Ok(Edge::new(1, 3)));
        assert!(parse_edge("2,2").is_err());
        assert!(parse_edge("2").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(dispatch(["grboot", "ft", "--r", "4"]), EXIT_USAGE);
        assert_eq!(
            dispatch(["grboot", "ft", "--r", "4", "--t", "1", "--bogus"]),
            EXIT_USAGE
        );
        assert_eq!(dispatch(["grboot", "frobnicate"]), EXIT_USAGE);
        assert_eq!(dispatch(["grboot", "--help"]), EXIT_OK);
    }

    #[test]
    fn parser_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
