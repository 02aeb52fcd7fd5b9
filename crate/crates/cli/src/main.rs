//! `trace-lab` command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure,
//! 3 acceptance threshold failed in `experiment --check`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use trace_lab::bounds::{bounds_report, cover_time_spectral_bound, fill_hitting_tetali, HarmonicConvention};
use trace_lab::generators::GenSpec;
use trace_lab::hamilton::{
    certify_expander, hamiltonian_exact, hamiltonian_posa, tau_times, CertMode, PosaOptions, TauOptions,
};
use trace_lab::harness::{emit_plot_data, run_experiment, ExperimentConfig, PlotKind};
use trace_lab::spectral::{eigen_extremes, resistance_matrix, EigenMethod, EigenOptions};
use trace_lab::walk::{blanket_time, cover_time_empirical, min_visit_ratio, simulate_walk, CoverOptions};
use trace_lab::{Graph, LabError};

#[derive(Parser)]
#[command(name = "trace-lab", version, about = "Random walks, traces and Hamiltonicity on regular graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and print it as an edge list.
    Gen(GenArgs),
    /// Extreme adjacency eigenvalues as JSON; optional matrix export.
    Spectral(SpectralArgs),
    /// Analytic cover, hitting and mixing bounds.
    Bounds(BoundsArgs),
    /// Simulate walks and report cover, blanket and visit statistics.
    Walk(WalkArgs),
    /// Empirical cover time.
    Cover(CoverArgs),
    /// Expander certification, Hamilton cycles and trace hitting times.
    Hamilton(HamiltonArgs),
    /// Run a configured experiment.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    RandomRegular,
    Complete,
    Cycle,
    Path,
    Petersen,
    Counterexample,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    family: Family,
    #[arg(long, short)]
    n: Option<usize>,
    #[arg(long, short)]
    d: Option<usize>,
    /// Expansion constant for the counterexample family.
    #[arg(long, short)]
    c: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write to a file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Graph source: an edge-list file, or generator flags.
#[derive(Args)]
struct GraphArgs {
    /// Edge-list file (`-` for stdin).
    #[arg(long, short = 'g', conflicts_with = "family")]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long, short)]
    n: Option<usize>,
    #[arg(long, short)]
    d: Option<usize>,
    #[arg(long = "gen-c")]
    gen_c: Option<usize>,
    #[arg(long, default_value_t = 0)]
    graph_seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixKind {
    Adjacency,
    Resistance,
    Hitting,
}

#[derive(Args)]
struct SpectralArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, conflicts_with = "iterative")]
    dense: bool,
    #[arg(long)]
    iterative: bool,
    #[arg(long, default_value_t = trace_lab::spectral::DEFAULT_EIGEN_TOL)]
    tol: f64,
    /// Also export a matrix as CSV with row and column headers.
    #[arg(long, value_enum, requires = "csv")]
    matrix: Option<MatrixKind>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Harmonic {
    #[value(name = "n")]
    N,
    #[value(name = "n-1")]
    NMinusOne,
}

#[derive(Args)]
struct BoundsArgs {
    /// Measure n, d and lambda from a graph instead of passing them.
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.25)]
    xi: f64,
    #[arg(long, value_enum, default_value = "n-1")]
    harmonic: Harmonic,
    /// Emit a CSV grid over these d/lambda ratios instead of one report.
    #[arg(long, value_delimiter = ',')]
    ratios: Vec<f64>,
    /// Vertex counts for the grid; defaults to `--n`.
    #[arg(long, value_delimiter = ',')]
    n_values: Vec<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct WalkArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long, short = 'L')]
    length: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Blanket-time parameter; blanket times are reported for regular graphs.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Per-trial rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CoverArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long)]
    worst_start: bool,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct HamiltonArgs {
    #[command(subcommand)]
    command: HamiltonCommand,
}

#[derive(Clone, Copy, ValueEnum)]
enum CycleMethodArg {
    Exact,
    Posa,
}

#[derive(Subcommand)]
enum HamiltonCommand {
    /// Certify expansion and joinedness for constant `c`.
    Certify {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        c: f64,
        /// `exact` or `sampled:<k>[:<seed>]`.
        #[arg(long, default_value = "exact")]
        mode: String,
    },
    /// Search for a Hamilton cycle.
    Cycle {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "exact")]
        method: CycleMethodArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Search-node budget for exact backtracking.
        #[arg(long, default_value_t = u64::MAX)]
        budget: u64,
    },
    /// Minimum-degree and Hamiltonicity hitting times of one walk trace.
    Tau {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        walk_length: u64,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Exit with code 3 if any configured expectation fails.
    #[arg(long)]
    check: bool,
    /// Plot data to emit after the run.
    #[arg(long)]
    plot: Vec<String>,
}

enum Failure {
    Config(String),
    Runtime(String),
    Check(String),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Config(_) | LabError::Parse { .. } => Self::Config(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

type CliResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Spectral(a) => spectral(a),
        Command::Bounds(a) => bounds(a),
        Command::Walk(a) => walk(a),
        Command::Cover(a) => cover(a),
        Command::Hamilton(a) => hamilton(a),
        Command::Experiment(a) => experiment(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(3)
        }
    }
}

fn spec_for(family: Family, n: Option<usize>, d: Option<usize>, c: Option<usize>, seed: u64) -> Result<GenSpec, Failure> {
    let need = |x: Option<usize>, name: &str| x.ok_or_else(|| Failure::Config(format!("--{name} is required")));
    Ok(match family {
        Family::RandomRegular => GenSpec::RandomRegular {
            n: need(n, "n")?,
            d: need(d, "d")?,
            seed,
        },
        Family::Complete => GenSpec::Complete { n: need(n, "n")? },
        Family::Cycle => GenSpec::Cycle { n: need(n, "n")? },
        Family::Path => GenSpec::Path { n: need(n, "n")? },
        Family::Petersen => GenSpec::Petersen,
        Family::Counterexample => GenSpec::Counterexample {
            n: need(n, "n")?,
            c: need(c, "c")?,
        },
    })
}

impl GraphArgs {
    fn given(&self) -> bool {
        self.graph.is_some() || self.family.is_some()
    }

    fn load(&self) -> Result<Graph, Failure> {
        if let Some(path) = &self.graph {
            let g = if path == Path::new("-") {
                Graph::parse_edge_list(io::stdin().lock())
            } else {
                let f = File::open(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                Graph::parse_edge_list(BufReader::new(f))
            };
            return g.map_err(|e| Failure::Config(e.to_string()));
        }
        let family = self
            .family
            .ok_or_else(|| Failure::Config("pass --graph <file> or --family".into()))?;
        let spec = spec_for(family, self.n, self.d, self.gen_c, self.graph_seed)?;
        spec.validate()?;
        Ok(spec.build()?)
    }
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json(v: &impl serde::Serialize) -> CliResult {
    let text = serde_json::to_string_pretty(v)?;
    print_line(&text)
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_line(text: &str) -> CliResult {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn gen(a: GenArgs) -> CliResult {
    let spec = spec_for(a.family, a.n, a.d, a.c, a.seed)?;
    spec.validate()?;
    let g = spec.build()?;
    let mut out = output(a.output.as_deref())?;
    match out.write_all(g.to_edge_list().as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_matrix(path: &Path, m: &[Vec<f64>]) -> io::Result<()> {
    let mut out = output(Some(path))?;
    let header: Vec<String> = (0..m.len()).map(|i| i.to_string()).collect();
    writeln!(out, ",{}", header.join(","))?;
    for (i, row) in m.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{i},{}", cells.join(","))?;
    }
    out.flush()
}

fn spectral(a: SpectralArgs) -> CliResult {
    let g = a.graph.load()?;
    let opts = EigenOptions {
        tol: a.tol,
        method: if a.dense {
            Some(EigenMethod::Dense)
        } else if a.iterative {
            Some(EigenMethod::Iterative)
        } else {
            None
        },
        ..EigenOptions::default()
    };
    let summary = eigen_extremes(&g, &opts)?;
    if let (Some(kind), Some(path)) = (a.matrix, a.csv.as_deref()) {
        let m = match kind {
            MatrixKind::Adjacency => g.adjacency_dense(),
            MatrixKind::Resistance => resistance_matrix(&g)?.resistance,
            MatrixKind::Hitting => {
                let mut t = resistance_matrix(&g)?;
                fill_hitting_tetali(&mut t, &g)?;
                t.hitting.expect("filled above")
            }
        };
        write_matrix(path, &m)?;
    }
    print_json(&summary)
}

fn bounds(a: BoundsArgs) -> CliResult {
    let convention = match a.harmonic {
        Harmonic::N => HarmonicConvention::N,
        Harmonic::NMinusOne => HarmonicConvention::NMinusOne,
    };
    if let Some(r) = a.ratios.iter().find(|&&r| !(r > 1.0)) {
        return Err(Failure::Config(format!("--ratios are d/lambda and must exceed 1, got {r}")));
    }
    // A ratio grid fixes lambda itself, so only n and d are needed.
    let sweep_only = !a.ratios.is_empty() && !a.graph.given();
    let (n, d, lambda) = match a.lambda {
        _ if sweep_only || (a.lambda.is_some() && !a.graph.given()) => {
            let n = a.graph.n.ok_or_else(|| Failure::Config("--n is required".into()))?;
            let d = a.graph.d.ok_or_else(|| Failure::Config("--d is required".into()))?;
            (n, d, a.lambda.unwrap_or(f64::NAN))
        }
        given => {
            let g = a.graph.load()?;
            let s = eigen_extremes(&g, &EigenOptions::default())?;
            (g.n(), s.d, given.unwrap_or(s.lambda))
        }
    };
    if a.ratios.is_empty() {
        return print_json(&bounds_report(n, d, lambda, a.eps, a.xi, convention)?);
    }
    let ns = if a.n_values.is_empty() { vec![n] } else { a.n_values };
    let mut out = output(a.csv.as_deref())?;
    writeln!(out, "n,d,lambda,eps,h_lower,h_upper,cover_upper")?;
    for &n in &ns {
        for &r in &a.ratios {
            let lambda = d as f64 / r;
            let b = cover_time_spectral_bound(n, d, lambda, a.eps)?;
            writeln!(out, "{n},{d},{lambda},{},{},{},{}", a.eps, b.h_lower, b.h_upper, b.cover_upper)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

const WALK_COLUMNS: &str = "trial,start,seed,cover_step,blanket_t,rho_hat,censored";

fn walk(a: WalkArgs) -> CliResult {
    let g = a.graph.load()?;
    let regular = g.regular_degree().is_some();
    let mut csv = a.csv.as_deref().map(|p| output(Some(p))).transpose()?;
    if let Some(w) = csv.as_mut() {
        writeln!(w, "{WALK_COLUMNS}")?;
    }
    let mut covers = Vec::new();
    let mut ratios = Vec::new();
    for trial in 0..a.trials {
        let seed = trace_lab::rng::split(a.seed, trial);
        let t = simulate_walk(&g, a.start, a.length, seed)?;
        let cover = t.cover_step();
        let rho = min_visit_ratio(&t);
        let blanket = if regular {
            blanket_time(&g, a.start, a.delta, seed, a.length)?.blanket_time
        } else {
            None
        };
        if let Some(w) = csv.as_mut() {
            writeln!(
                w,
                "{trial},{},{seed},{},{},{rho},{}",
                a.start,
                opt(cover),
                opt(blanket),
                cover.is_none()
            )?;
        }
        covers.push(cover.map(|c| c as f64));
        ratios.push(Some(rho));
    }
    if let Some(mut w) = csv {
        w.flush()?;
    }
    print_json(&json!({
        "n": g.n(),
        "length": a.length,
        "trials": a.trials,
        "cover_step": trace_lab::stats::Summary::from_observations(covers),
        "rho_hat": trace_lab::stats::Summary::from_observations(ratios),
    }))
}

fn cover(a: CoverArgs) -> CliResult {
    let g = a.graph.load()?;
    let mut opts = CoverOptions::new(a.trials, a.seed);
    opts.start = a.start;
    if a.worst_start {
        opts = opts.worst_start();
    }
    if let Some(b) = a.budget {
        opts = opts.with_budget(b);
    }
    let report = cover_time_empirical(&g, &opts)?;
    if let Some(path) = a.csv.as_deref() {
        let mut w = output(Some(path))?;
        writeln!(w, "{WALK_COLUMNS}")?;
        for r in &report.records {
            writeln!(
                w,
                "{},{},{},{},,,{}",
                r.trial,
                r.start,
                r.seed,
                opt(r.cover_step),
                r.cover_step.is_none()
            )?;
        }
        w.flush()?;
    }
    print_json(&json!({
        "n": g.n(),
        "trials": a.trials,
        "summary": report.summary,
        "worst_start": report.worst_start,
        "worst_mean": report.worst_mean,
        "censored": report.any_censored(),
    }))
}

fn hamilton(a: HamiltonArgs) -> CliResult {
    match a.command {
        HamiltonCommand::Certify { graph, c, mode } => {
            let g = graph.load()?;
            let mode: CertMode = mode.parse()?;
            print_json(&certify_expander(&g, c, mode)?)
        }
        HamiltonCommand::Cycle {
            graph,
            method,
            seed,
            budget,
        } => {
            let g = graph.load()?;
            let r = match method {
                CycleMethodArg::Exact => hamiltonian_exact(&g, budget),
                CycleMethodArg::Posa => hamiltonian_posa(&g, seed, &PosaOptions::default()),
            };
            match &r.cycle {
                Some(c) => {
                    let line: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                    print_line(&line.join(" "))
                }
                None => print_json(&r),
            }
        }
        HamiltonCommand::Tau {
            graph,
            walk_length,
            start,
            seed,
        } => {
            let g = graph.load()?;
            print_json(&tau_times(&g, start, walk_length, seed, &TauOptions::default())?)
        }
    }
}

fn experiment(a: ExperimentArgs) -> CliResult {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    cfg.apply_env_overrides()?;
    let kinds: Vec<PlotKind> = a
        .plot
        .iter()
        .map(|k| k.parse())
        .collect::<Result<_, LabError>>()?;
    let (res, paths) = run_experiment(&cfg)?;
    let mut plots = Vec::new();
    for k in kinds {
        plots.extend(emit_plot_data(&res, k, &cfg.output.dir)?);
    }
    print_json(&json!({
        "csv": paths.csv,
        "summary": paths.summary,
        "plots": plots,
        "pooled": res.pooled,
        "checks_passed": res.checks_pass(),
    }))?;
    if a.check && !res.checks_pass() {
        let failed = res.checks.iter().filter(|c| !c.passed).count();
        return Err(Failure::Check(format!("{failed} of {} expectations failed", res.checks.len())));
    }
    Ok(())
}
