//! Command-line front end. `run` is the whole program minus process exit, so
//! tests can drive it in-process.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::catalog::{self, CatalogEntry};
use crate::graph::{parse_graph, RoutedGraph};
use crate::tensor::{
    analyze, certify_superunitary, process_matrix, random_fleshing, swap_fleshing, write_dump, CertifyOptions,
    ChoiReport, TensorError,
};
use crate::validity::validate;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BALANCE: i32 = 3;

/// Environment variable capping the worker-thread count.
pub const THREADS_VAR: &str = "ROUTACT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "routact", version, about = "Validate and certify routed quantum circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum FleshingSource {
    /// The catalog entry's reference fleshing with swaps at the parties.
    #[default]
    Catalog,
    /// Random routed unitaries, parties replaced by swaps.
    Random,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Graph file, or `catalog:<id>` (e.g. `catalog:switch:3`).
    pub input: String,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check bi-univocality and weak loops.
    Validate(InputArgs),
    /// Print or write the branch graph in DOT.
    BranchGraph {
        #[command(flatten)]
        io: InputArgs,
        /// Write the DOT graph here instead of stdout.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Contract random routed-unitary fleshings and check unitarity.
    Simulate {
        #[command(flatten)]
        io: InputArgs,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9, value_parser = positive)]
        tol: f64,
        /// Run even if the graph is invalid.
        #[arg(long)]
        force: bool,
        /// Pad one node per trial with a qubit ancilla.
        #[arg(long)]
        ancillas: bool,
    },
    /// Process matrix of the supermap with swaps at the party nodes.
    Choi {
        #[command(flatten)]
        io: InputArgs,
        #[arg(long, value_enum, default_value_t)]
        fleshing: FleshingSource,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Built-in example graphs.
    #[command(subcommand)]
    Catalog(CatalogCommand),
}

#[derive(Debug, Subcommand)]
pub enum CatalogCommand {
    /// List entry ids.
    List {
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Write an entry as a graph file.
    Export {
        id: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also dump each node map of the reference fleshing to `<dir>/<node>.bin`.
        #[arg(long)]
        fleshing_dir: Option<PathBuf>,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

/// Failure with its exit code; the message goes to stderr.
#[derive(Debug)]
struct Failure(i32, String);

type Outcome = Result<i32, Failure>;

fn input_err(e: impl std::fmt::Display) -> Failure {
    Failure(EXIT_INPUT, e.to_string())
}

fn tensor_err(e: TensorError) -> Failure {
    let code = match e {
        TensorError::UnbalancedBranch { .. } | TensorError::DimensionMismatch { .. } => EXIT_BALANCE,
        TensorError::RouteViolation(_) => EXIT_FAIL,
        _ => EXIT_INPUT,
    };
    Failure(code, e.to_string())
}

struct Input {
    graph: RoutedGraph,
    entry: Option<CatalogEntry>,
}

fn load(spec: &str) -> Result<Input, Failure> {
    if let Some(id) = spec.strip_prefix("catalog:") {
        let e = catalog::lookup(id).ok_or_else(|| input_err(format!("unknown catalog entry `{id}`")))?;
        return Ok(Input { graph: e.graph.clone(), entry: Some(e) });
    }
    let text = fs::read_to_string(spec).map_err(|e| input_err(format!("{spec}: {e}")))?;
    let graph = parse_graph(&text).map_err(|e| input_err(format!("{spec}: {e}")))?;
    Ok(Input { graph, entry: None })
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

/// Sets the global thread pool size from the environment, once.
pub fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v.parse().ok().filter(|&n| n >= 1).ok_or_else(|| format!("{THREADS_VAR}={v} is not a positive integer"))?;
    // A second initialisation (e.g. repeated in-process runs) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    if let Err(m) = init_threads() {
        let _ = writeln!(err, "error: {m}");
        return EXIT_INPUT;
    }
    let mut buf = String::new();
    let code = match execute(cli.command, &mut buf) {
        Ok(c) => c,
        Err(Failure(c, m)) => {
            let _ = writeln!(err, "error: {m}");
            c
        }
    };
    let _ = out.write_all(buf.as_bytes());
    code
}

fn execute(cmd: Command, out: &mut String) -> Outcome {
    match cmd {
        Command::Validate(io) => cmd_validate(&io, out),
        Command::BranchGraph { io, dot } => cmd_branch_graph(&io, dot.as_deref(), out),
        Command::Simulate { io, trials, seed, tol, force, ancillas } => {
            let opts = CertifyOptions { trials: trials as usize, seed, tol, with_ancillas: ancillas };
            cmd_simulate(&io, &opts, force, out)
        }
        Command::Choi { io, fleshing, seed } => cmd_choi(&io, fleshing, seed, out),
        Command::Catalog(CatalogCommand::List { format }) => cmd_catalog_list(format, out),
        Command::Catalog(CatalogCommand::Export { id, output, fleshing_dir }) => {
            cmd_catalog_export(&id, output.as_deref(), fleshing_dir.as_deref(), out)
        }
    }
}

fn line(out: &mut String, s: impl AsRef<str>) {
    out.push_str(s.as_ref());
    out.push('\n');
}

fn cmd_validate(io: &InputArgs, out: &mut String) -> Outcome {
    let inp = load(&io.input)?;
    let v = validate(&inp.graph).map_err(input_err)?;
    match io.format {
        Format::Json => line(out, v.to_json()),
        Format::Text => line(out, v.summary()),
    }
    if !v.structure_ok {
        return Ok(EXIT_INPUT);
    }
    Ok(if v.valid { EXIT_PASS } else { EXIT_FAIL })
}

fn cmd_branch_graph(io: &InputArgs, dot: Option<&Path>, out: &mut String) -> Outcome {
    let inp = load(&io.input)?;
    let v = validate(&inp.graph).map_err(input_err)?;
    if !v.structure_ok {
        return Err(Failure(EXIT_INPUT, v.summary()));
    }
    let Some(bg) = v.graph.as_ref() else {
        return Err(Failure(EXIT_FAIL, format!("branch graph undefined; {}", v.summary())));
    };
    let text = bg.to_dot();
    match dot {
        Some(p) => fs::write(p, &text).map_err(|e| input_err(format!("{}: {e}", p.display())))?,
        None if io.format == Format::Text => out.push_str(&text),
        None => {}
    }
    if io.format == Format::Json {
        line(out, json(&v.branch_graph));
    }
    Ok(EXIT_PASS)
}

fn cmd_simulate(io: &InputArgs, opts: &CertifyOptions, force: bool, out: &mut String) -> Outcome {
    let inp = load(&io.input)?;
    let v = validate(&inp.graph).map_err(input_err)?;
    if !v.structure_ok {
        return Err(Failure(EXIT_INPUT, v.summary()));
    }
    if !v.valid && !force {
        return Err(Failure(EXIT_FAIL, format!("{}; pass --force to simulate anyway", v.summary())));
    }
    let r = certify_superunitary(&inp.graph, opts).map_err(tensor_err)?;
    match io.format {
        Format::Json => line(out, json(&r)),
        Format::Text => {
            for t in &r.trials {
                line(
                    out,
                    format!(
                        "trial {:>3}  seed {:>20}  ancilla {:<4}  S†S-I {:.3e}  SS†-I {:.3e}  {}",
                        t.trial,
                        t.seed,
                        t.ancilla_node.as_deref().unwrap_or("-"),
                        t.isometry_dev,
                        t.coisometry_dev,
                        if t.pass { "PASS" } else { "FAIL" }
                    ),
                );
            }
            line(
                out,
                format!(
                    "{} trials on {}x{} practical spaces, worst deviation {:.3e}, tol {:.1e}: {}",
                    r.trials.len(),
                    r.practical_out,
                    r.practical_in,
                    r.worst(),
                    r.tol,
                    if r.passed { "unitary" } else { "NOT unitary" }
                ),
            );
        }
    }
    Ok(if r.passed { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct ChoiOutput<'a> {
    fleshing: &'static str,
    d_in: usize,
    d_out: usize,
    labels: &'a [String],
    #[serde(flatten)]
    report: ChoiReport,
}

fn cmd_choi(io: &InputArgs, source: FleshingSource, seed: u64, out: &mut String) -> Outcome {
    let inp = load(&io.input)?;
    let g = &inp.graph;
    let (f, name) = match (source, &inp.entry) {
        (FleshingSource::Catalog, Some(e)) => match e.choi_fleshing() {
            Some(f) => (f.map_err(tensor_err)?, "catalog"),
            None => return Err(input_err(format!("`{}` has no reference fleshing; use --fleshing random", e.id))),
        },
        (FleshingSource::Catalog, None) => return Err(input_err("--fleshing catalog needs a catalog:<id> input")),
        (FleshingSource::Random, _) => {
            if !g.nodes().iter().any(|n| n.party) {
                return Err(tensor_err(TensorError::MissingPartyFlags));
            }
            let base = random_fleshing(g, seed, &Default::default()).map_err(tensor_err)?;
            (swap_fleshing(g, &base).map_err(tensor_err)?, "random")
        }
    };
    let w = process_matrix(g, &f).map_err(tensor_err)?;
    let report = analyze(&w.matrix);
    let ok = report.hermitian && report.psd && report.rank_one;
    match io.format {
        Format::Json => line(out, json(&ChoiOutput { fleshing: name, d_in: w.d_in, d_out: w.d_out, labels: &w.labels, report })),
        Format::Text => {
            line(out, format!("process matrix {0}x{0} ({1} in, {2} out; {name} fleshing)", report.dim, w.d_in, w.d_out));
            line(out, format!("factors: {}", w.labels.join(" ")));
            line(out, format!("trace {:.6}", report.trace));
            line(out, format!("hermiticity deviation {:.3e} ({})", report.hermiticity_dev, yes(report.hermitian)));
            line(out, format!("min eigenvalue {:.3e} (psd: {})", report.min_eigenvalue, yes(report.psd)));
            line(out, format!("singular values {:.6e} {:.3e} (rank one: {})", report.sigma1, report.sigma2, yes(report.rank_one)));
        }
    }
    Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
}

fn yes(b: bool) -> &'static str {
    if b { "yes" } else { "no" }
}

#[derive(Serialize)]
struct ListItem {
    id: String,
    summary: &'static str,
    expected_valid: bool,
    experimental: bool,
    nodes: usize,
    arrows: usize,
}

fn cmd_catalog_list(format: Format, out: &mut String) -> Outcome {
    let items: Vec<ListItem> = catalog::all()
        .into_iter()
        .map(|e| ListItem {
            nodes: e.graph.nodes().len(),
            arrows: e.graph.arrows().len(),
            id: e.id,
            summary: e.summary,
            expected_valid: e.expected_valid,
            experimental: e.experimental,
        })
        .collect();
    match format {
        Format::Json => line(out, json(&items)),
        Format::Text => {
            for i in &items {
                let tag = if i.experimental { " [experimental]" } else { "" };
                line(out, format!("{:<17} {}{tag}", i.id, i.summary));
            }
        }
    }
    Ok(EXIT_PASS)
}

fn cmd_catalog_export(id: &str, output: Option<&Path>, dir: Option<&Path>, out: &mut String) -> Outcome {
    let e = catalog::lookup(id).ok_or_else(|| input_err(format!("unknown catalog entry `{id}`")))?;
    let text = e.to_file().to_json() + "\n";
    match output {
        Some(p) => fs::write(p, &text).map_err(|err| input_err(format!("{}: {err}", p.display())))?,
        None => out.push_str(&text),
    }
    if let Some(dir) = dir {
        let f = e
            .default_fleshing()
            .ok_or_else(|| input_err(format!("`{}` has no reference fleshing", e.id)))?
            .map_err(tensor_err)?;
        fs::create_dir_all(dir).map_err(|err| input_err(format!("{}: {err}", dir.display())))?;
        for (n, m) in f.maps.iter().enumerate() {
            let p = dir.join(format!("{}.bin", e.graph.nodes()[n].id));
            let mut file = fs::File::create(&p).map_err(|err| input_err(format!("{}: {err}", p.display())))?;
            write_dump(&mut file, m).map_err(tensor_err)?;
        }
    }
    Ok(EXIT_PASS)
}
