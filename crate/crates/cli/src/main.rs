use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use booklayout::generate;
use booklayout::graph::Graph;
use booklayout::io::{layout_from_json, serialize_graph, write_atomic};
use booklayout::kernel::{build_reduced_graph, compute_vertex_integrity, Threshold};
use booklayout::layout::{page_width, validate_layout, LayoutKind};
use booklayout::oracle::{solve_exhaustive_all, OracleOptions, OracleQuery};
use booklayout::run::{self, read_graph, Algorithm, InnerChoice, KernelOptions, RunReport, SolveRequest};
use booklayout::svg::emit_svg;

/// Exact stack and queue layouts of small graphs.
///
/// Exit codes: 0 layout found (or valid), 1 no layout exists (or invalid),
/// 2 refused by a size guard, 3 error.
#[derive(Parser)]
#[command(name = "booklayout", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a layout JSON file against a graph.
    Validate {
        graph: PathBuf,
        layout: PathBuf,
        /// Also require page width at most this.
        #[arg(long)]
        width: Option<usize>,
    },
    /// Exhaustive reference search; prints the lexicographically first layout.
    Oracle {
        #[command(flatten)]
        problem: Problem,
        /// Count every (spine, page assignment) pair instead.
        #[arg(long)]
        count: bool,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Decide a layout with the chosen algorithm.
    Solve {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, value_enum, default_value_t = Algo::Oracle)]
        algo: Algo,
        #[command(flatten)]
        kernel: KernelArgs,
        /// Cut-set states to materialize before refusing.
        #[arg(long)]
        max_states: Option<usize>,
        /// Write every cut-set state, one per line (cutset only).
        #[arg(long)]
        dump_states: Option<PathBuf>,
        /// Write the successful labeling and levels (queue1 only).
        #[arg(long)]
        dump_branch: Option<PathBuf>,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Vertex integrity with a minimizing separator.
    Vi {
        graph: PathBuf,
        /// Give up once integrity exceeds this.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Build the reduced graph and its certificate.
    Kernelize {
        graph: PathBuf,
        #[arg(long, short = 'l')]
        pages: usize,
        /// `paper` or a constant number of members.
        #[arg(long, default_value = "paper", value_parser = parse_threshold)]
        threshold: Threshold,
        /// Write the kernel graph here.
        #[arg(long)]
        graph_out: Option<PathBuf>,
        /// Write the certificate JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an instance in the graph text format.
    Gen(GenArgs),
    /// Draw a layout as an SVG arc diagram.
    Render {
        layout: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Validate against this graph first.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Run algorithms over instances and write CSV.
    Bench {
        instances: Vec<PathBuf>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "oracle")]
        algos: Vec<Algo>,
        #[arg(long, value_enum, default_value_t = Kind::Stack)]
        kind: Kind,
        #[arg(long, short = 'l', default_value_t = 1)]
        pages: usize,
        #[arg(long)]
        width: Option<usize>,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = OracleOptions::default().max_n)]
        max_n: usize,
        #[arg(long)]
        max_states: Option<usize>,
        /// CSV destination; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Problem {
    graph: PathBuf,
    #[arg(long, value_enum, default_value_t = Kind::Stack)]
    kind: Kind,
    #[arg(long, short = 'l', default_value_t = 1)]
    pages: usize,
    /// Page width cap.
    #[arg(long)]
    width: Option<usize>,
    /// Worker-count hint for the parallel searches.
    #[arg(long)]
    threads: Option<usize>,
    /// Largest vertex count the oracle accepts.
    #[arg(long, default_value_t = OracleOptions::default().max_n)]
    max_n: usize,
}

#[derive(Args)]
struct Outputs {
    /// Write the report JSON here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Draw the witness.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    /// Inner solver of the kernel.
    #[arg(long, value_enum, default_value_t = Inner::Oracle)]
    inner: Inner,
    /// Kernel largeness threshold: `paper` or a constant.
    #[arg(long, default_value = "paper", value_parser = parse_threshold)]
    threshold: Threshold,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    family: Family,
    /// Vertex count (for star: leaves).
    #[arg(long, short)]
    n: Option<usize>,
    /// Edge count.
    #[arg(long, short)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Core graph file (twin-gadget).
    #[arg(long)]
    core: Option<PathBuf>,
    /// Copied component file (twin-gadget).
    #[arg(long)]
    copy: Option<PathBuf>,
    /// Attachment `copy_vertex:core_vertex`, repeatable (twin-gadget).
    #[arg(long)]
    attach: Vec<String>,
    /// Number of copies (twin-gadget).
    #[arg(long, short)]
    k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Stack,
    Queue,
}

impl From<Kind> for LayoutKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Stack => LayoutKind::Stack,
            Kind::Queue => LayoutKind::Queue,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Oracle,
    Cutset,
    Queue1,
    Kernel,
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Oracle => Algorithm::Oracle,
            Algo::Cutset => Algorithm::Cutset,
            Algo::Queue1 => Algorithm::Queue1,
            Algo::Kernel => Algorithm::Kernel,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Inner {
    Oracle,
    Cutset,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Path,
    Cycle,
    Star,
    Complete,
    TwinGadget,
    #[value(alias = "random-gnm")]
    Gnm,
    /// Random connected graph.
    Connected,
}

fn parse_threshold(s: &str) -> Result<Threshold, String> {
    match s {
        "paper" => Ok(Threshold::Paper),
        _ => s
            .parse::<u64>()
            .map(Threshold::Constant)
            .map_err(|_| format!("threshold must be `paper` or a number, got `{s}`")),
    }
}

fn kernel_options(k: &KernelArgs) -> KernelOptions {
    KernelOptions {
        threshold: k.threshold.clone(),
        inner: match k.inner {
            Inner::Oracle => InnerChoice::Oracle,
            Inner::Cutset => InnerChoice::Cutset,
        },
    }
}

fn request(p: &Problem, algo: Algorithm, o: &Outputs) -> SolveRequest {
    let mut r = SolveRequest::new(&p.graph, algo, p.kind.into(), p.pages);
    r.width = p.width;
    r.threads = p.threads;
    r.oracle_max_n = p.max_n;
    r.out = o.out.clone();
    r.svg = o.svg.clone();
    r
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes()).with_context(|| format!("cannot write {}", path.display()))
}

fn finish(report: &RunReport) -> u8 {
    print_json(&report.to_json());
    report.exit_code() as u8
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors must not read as "refused".
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Validate { graph, layout, width } => {
            let g = read_graph(&graph)?;
            let text = std::fs::read_to_string(&layout).with_context(|| format!("cannot read {}", layout.display()))?;
            let l = layout_from_json(&text)?;
            let report = validate_layout(&g, &l)?;
            let w = page_width(&l);
            let width_ok = width.is_none_or(|q| w <= q);
            print_json(&json!({
                "valid": report.is_ok() && width_ok,
                "page_width": w,
                "violations": report.violations.iter().map(|(e, f)| {
                    [format!("{} {}", e.0, e.1), format!("{} {}", f.0, f.1)]
                }).collect::<Vec<_>>(),
            }));
            Ok(if report.is_ok() && width_ok { 0 } else { 1 })
        }
        Command::Oracle { problem, count, outputs } => {
            if count {
                let g = read_graph(&problem.graph)?;
                let q = OracleQuery::new(problem.kind.into(), problem.pages, problem.width);
                let opts = OracleOptions {
                    max_n: problem.max_n,
                    threads: problem.threads,
                    ..Default::default()
                };
                let started = Instant::now();
                let total = solve_exhaustive_all(&g, &q, &opts)?;
                print_json(&json!({ "count": total, "millis": started.elapsed().as_secs_f64() * 1000.0 }));
                return Ok(if total > 0 { 0 } else { 1 });
            }
            let req = request(&problem, Algorithm::Oracle, &outputs);
            Ok(finish(&run::run(&req)?))
        }
        Command::Solve {
            problem,
            algo,
            kernel,
            max_states,
            dump_states,
            dump_branch,
            outputs,
        } => {
            let mut req = request(&problem, algo.into(), &outputs);
            req.kernel = kernel_options(&kernel);
            req.max_states = max_states;
            req.dump_states = dump_states;
            req.dump_branch = dump_branch;
            Ok(finish(&run::run(&req)?))
        }
        Command::Vi { graph, budget } => {
            let g = read_graph(&graph)?;
            match compute_vertex_integrity(&g, budget) {
                Ok(dec) => {
                    let names = |vs: &[usize]| vs.iter().map(|&v| g.name(v).to_string()).collect::<Vec<_>>();
                    print_json(&json!({
                        "p": dec.p,
                        "separator": names(&dec.separator),
                        "components": dec.components.iter().map(|c| names(c)).collect::<Vec<_>>(),
                    }));
                    Ok(0)
                }
                Err(e) => {
                    print_json(&json!({ "refused": e.to_string() }));
                    Ok(2)
                }
            }
        }
        Command::Kernelize {
            graph,
            pages,
            threshold,
            graph_out,
            out,
        } => {
            if pages == 0 {
                bail!("the page count must be at least 1");
            }
            let g = read_graph(&graph)?;
            let dec = compute_vertex_integrity(&g, None)?;
            let cert = build_reduced_graph(&g, &dec, pages, &threshold);
            if let Some(path) = graph_out {
                write_file(&path, &serialize_graph(&cert.g_reduced))?;
            }
            let text = serde_json::to_string_pretty(&cert.to_json(&g))?;
            match out {
                Some(path) => write_file(&path, &text)?,
                None => println!("{text}"),
            }
            Ok(0)
        }
        Command::Gen(args) => {
            let g = generate_instance(&args)?;
            let text = serialize_graph(&g);
            match &args.out {
                Some(path) => write_file(path, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Render { layout, out, graph } => {
            let text = std::fs::read_to_string(&layout).with_context(|| format!("cannot read {}", layout.display()))?;
            let l = layout_from_json(&text)?;
            if let Some(path) = graph {
                let g = read_graph(&path)?;
                let report = validate_layout(&g, &l)?;
                if !report.is_ok() {
                    bail!("layout is invalid: {} conflicting edge pairs", report.violations.len());
                }
            }
            emit_svg(&l, &out)?;
            Ok(0)
        }
        Command::Bench {
            instances,
            algos,
            kind,
            pages,
            width,
            kernel,
            threads,
            max_n,
            max_states,
            out,
        } => bench(&instances, &algos, kind.into(), pages, width, &kernel, threads, max_n, max_states, out.as_deref()),
    }
}

fn generate_instance(a: &GenArgs) -> Result<Graph> {
    let need = |v: Option<usize>, what: &str| v.with_context(|| format!("this family needs --{what}"));
    Ok(match a.family {
        Family::Path => generate::path(need(a.n, "n")?),
        Family::Cycle => generate::cycle(need(a.n, "n")?)?,
        Family::Star => generate::star(need(a.n, "n")?),
        Family::Complete => generate::complete(need(a.n, "n")?),
        Family::Gnm => generate::random_gnm(need(a.n, "n")?, need(a.m, "m")?, a.seed)?,
        Family::Connected => generate::random_connected(need(a.n, "n")?, need(a.m, "m")?, a.seed)?,
        Family::TwinGadget => {
            let core = read_graph(a.core.as_deref().context("twin-gadget needs --core")?)?;
            let copy = read_graph(a.copy.as_deref().context("twin-gadget needs --copy")?)?;
            let pairs: Vec<(&str, &str)> = a
                .attach
                .iter()
                .map(|s| s.split_once(':').with_context(|| format!("attachment `{s}` is not `copy:core`")))
                .collect::<Result<_>>()?;
            generate::twin_gadget(&core, &copy, &pairs, need(a.k, "k")?)?
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn bench(
    instances: &[PathBuf],
    algos: &[Algo],
    kind: LayoutKind,
    pages: usize,
    width: Option<usize>,
    kernel: &KernelArgs,
    threads: Option<usize>,
    max_n: usize,
    max_states: Option<usize>,
    out: Option<&Path>,
) -> Result<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["instance", "n", "m", "algo", "params", "verdict", "millis", "state_count"])?;
    for path in instances {
        let g = read_graph(path)?;
        for &algo in algos {
            let algo: Algorithm = algo.into();
            // queue1 only answers one-page queue questions.
            let (kind, pages) = if algo == Algorithm::Queue1 { (LayoutKind::Queue, 1) } else { (kind, pages) };
            let mut req = SolveRequest::new(path, algo, kind, pages);
            req.width = if matches!(algo, Algorithm::Oracle | Algorithm::Cutset) { width } else { None };
            req.threads = threads;
            req.oracle_max_n = max_n;
            req.max_states = max_states;
            req.kernel = kernel_options(kernel);
            let mut params = format!("kind={kind};pages={pages}");
            if let Some(q) = req.width {
                params += &format!(";q={q}");
            }
            if algo == Algorithm::Kernel {
                params += &format!(";threshold={:?}", req.kernel.threshold);
            }
            let started = Instant::now();
            let (verdict, states) = match run::solve(&g, &req) {
                Ok(r) => (
                    match r.exit_code() {
                        0 => "found",
                        1 => "infeasible",
                        _ => "refused",
                    },
                    r.state_count(),
                ),
                Err(e) => {
                    eprintln!("{}: {algo}: {e}", path.display());
                    ("error", None)
                }
            };
            let millis = started.elapsed().as_secs_f64() * 1000.0;
            w.write_record([
                path.display().to_string(),
                g.n().to_string(),
                g.m().to_string(),
                algo.to_string(),
                params,
                verdict.to_string(),
                format!("{millis:.3}"),
                states.map(|s| s.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    let bytes = w.into_inner()?;
    match out {
        Some(path) => write_atomic(path, &bytes).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{}", String::from_utf8(bytes)?),
    }
    Ok(0)
}
