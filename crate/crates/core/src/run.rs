//! Solver dispatch and result reporting for the command-line tool.
//!
//! Every run ends in one of three verdicts, and the exit code tells them
//! apart: 0 when a layout was found, 1 when none exists, 2 when a size guard
//! refused the instance. Anything else is an error, exit code 3.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cutset::{format_state, solve_components, CutsetError, CutsetOutcome, SearchOptions};
use crate::graph::Graph;
use crate::io::{layout_to_json_value, parse_graph, write_atomic, ParseError};
use crate::kernel::{solve_via_kernel, InnerSolver, KernelError, Threshold};
use crate::layout::{page_width, validate_layout, LayoutKind, LinearLayout};
use crate::oracle::{solve_exhaustive, OracleError, OracleOptions, OracleQuery};
use crate::queue1::{solve_queue_one_page_with, Queue1Error, Queue1Options, Queue1Outcome};
use crate::svg::{emit_svg, SvgError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Oracle,
    Cutset,
    Queue1,
    Kernel,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Oracle => "oracle",
            Algorithm::Cutset => "cutset",
            Algorithm::Queue1 => "queue1",
            Algorithm::Kernel => "kernel",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "oracle" => Ok(Algorithm::Oracle),
            "cutset" => Ok(Algorithm::Cutset),
            "queue1" => Ok(Algorithm::Queue1),
            "kernel" => Ok(Algorithm::Kernel),
            _ => Err(format!("unknown algorithm `{s}` (expected oracle, cutset, queue1 or kernel)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerChoice {
    Oracle,
    Cutset,
}

#[derive(Debug, Clone)]
pub struct KernelOptions {
    pub threshold: Threshold,
    pub inner: InnerChoice,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            threshold: Threshold::Paper,
            inner: InnerChoice::Oracle,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveRequest {
    pub input: PathBuf,
    pub kind: LayoutKind,
    pub pages: usize,
    /// Page width cap.
    pub width: Option<usize>,
    pub algorithm: Algorithm,
    pub kernel: KernelOptions,
    pub threads: Option<usize>,
    /// Vertex limit of the oracle, also when it runs inside the kernel.
    pub oracle_max_n: usize,
    /// State limit of the cut-set search.
    pub max_states: Option<usize>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    /// Every materialized cut-set state, one per line.
    pub dump_states: Option<PathBuf>,
    /// The successful labeling and levels of the one-page queue search.
    pub dump_branch: Option<PathBuf>,
}

impl SolveRequest {
    pub fn new(input: impl Into<PathBuf>, algorithm: Algorithm, kind: LayoutKind, pages: usize) -> Self {
        SolveRequest {
            input: input.into(),
            kind,
            pages,
            width: None,
            algorithm,
            kernel: KernelOptions::default(),
            threads: None,
            oracle_max_n: OracleOptions::default().max_n,
            max_states: None,
            out: None,
            svg: None,
            dump_states: None,
            dump_branch: None,
        }
    }

    /// Checks that the parameters fit the algorithm.
    pub fn check(&self) -> Result<(), RunError> {
        let bad = |msg: &str| Err(RunError::InvalidRequest(msg.to_string()));
        if self.pages == 0 {
            return bad("the page count must be at least 1");
        }
        match self.algorithm {
            Algorithm::Oracle if self.width == Some(0) => bad("the oracle needs a page width cap of at least 1"),
            Algorithm::Queue1 if self.kind != LayoutKind::Queue || self.pages != 1 => {
                bad("queue1 solves one-page queue layouts only (--kind queue --pages 1)")
            }
            Algorithm::Queue1 | Algorithm::Kernel if self.width.is_some() => {
                bad("a page width cap is supported by the oracle and cutset only")
            }
            _ if self.dump_states.is_some() && self.algorithm != Algorithm::Cutset => {
                bad("--dump-states needs --algo cutset")
            }
            _ if self.dump_branch.is_some() && self.algorithm != Algorithm::Queue1 => {
                bad("--dump-branch needs --algo queue1")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "verdict", content = "reason")]
pub enum Verdict {
    Found,
    Infeasible,
    Refused(String),
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Found => 0,
            Verdict::Infeasible => 1,
            Verdict::Refused(_) => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub algorithm: Algorithm,
    pub kind: LayoutKind,
    pub pages: usize,
    pub width: Option<usize>,
    pub n: usize,
    pub m: usize,
    pub verdict: Verdict,
    pub witness: Option<LinearLayout>,
    /// Milliseconds per phase.
    pub timings: BTreeMap<String, f64>,
    /// States, arcs, branches and the like.
    pub counts: BTreeMap<String, u64>,
    /// Parameters found along the way: vertex integrity, kernel size, ...
    pub params: BTreeMap<String, Value>,
    pub states_dump: Option<Vec<String>>,
    pub branch_dump: Option<Value>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    /// Primary work count for benchmarks.
    pub fn state_count(&self) -> Option<u64> {
        ["states", "covered"].iter().find_map(|k| self.counts.get(*k).copied())
    }

    pub fn to_json(&self) -> Value {
        let (verdict, reason) = match &self.verdict {
            Verdict::Found => ("found", None),
            Verdict::Infeasible => ("infeasible", None),
            Verdict::Refused(r) => ("refused", Some(r.clone())),
        };
        json!({
            "algorithm": self.algorithm,
            "kind": self.kind,
            "pages": self.pages,
            "width": self.width,
            "n": self.n,
            "m": self.m,
            "verdict": verdict,
            "reason": reason,
            "exit_code": self.exit_code(),
            "layout": self.witness.as_ref().map(layout_to_json_value),
            "timings_ms": self.timings,
            "counts": self.counts,
            "params": self.params,
        })
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("cannot read {path}: {err}")]
    Read {
        path: String,
        err: std::io::Error,
    },
    #[error("{path}: {err}")]
    Parse {
        path: String,
        err: ParseError,
    },
    #[error("cannot write {path}: {err}")]
    Write {
        path: String,
        err: std::io::Error,
    },
    #[error(transparent)]
    Svg(#[from] SvgError),
    #[error("oracle: {0}")]
    Oracle(OracleError),
    #[error("cutset: {0}")]
    Cutset(CutsetError),
    #[error("queue1: {0}")]
    Queue1(Queue1Error),
    #[error("kernel: {0}")]
    Kernel(KernelError),
    /// A solver returned a layout that does not validate: a bug.
    #[error("{algorithm} produced an invalid witness: {msg}")]
    InvalidWitness { algorithm: Algorithm, msg: String },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        3
    }
}

/// What a solver said, before validation.
enum Outcome {
    Layout(LinearLayout),
    None,
    Refused(String),
}

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// Runs the requested solver on `g` and validates any witness.
pub fn solve(g: &Graph, req: &SolveRequest) -> Result<RunReport, RunError> {
    req.check()?;
    let mut report = RunReport {
        algorithm: req.algorithm,
        kind: req.kind,
        pages: req.pages,
        width: req.width,
        n: g.n(),
        m: g.m(),
        verdict: Verdict::Infeasible,
        witness: None,
        timings: BTreeMap::new(),
        counts: BTreeMap::new(),
        params: BTreeMap::new(),
        states_dump: None,
        branch_dump: None,
    };
    let oracle_opts = OracleOptions {
        max_n: req.oracle_max_n,
        threads: req.threads,
        ..Default::default()
    };
    let started = Instant::now();
    let outcome = match req.algorithm {
        Algorithm::Oracle => {
            let q = OracleQuery::new(req.kind, req.pages, req.width);
            match solve_exhaustive(g, &q, &oracle_opts) {
                Ok(Some(l)) => Outcome::Layout(l),
                Ok(None) => Outcome::None,
                Err(e @ (OracleError::TooLarge { .. } | OracleError::StateLimit(_))) => Outcome::Refused(e.to_string()),
                Err(e) => return Err(RunError::Oracle(e)),
            }
        }
        Algorithm::Cutset => {
            let q = req.width.unwrap_or(g.m().max(1));
            report.params.insert("q".into(), json!(q));
            let mut dump: Vec<String> = Vec::new();
            let mut record = |s: &crate::cutset::StateNode| dump.push(format_state(g, s));
            let mut opts = SearchOptions {
                max_states: req.max_states,
                on_state: req.dump_states.is_some().then_some(&mut record as &mut dyn FnMut(&_)),
                ..Default::default()
            };
            let r = solve_components(g, req.kind, req.pages, q, &mut opts);
            drop(opts);
            if req.dump_states.is_some() {
                report.states_dump = Some(dump);
            }
            match r {
                Ok(r) => {
                    report.counts.insert("states".into(), r.stats.states as u64);
                    report.counts.insert("arcs".into(), r.stats.arcs as u64);
                    match r.outcome {
                        CutsetOutcome::Found(l) => Outcome::Layout(l),
                        CutsetOutcome::BoundRejected => {
                            report.params.insert("edge_bound".into(), json!("rejected"));
                            Outcome::None
                        }
                        CutsetOutcome::Exhausted => Outcome::None,
                    }
                }
                Err(e @ CutsetError::StateLimit(_)) => Outcome::Refused(e.to_string()),
                Err(e) => return Err(RunError::Cutset(e)),
            }
        }
        Algorithm::Queue1 => {
            let opts = Queue1Options {
                threads: req.threads,
                ..Default::default()
            };
            match solve_queue_one_page_with(g, &opts) {
                Ok(r) => {
                    report.counts.insert("covered".into(), r.stats.covered);
                    report.counts.insert("inconsistent".into(), r.stats.inconsistent);
                    report.counts.insert("rejected".into(), r.stats.rejected);
                    report.counts.insert("tested".into(), r.stats.tested);
                    report.counts.insert("positive".into(), r.stats.positive);
                    if req.dump_branch.is_some() {
                        report.branch_dump = Some(r.branch_json());
                    }
                    match r.outcome {
                        Queue1Outcome::Found(l) => Outcome::Layout(l),
                        Queue1Outcome::BoundRejected => {
                            report.params.insert("edge_bound".into(), json!("rejected"));
                            Outcome::None
                        }
                        Queue1Outcome::Exhausted => Outcome::None,
                    }
                }
                Err(e @ Queue1Error::TooLarge { .. }) => Outcome::Refused(e.to_string()),
                Err(e) => return Err(RunError::Queue1(e)),
            }
        }
        Algorithm::Kernel => {
            let inner = match req.kernel.inner {
                InnerChoice::Oracle => InnerSolver::Oracle(oracle_opts),
                InnerChoice::Cutset => InnerSolver::Cutset {
                    max_states: req.max_states,
                },
            };
            match solve_via_kernel(g, req.kind, req.pages, &req.kernel.threshold, &inner) {
                Ok(run) => {
                    report.params.insert("vi".into(), json!(run.p));
                    report.params.insert("kernel_n".into(), json!(run.kernel_n));
                    report.params.insert("kernel_m".into(), json!(run.kernel_m));
                    report.params.insert("pruned".into(), json!(run.pruned));
                    report.params.insert("threshold".into(), json!(run.threshold));
                    report.params.insert("retries".into(), json!(run.retries));
                    report.params.insert("path".into(), json!(run.path));
                    match run.layout {
                        Some(l) => Outcome::Layout(l),
                        None => Outcome::None,
                    }
                }
                Err(e @ (KernelError::InnerRefused(_) | KernelError::BudgetExceeded(_))) => {
                    Outcome::Refused(e.to_string())
                }
                Err(e) => return Err(RunError::Kernel(e)),
            }
        }
    };
    report.timings.insert("solve".into(), millis(started));

    let checked = Instant::now();
    report.verdict = match outcome {
        Outcome::Layout(l) => {
            check_witness(g, req, &l)?;
            report.witness = Some(l);
            Verdict::Found
        }
        Outcome::None => Verdict::Infeasible,
        Outcome::Refused(reason) => Verdict::Refused(reason),
    };
    report.timings.insert("validate".into(), millis(checked));
    Ok(report)
}

fn check_witness(g: &Graph, req: &SolveRequest, l: &LinearLayout) -> Result<(), RunError> {
    let invalid = |msg: String| RunError::InvalidWitness {
        algorithm: req.algorithm,
        msg,
    };
    let report = validate_layout(g, l).map_err(|e| invalid(e.to_string()))?;
    if !report.is_ok() {
        return Err(invalid(format!("{} conflicting edge pairs", report.violations.len())));
    }
    if l.kind != req.kind || l.page_count > req.pages {
        return Err(invalid(format!("a {}-page {} layout was requested", req.pages, req.kind)));
    }
    if let Some(q) = req.width {
        let w = page_width(l);
        if w > q {
            return Err(invalid(format!("page width {w} exceeds the cap {q}")));
        }
    }
    Ok(())
}

fn write(path: &std::path::Path, bytes: &[u8]) -> Result<(), RunError> {
    write_atomic(path, bytes).map_err(|err| RunError::Write {
        path: path.display().to_string(),
        err,
    })
}

pub fn read_graph(path: &std::path::Path) -> Result<Graph, RunError> {
    let text = std::fs::read_to_string(path).map_err(|err| RunError::Read {
        path: path.display().to_string(),
        err,
    })?;
    parse_graph(&text).map_err(|err| RunError::Parse {
        path: path.display().to_string(),
        err,
    })
}

/// Reads the input, solves, and writes every requested output file.
pub fn run(req: &SolveRequest) -> Result<RunReport, RunError> {
    req.check()?;
    let read = Instant::now();
    let g = read_graph(&req.input)?;
    let read_ms = millis(read);
    let mut report = solve(&g, req)?;
    report.timings.insert("read".into(), read_ms);
    if let Some(path) = &req.out {
        let text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
        write(path, text.as_bytes())?;
    }
    if let (Some(path), Some(l)) = (&req.svg, &report.witness) {
        emit_svg(l, path)?;
    }
    if let (Some(path), Some(lines)) = (&req.dump_states, &report.states_dump) {
        let mut text = lines.join("\n");
        text.push('\n');
        write(path, text.as_bytes())?;
    }
    if let (Some(path), Some(v)) = (&req.dump_branch, &report.branch_dump) {
        write(path, serde_json::to_string_pretty(v).expect("json").as_bytes())?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    fn req(algorithm: Algorithm, kind: LayoutKind, pages: usize) -> SolveRequest {
        SolveRequest::new("-", algorithm, kind, pages)
    }

    #[test]
    fn oracle_finds_c4() {
        let g = generate::cycle(4).unwrap();
        let r = solve(&g, &req(Algorithm::Oracle, LayoutKind::Stack, 1)).unwrap();
        assert_eq!(r.exit_code(), 0);
        assert!(validate_layout(&g, r.witness.as_ref().unwrap()).unwrap().is_ok());
    }

    #[test]
    fn queue1_rejects_k4() {
        let r = solve(&generate::complete(4), &req(Algorithm::Queue1, LayoutKind::Queue, 1)).unwrap();
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.params["edge_bound"], "rejected");
    }

    #[test]
    fn cutset_without_width_is_infeasible() {
        let mut rq = req(Algorithm::Cutset, LayoutKind::Stack, 1);
        rq.width = Some(0);
        let r = solve(&generate::path(3), &rq).unwrap();
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn guards_refuse() {
        let g = generate::path(20);
        let r = solve(&g, &req(Algorithm::Oracle, LayoutKind::Stack, 1)).unwrap();
        assert!(matches!(r.verdict, Verdict::Refused(_)));
        assert_eq!(r.exit_code(), 2);
        let mut rq = req(Algorithm::Cutset, LayoutKind::Stack, 1);
        rq.max_states = Some(3);
        assert_eq!(solve(&g, &rq).unwrap().exit_code(), 2);
    }

    #[test]
    fn incompatible_requests() {
        let g = generate::path(3);
        for rq in [
            req(Algorithm::Queue1, LayoutKind::Stack, 1),
            req(Algorithm::Queue1, LayoutKind::Queue, 2),
            req(Algorithm::Oracle, LayoutKind::Stack, 0),
        ] {
            let err = solve(&g, &rq).unwrap_err();
            assert!(matches!(err, RunError::InvalidRequest(_)));
            assert_eq!(err.exit_code(), 3);
        }
    }

    #[test]
    fn same_witness_for_any_worker_count() {
        let g = generate::random_connected(9, 14, 3).unwrap();
        for algorithm in [Algorithm::Oracle, Algorithm::Queue1] {
            let (kind, pages) = match algorithm {
                Algorithm::Queue1 => (LayoutKind::Queue, 1),
                _ => (LayoutKind::Stack, 2),
            };
            let witnesses: Vec<_> = [1, 2, 4]
                .into_iter()
                .map(|t| {
                    let mut rq = req(algorithm, kind, pages);
                    rq.threads = Some(t);
                    solve(&g, &rq).unwrap().witness
                })
                .collect();
            assert!(witnesses.windows(2).all(|w| w[0] == w[1]), "{algorithm}");
        }
    }
}
