//! Text format for graphs and JSON format for layouts.
//!
//! Graph files start with a header `n m` followed by one `u v` line per
//! edge. A line `v name` declares a vertex, which is how isolated vertices
//! are written. `#` starts a comment.
//!
//! Layout JSON numbers pages from 1:
//! `{"kind":"stack","pages":2,"spine":["a","b"],"assignment":{"a b":1}}`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::layout::{edge_key, LayoutKind, LinearLayout};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
    #[error("missing `n m` header")]
    MissingHeader,
    #[error("header declares {declared} {what}, found {found}")]
    CountMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },
}

fn malformed(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Malformed {
        line,
        msg: msg.into(),
    }
}

pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut vertices: BTreeSet<String> = BTreeSet::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut seen: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if header.is_none() {
            let [n, m] = tokens[..] else {
                return Err(malformed(line, "expected header `n m`"));
            };
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| malformed(line, format!("`{s}` is not a non-negative integer")))
            };
            header = Some((parse(n)?, parse(m)?));
            continue;
        }
        let [a, b] = tokens[..] else {
            return Err(malformed(line, format!("expected two tokens, found {}", tokens.len())));
        };
        if a == "v" {
            vertices.insert(b.to_string());
            continue;
        }
        if a == b {
            return Err(ParseError::Graph {
                line,
                source: GraphError::SelfLoop(a.to_string()),
            });
        }
        let key = edge_key(a, b);
        if let Some(first) = seen.insert(key.clone(), line) {
            return Err(malformed(
                line,
                format!("duplicate edge `{a} {b}` (first given on line {first})"),
            ));
        }
        vertices.insert(a.to_string());
        vertices.insert(b.to_string());
        edges.push(key);
    }
    let (n, m) = header.ok_or(ParseError::MissingHeader)?;
    if vertices.len() != n {
        return Err(ParseError::CountMismatch {
            what: "vertices",
            declared: n,
            found: vertices.len(),
        });
    }
    if edges.len() != m {
        return Err(ParseError::CountMismatch {
            what: "edges",
            declared: m,
            found: edges.len(),
        });
    }
    Graph::new(&vertices, edges.iter().map(|(a, b)| (a, b))).map_err(|source| ParseError::Graph {
        line: 0,
        source,
    })
}

pub fn serialize_graph(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for v in 0..g.n() {
        if g.degree(v) == 0 {
            out.push_str(&format!("v {}\n", g.name(v)));
        }
    }
    for e in 0..g.m() {
        let (a, b) = g.edge_names(e);
        // A leading `v` token would read as a vertex declaration.
        let (a, b) = if a == "v" { (b, a) } else { (a, b) };
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct LayoutJson {
    kind: LayoutKind,
    pages: usize,
    spine: Vec<String>,
    assignment: BTreeMap<String, usize>,
}

#[derive(Debug, Error)]
pub enum LayoutJsonError {
    #[error("invalid layout JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("assignment key `{0}` must be two vertex names separated by a space")]
    BadKey(String),
    #[error("edge `{0}` is on page 0; pages are numbered from 1")]
    ZeroPage(String),
    #[error("edge `{0}` is assigned twice")]
    DuplicateEdge(String),
}

pub fn layout_to_json_value(layout: &LinearLayout) -> serde_json::Value {
    let json = LayoutJson {
        kind: layout.kind,
        pages: layout.page_count,
        spine: layout.spine.clone(),
        assignment: layout
            .pages
            .iter()
            .map(|((a, b), &p)| (format!("{a} {b}"), p + 1))
            .collect(),
    };
    serde_json::to_value(json).expect("layout serializes")
}

pub fn layout_to_json(layout: &LinearLayout) -> String {
    serde_json::to_string_pretty(&layout_to_json_value(layout)).expect("layout serializes")
}

pub fn layout_from_json(text: &str) -> Result<LinearLayout, LayoutJsonError> {
    let json: LayoutJson = serde_json::from_str(text)?;
    let mut pages = BTreeMap::new();
    for (key, p) in json.assignment {
        let [a, b] = key.split_whitespace().collect::<Vec<_>>()[..] else {
            return Err(LayoutJsonError::BadKey(key));
        };
        if p == 0 {
            return Err(LayoutJsonError::ZeroPage(key));
        }
        if pages.insert(edge_key(a, b), p - 1).is_some() {
            return Err(LayoutJsonError::DuplicateEdge(key));
        }
    }
    Ok(LinearLayout {
        kind: json.kind,
        page_count: json.pages,
        spine: json.spine,
        pages,
    })
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
