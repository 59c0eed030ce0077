//! Linear layouts, their validation, page width and a-priori bounds.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, Graph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutKind {
    Stack,
    Queue,
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayoutKind::Stack => "stack",
            LayoutKind::Queue => "queue",
        })
    }
}

impl FromStr for LayoutKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "stack" => Ok(LayoutKind::Stack),
            "queue" => Ok(LayoutKind::Queue),
            other => Err(format!("unknown layout kind `{other}` (expected stack or queue)")),
        }
    }
}

impl LayoutKind {
    /// Whether two edges given by spine positions `(a, b)` and `(c, d)`,
    /// with `a < b` and `c < d`, may not share a page.
    pub fn conflicts(self, (a, b): (usize, usize), (c, d): (usize, usize)) -> bool {
        let ((a, b), (c, d)) = if a <= c { ((a, b), (c, d)) } else { ((c, d), (a, b)) };
        match self {
            LayoutKind::Stack => a < c && c < b && b < d,
            LayoutKind::Queue => a < c && d < b,
        }
    }
}

/// Unordered edge key with the lexicographically smaller name first.
pub type EdgeKey = (String, String);

pub fn edge_key(a: &str, b: &str) -> EdgeKey {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// A spine order plus a page for every edge. Pages are numbered from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearLayout {
    pub kind: LayoutKind,
    pub page_count: usize,
    pub spine: Vec<String>,
    pub pages: BTreeMap<EdgeKey, usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("layout mentions unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("layout assigns a page to `{0} {1}`, which is not an edge of the graph")]
    UnknownEdge(String, String),
    #[error("vertex `{0}` appears more than once on the spine")]
    RepeatedVertex(String),
    #[error("vertex `{0}` is missing from the spine")]
    MissingVertex(String),
    #[error("edge `{0} {1}` has no page")]
    MissingEdge(String, String),
    #[error("edge `{0} {1}` is on page {2}, but the layout has {3} page(s)")]
    PageOutOfRange(String, String, usize, usize),
    #[error("page count must be at least 1")]
    NoPages,
}

/// Vertex order and per-edge pages expressed in graph indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedLayout {
    pub order: Vec<VertexId>,
    /// Spine position of every vertex.
    pub pos: Vec<usize>,
    /// Page of every edge, indexed by edge id.
    pub page: Vec<usize>,
}

impl IndexedLayout {
    pub fn new(order: Vec<VertexId>, page: Vec<usize>) -> Self {
        let mut pos = vec![0; order.len()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        IndexedLayout { order, pos, page }
    }

    /// Spine positions of edge `e`'s endpoints, left one first.
    pub fn span(&self, g: &Graph, e: EdgeId) -> (usize, usize) {
        let (u, v) = g.edge(e);
        let (a, b) = (self.pos[u], self.pos[v]);
        (a.min(b), a.max(b))
    }

    pub fn to_layout(&self, g: &Graph, kind: LayoutKind, page_count: usize) -> LinearLayout {
        let spine = self.order.iter().map(|&v| g.name(v).to_string()).collect();
        let pages = (0..g.m())
            .map(|e| {
                let (a, b) = g.edge_names(e);
                (edge_key(a, b), self.page[e])
            })
            .collect();
        LinearLayout {
            kind,
            page_count,
            spine,
            pages,
        }
    }
}

impl LinearLayout {
    /// Checks that the layout is defined over exactly the vertices and edges
    /// of `g` and converts it to index form.
    pub fn to_indexed(&self, g: &Graph) -> Result<IndexedLayout, LayoutError> {
        if self.page_count == 0 {
            return Err(LayoutError::NoPages);
        }
        let mut seen = vec![false; g.n()];
        let mut order = Vec::with_capacity(g.n());
        for name in &self.spine {
            let v = g
                .vertex(name)
                .ok_or_else(|| LayoutError::UnknownVertex(name.clone()))?;
            if seen[v] {
                return Err(LayoutError::RepeatedVertex(name.clone()));
            }
            seen[v] = true;
            order.push(v);
        }
        if let Some(v) = seen.iter().position(|&s| !s) {
            return Err(LayoutError::MissingVertex(g.name(v).to_string()));
        }
        let mut page = vec![usize::MAX; g.m()];
        for ((a, b), &p) in &self.pages {
            let e = match (g.vertex(a), g.vertex(b)) {
                (Some(u), Some(v)) => g.edge_id(u, v),
                (None, _) => return Err(LayoutError::UnknownVertex(a.clone())),
                (_, None) => return Err(LayoutError::UnknownVertex(b.clone())),
            }
            .ok_or_else(|| LayoutError::UnknownEdge(a.clone(), b.clone()))?;
            if p >= self.page_count {
                return Err(LayoutError::PageOutOfRange(
                    a.clone(),
                    b.clone(),
                    p,
                    self.page_count,
                ));
            }
            page[e] = p;
        }
        if let Some(e) = page.iter().position(|&p| p == usize::MAX) {
            let (a, b) = g.edge_names(e);
            return Err(LayoutError::MissingEdge(a.to_string(), b.to_string()));
        }
        Ok(IndexedLayout::new(order, page))
    }

    pub fn position_map(&self) -> HashMap<&str, usize> {
        self.spine
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect()
    }

    /// Positions of the edges' endpoints; edges naming vertices that are not
    /// on the spine are skipped.
    fn spans(&self) -> Vec<(usize, usize, usize)> {
        let pos = self.position_map();
        self.pages
            .iter()
            .filter_map(|((a, b), &p)| {
                let (x, y) = (*pos.get(a.as_str())?, *pos.get(b.as_str())?);
                Some((x.min(y), x.max(y), p))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    /// Every conflicting same-page pair, each pair and the list sorted by
    /// canonical edge order.
    pub violations: Vec<(EdgeKey, EdgeKey)>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Conflicting same-page edge pairs `(e, f)` with `e < f` in edge-id order.
pub fn indexed_conflicts(g: &Graph, kind: LayoutKind, lay: &IndexedLayout) -> Vec<(EdgeId, EdgeId)> {
    let pages = lay.page.iter().copied().max().map_or(0, |p| p + 1);
    // Per page, edges sorted by left endpoint. A partner of edge (a, b) that
    // conflicts with it and starts later must start strictly inside (a, b).
    let mut by_left: Vec<Vec<(usize, usize, EdgeId)>> = vec![Vec::new(); pages];
    for e in 0..g.m() {
        let (a, b) = lay.span(g, e);
        by_left[lay.page[e]].push((a, b, e));
    }
    let mut out = Vec::new();
    for list in &mut by_left {
        list.sort_unstable();
        for (i, &(a, b, e)) in list.iter().enumerate() {
            let start = i + list[i..].partition_point(|&(c, _, _)| c <= a);
            for &(c, d, f) in &list[start..] {
                if c >= b {
                    break;
                }
                let bad = match kind {
                    LayoutKind::Stack => d > b,
                    LayoutKind::Queue => d < b,
                };
                if bad {
                    out.push((e.min(f), e.max(f)));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn validate_layout(g: &Graph, layout: &LinearLayout) -> Result<ValidationReport, LayoutError> {
    let lay = layout.to_indexed(g)?;
    let violations = indexed_conflicts(g, layout.kind, &lay)
        .into_iter()
        .map(|(e, f)| {
            let (a, b) = g.edge_names(e);
            let (c, d) = g.edge_names(f);
            (edge_key(a, b), edge_key(c, d))
        })
        .collect();
    Ok(ValidationReport { violations })
}

/// Per page, the number of its edges spanning each gap of the spine; entry
/// `[p][i]` counts edges of page `p` with one endpoint at position `<= i`
/// and the other `> i`.
pub fn page_gap_counts(n: usize, spans: impl IntoIterator<Item = (usize, usize, usize)>) -> Vec<Vec<usize>> {
    let mut diff: Vec<Vec<i64>> = Vec::new();
    for (a, b, p) in spans {
        if diff.len() <= p {
            diff.resize(p + 1, vec![0; n + 1]);
        }
        diff[p][a] += 1;
        diff[p][b] -= 1;
    }
    diff.into_iter()
        .map(|d| {
            let mut acc = 0i64;
            d.iter()
                .take(n)
                .map(|x| {
                    acc += x;
                    acc as usize
                })
                .collect()
        })
        .collect()
}

/// Maximum number of same-page edges spanning any gap of the spine.
pub fn page_width(layout: &LinearLayout) -> usize {
    page_gap_counts(layout.spine.len(), layout.spans())
        .iter()
        .flat_map(|c| c.iter().copied())
        .max()
        .unwrap_or(0)
}

pub fn indexed_page_width(g: &Graph, lay: &IndexedLayout) -> usize {
    let spans = (0..g.m()).map(|e| {
        let (a, b) = lay.span(g, e);
        (a, b, lay.page[e])
    });
    page_gap_counts(g.n(), spans)
        .iter()
        .flat_map(|c| c.iter().copied())
        .max()
        .unwrap_or(0)
}

/// Edges with one endpoint at or left of `v` and the other right of `v`.
pub fn spanning_edges(layout: &LinearLayout, v: &str) -> Result<BTreeSet<EdgeKey>, LayoutError> {
    let pos = layout.position_map();
    let at = *pos
        .get(v)
        .ok_or_else(|| LayoutError::UnknownVertex(v.to_string()))?;
    Ok(layout
        .pages
        .keys()
        .filter(|(a, b)| match (pos.get(a.as_str()), pos.get(b.as_str())) {
            (Some(&x), Some(&y)) => x.min(y) <= at && at < x.max(y),
            _ => false,
        })
        .cloned()
        .collect())
}

/// Index form of [`spanning_edges`]: edges crossing the gap after position `i`.
pub fn indexed_spanning_edges(g: &Graph, lay: &IndexedLayout, i: usize) -> Vec<EdgeId> {
    (0..g.m())
        .filter(|&e| {
            let (a, b) = lay.span(g, e);
            a <= i && i < b
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVerdict {
    Possible,
    Rejected,
}

/// The largest edge count an `pages`-page layout of the given kind can have
/// on `n` vertices, where the classical bound applies.
pub fn max_edges(n: usize, kind: LayoutKind, pages: usize) -> Option<usize> {
    let (n, l) = (n as i64, pages as i64);
    let bound = match kind {
        // Each page is outerplanar together with the spine.
        LayoutKind::Stack if n >= 3 => (l + 1) * n - 3 * l,
        LayoutKind::Queue if n >= 2 * l => 2 * l * n - l * (2 * l + 1),
        _ => return None,
    };
    Some(bound.max(0) as usize)
}

pub fn edge_count_bound(g: &Graph, kind: LayoutKind, pages: usize) -> BoundVerdict {
    match max_edges(g.n(), kind, pages) {
        Some(b) if g.m() > b => BoundVerdict::Rejected,
        _ => BoundVerdict::Possible,
    }
}

/// A page count that always suffices for a graph of vertex integrity `vi`.
pub fn page_upper_bound(kind: LayoutKind, vi: usize) -> usize {
    match kind {
        LayoutKind::Stack => vi + 1,
        LayoutKind::Queue => 1usize
            .checked_shl(vi as u32)
            .map_or(usize::MAX, |x| x.saturating_add(1)),
    }
}

/// Runs `solve` on every connected component and concatenates the spines.
/// Returns `None` as soon as one component has no layout.
pub fn solve_per_component<E>(
    g: &Graph,
    kind: LayoutKind,
    page_count: usize,
    mut solve: impl FnMut(&Graph) -> Result<Option<LinearLayout>, E>,
) -> Result<Option<LinearLayout>, E> {
    let mut out = LinearLayout {
        kind,
        page_count,
        spine: Vec::with_capacity(g.n()),
        pages: BTreeMap::new(),
    };
    for comp in g.components() {
        let sub = g.induced_subgraph(&comp);
        match solve(&sub)? {
            Some(lay) => {
                out.spine.extend(lay.spine);
                out.pages.extend(lay.pages);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(kind: LayoutKind, pages: usize, spine: &[&str], edges: &[(&str, &str, usize)]) -> LinearLayout {
        LinearLayout {
            kind,
            page_count: pages,
            spine: spine.iter().map(|s| s.to_string()).collect(),
            pages: edges.iter().map(|&(a, b, p)| (edge_key(a, b), p)).collect(),
        }
    }

    #[test]
    fn path_is_a_stack_page() {
        let g = Graph::from_edges([("a", "b"), ("b", "c")]).unwrap();
        let l = layout(LayoutKind::Stack, 1, &["a", "b", "c"], &[("a", "b", 0), ("b", "c", 0)]);
        assert!(validate_layout(&g, &l).unwrap().is_ok());
        assert_eq!(spanning_edges(&l, "b").unwrap(), BTreeSet::from([edge_key("b", "c")]));
        assert_eq!(spanning_edges(&l, "a").unwrap(), BTreeSet::from([edge_key("a", "b")]));
        assert!(spanning_edges(&l, "c").unwrap().is_empty());
        assert_eq!(page_width(&l), 1);
    }

    #[test]
    fn four_cycle_nests_on_one_queue_page() {
        let g = Graph::from_edges([("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")]).unwrap();
        let l = layout(
            LayoutKind::Queue,
            1,
            &["a", "b", "c", "d"],
            &[("a", "b", 0), ("b", "c", 0), ("c", "d", 0), ("a", "d", 0)],
        );
        let report = validate_layout(&g, &l).unwrap();
        assert_eq!(report.violations, vec![(edge_key("a", "d"), edge_key("b", "c"))]);
    }

    #[test]
    fn domain_errors_are_not_violations() {
        let g = Graph::from_edges([("a", "b")]).unwrap();
        let l = layout(LayoutKind::Stack, 1, &["a", "x"], &[("a", "b", 0)]);
        assert_eq!(validate_layout(&g, &l), Err(LayoutError::UnknownVertex("x".into())));
        let l = layout(LayoutKind::Stack, 1, &["a", "b"], &[]);
        assert!(matches!(validate_layout(&g, &l), Err(LayoutError::MissingEdge(..))));
        let l = layout(LayoutKind::Stack, 1, &["a", "b"], &[("a", "b", 1)]);
        assert!(matches!(validate_layout(&g, &l), Err(LayoutError::PageOutOfRange(..))));
        let l = layout(LayoutKind::Stack, 1, &["a", "b", "a"], &[("a", "b", 0)]);
        assert!(matches!(validate_layout(&g, &l), Err(LayoutError::RepeatedVertex(_))));
    }

    #[test]
    fn edge_bounds() {
        let k5 = Graph::from_edges(
            (0..5).flat_map(|i| (i + 1..5).map(move |j| (format!("v{i}"), format!("v{j}")))),
        )
        .unwrap();
        assert_eq!(max_edges(5, LayoutKind::Stack, 1), Some(7));
        assert_eq!(edge_count_bound(&k5, LayoutKind::Stack, 1), BoundVerdict::Rejected);
        assert_eq!(max_edges(4, LayoutKind::Queue, 1), Some(5));
        let empty = Graph::new(Vec::<&str>::new(), Vec::<(&str, &str)>::new()).unwrap();
        assert_eq!(edge_count_bound(&empty, LayoutKind::Queue, 3), BoundVerdict::Possible);
    }

    #[test]
    fn page_caps() {
        assert_eq!(page_upper_bound(LayoutKind::Stack, 1), 2);
        assert_eq!(page_upper_bound(LayoutKind::Queue, 3), 9);
        assert_eq!(page_upper_bound(LayoutKind::Stack, 2), 3);
    }

    #[test]
    fn edgeless_width_is_zero() {
        let l = layout(LayoutKind::Stack, 1, &["a", "b"], &[]);
        assert_eq!(page_width(&l), 0);
    }
}
