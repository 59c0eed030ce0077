//! Bounded-width layouts via a state graph over oriented cut-sets.
//!
//! For a layout and a vertex `v`, the edges spanning the gap right of `v`
//! form a cut-set. Recording these edges together with the order of their
//! endpoints and their pages is enough to glue a left part of a layout to a
//! right part, which gives a state graph of size `n^O(q*l)` whose
//! start-to-end paths are exactly the layouts.

mod search;

use std::collections::{BTreeSet, HashMap, VecDeque};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph::{is_cut_set, EdgeId, Graph, VertexId};
use crate::layout::LayoutKind;

pub use search::{solve_bounded_width, solve_bounded_width_with, solve_components, CutsetOutcome, CutsetResult, SearchOptions, SearchStats};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CutsetError {
    #[error("graph must be connected; split it into components first")]
    NotConnected,
    #[error("edge set is not a cut-set of the graph")]
    NotCutSet,
    #[error("endpoint order must list every endpoint of the cut-set exactly once")]
    BadOrder,
    #[error("oriented cut-set is not nicely oriented")]
    NotNicelyOriented,
    #[error("page count must be at least 1")]
    NoPages,
    #[error("state limit of {0} exceeded")]
    StateLimit(usize),
}

/// A cut-set with a total order on its endpoints. The constructor accepts
/// an order over any superset of the endpoints and keeps only the
/// endpoints, so equality compares exactly the restriction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrientedCutSet {
    /// Sorted edge ids.
    pub edges: Vec<EdgeId>,
    pub order: Vec<VertexId>,
}

impl OrientedCutSet {
    pub fn new(g: &Graph, edges: impl IntoIterator<Item = EdgeId>, order: impl IntoIterator<Item = VertexId>) -> Self {
        let edges: Vec<EdgeId> = edges.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let ends = endpoints(g, &edges);
        let order = order.into_iter().filter(|v| ends.contains(v)).collect();
        OrientedCutSet { edges, order }
    }

    pub fn endpoints(&self, g: &Graph) -> BTreeSet<VertexId> {
        endpoints(g, &self.edges)
    }
}

fn endpoints(g: &Graph, edges: &[EdgeId]) -> BTreeSet<VertexId> {
    edges
        .iter()
        .flat_map(|&e| {
            let (u, v) = g.edge(e);
            [u, v]
        })
        .collect()
}

/// A node of the state graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateNode {
    /// Nothing placed yet.
    Start,
    /// Everything placed.
    End,
    /// An oriented cut-set with one page per cut edge, aligned with
    /// `cut.edges`.
    Cut { cut: OrientedCutSet, pages: Vec<usize> },
}

impl StateNode {
    pub fn cut(g: &Graph, edges: &[EdgeId], order: &[VertexId], pages: &[usize]) -> StateNode {
        let mut pairs: Vec<(EdgeId, usize)> = edges.iter().copied().zip(pages.iter().copied()).collect();
        pairs.sort_unstable();
        let cut = OrientedCutSet::new(g, pairs.iter().map(|p| p.0), order.iter().copied());
        StateNode::Cut {
            cut,
            pages: pairs.iter().map(|p| p.1).collect(),
        }
    }
}

/// One line per state: `a b,c d;a c b d;1,2` lists the cut edges, the
/// endpoint order and the (1-based) pages. Sentinels print as `START` and
/// `END`.
pub fn format_state(g: &Graph, s: &StateNode) -> String {
    match s {
        StateNode::Start => "START".into(),
        StateNode::End => "END".into(),
        StateNode::Cut { cut, pages } => {
            let edges = cut
                .edges
                .iter()
                .map(|&e| {
                    let (a, b) = g.edge_names(e);
                    format!("{a} {b}")
                })
                .join(",");
            let order = cut.order.iter().map(|&v| g.name(v)).join(" ");
            let pages = pages.iter().map(|p| (p + 1).to_string()).join(",");
            format!("{edges};{order};{pages}")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Source,
    Sink,
}

/// Source/sink role of each endpoint under the order, or `None` if some
/// vertex is both.
fn roles(g: &Graph, edges: &[EdgeId], pos: &HashMap<VertexId, usize>) -> Option<HashMap<VertexId, Role>> {
    let mut out: HashMap<VertexId, Role> = HashMap::new();
    for &e in edges {
        let (u, v) = g.edge(e);
        let (s, t) = if pos[&u] < pos[&v] { (u, v) } else { (v, u) };
        for (x, r) in [(s, Role::Source), (t, Role::Sink)] {
            if *out.entry(x).or_insert(r) != r {
                return None;
            }
        }
    }
    Some(out)
}

fn checked_order(g: &Graph, cut: &OrientedCutSet) -> Result<(Vec<VertexId>, HashMap<VertexId, usize>), CutsetError> {
    let ends = cut.endpoints(g);
    let order = cut.order.clone();
    let pos: HashMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    if pos.len() != order.len() || order.len() != ends.len() {
        return Err(CutsetError::BadOrder);
    }
    Ok((order, pos))
}

/// Definition check: every endpoint is a pure source or sink, every
/// component of `G - F` holds only sources or only sinks, and all sources
/// precede all sinks.
pub fn is_nicely_oriented(g: &Graph, cut: &OrientedCutSet) -> Result<bool, CutsetError> {
    if !g.is_connected() {
        return Err(CutsetError::NotConnected);
    }
    if !is_cut_set(g, &cut.edges) {
        return Err(CutsetError::NotCutSet);
    }
    let (order, pos) = checked_order(g, cut)?;
    let Some(role) = roles(g, &cut.edges, &pos) else {
        return Ok(false);
    };
    for comp in g.components_avoiding(&vec![false; g.n()], &cut.edges) {
        let kinds: BTreeSet<_> = comp.iter().filter_map(|v| role.get(v)).map(|&r| r == Role::Source).collect();
        if kinds.len() > 1 {
            return Ok(false);
        }
    }
    let first_sink = order.iter().position(|v| role[v] == Role::Sink).unwrap_or(order.len());
    Ok(order[first_sink..].iter().all(|v| role[v] == Role::Sink))
}

/// Breadth-first order of the vertices of `comp` reachable from its
/// minimum without using cut edges.
fn bfs_order(g: &Graph, comp: &[VertexId], cut: &BTreeSet<EdgeId>) -> Vec<VertexId> {
    let Some(&start) = comp.iter().min() else {
        return vec![];
    };
    let mut seen = BTreeSet::from([start]);
    let mut out = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if !cut.contains(&g.edge_id(u, w).unwrap()) && seen.insert(w) {
                out.push(w);
                queue.push_back(w);
            }
        }
    }
    out
}

struct Sides {
    order: Vec<VertexId>,
    role: HashMap<VertexId, Role>,
    source_comps: Vec<Vec<VertexId>>,
    sink_comps: Vec<Vec<VertexId>>,
    cut: BTreeSet<EdgeId>,
}

fn sides(g: &Graph, cut: &OrientedCutSet) -> Result<Sides, CutsetError> {
    if !is_nicely_oriented(g, cut)? {
        return Err(CutsetError::NotNicelyOriented);
    }
    let (order, pos) = checked_order(g, cut)?;
    let role = roles(g, &cut.edges, &pos).expect("nicely oriented");
    let (mut source_comps, mut sink_comps) = (Vec::new(), Vec::new());
    for comp in g.components_avoiding(&vec![false; g.n()], &cut.edges) {
        let is_source = comp.iter().any(|v| role.get(v) == Some(&Role::Source));
        if is_source {
            source_comps.push(comp);
        } else {
            sink_comps.push(comp);
        }
    }
    Ok(Sides {
        order,
        role,
        source_comps,
        sink_comps,
        cut: cut.edges.iter().copied().collect(),
    })
}

/// A spine order inducing the oriented cut-set, and the witness vertex
/// (the rightmost source) whose spanning edges are exactly the cut-set.
///
/// Source components come first, ordered by their minimum vertex, each
/// listing its non-endpoint vertices in breadth-first order; then the
/// endpoints in the given order; then the sink components likewise.
pub fn induce_order(g: &Graph, cut: &OrientedCutSet) -> Result<(Vec<VertexId>, VertexId), CutsetError> {
    let s = sides(g, cut)?;
    let inner = |comps: &[Vec<VertexId>]| -> Vec<VertexId> {
        comps
            .iter()
            .flat_map(|c| bfs_order(g, c, &s.cut))
            .filter(|v| !s.role.contains_key(v))
            .collect()
    };
    Ok(assemble(&s, inner(&s.source_comps), inner(&s.sink_comps)))
}

/// Like [`induce_order`] but with component order and the order inside
/// each component shuffled.
pub fn induce_order_shuffled<R: Rng>(
    g: &Graph,
    cut: &OrientedCutSet,
    rng: &mut R,
) -> Result<(Vec<VertexId>, VertexId), CutsetError> {
    let s = sides(g, cut)?;
    let mut inner = |comps: &[Vec<VertexId>]| -> Vec<VertexId> {
        let mut comps: Vec<Vec<VertexId>> = comps
            .iter()
            .map(|c| c.iter().copied().filter(|v| !s.role.contains_key(v)).collect())
            .collect();
        comps.shuffle(rng);
        for c in &mut comps {
            c.shuffle(rng);
        }
        comps.concat()
    };
    let left = inner(&s.source_comps);
    let right = inner(&s.sink_comps);
    Ok(assemble(&s, left, right))
}

fn assemble(s: &Sides, left: Vec<VertexId>, right: Vec<VertexId>) -> (Vec<VertexId>, VertexId) {
    let witness = *s
        .order
        .iter()
        .rev()
        .find(|v| s.role[v] == Role::Source)
        .expect("a nonempty cut-set has a source");
    let mut order = left;
    order.extend(&s.order);
    order.extend(right);
    (order, witness)
}

/// The vertices up to and including the witness of [`induce_order`].
pub fn left_side(g: &Graph, cut: &OrientedCutSet) -> Result<BTreeSet<VertexId>, CutsetError> {
    let (order, witness) = induce_order(g, cut)?;
    let at = order.iter().position(|&v| v == witness).unwrap();
    Ok(order[..=at].iter().copied().collect())
}

/// Processed vertices of a state.
pub fn processed(g: &Graph, s: &StateNode) -> Result<BTreeSet<VertexId>, CutsetError> {
    match s {
        StateNode::Start => Ok(BTreeSet::new()),
        StateNode::End => Ok((0..g.n()).collect()),
        StateNode::Cut { cut, .. } => left_side(g, cut),
    }
}

/// Whether the cut edges, drawn with the given endpoint order and pages,
/// form a valid layout of width at most `q` (all cut edges span the gap
/// between the last source and the first sink).
pub(crate) fn local_layout_ok(
    g: &Graph,
    edges: &[EdgeId],
    pos: &HashMap<VertexId, usize>,
    pages: &[usize],
    kind: LayoutKind,
    page_count: usize,
    q: usize,
) -> bool {
    let mut load = vec![0usize; page_count];
    for &p in pages {
        if p >= page_count {
            return false;
        }
        load[p] += 1;
        if load[p] > q {
            return false;
        }
    }
    let span = |e: EdgeId| {
        let (u, v) = g.edge(e);
        (pos[&u].min(pos[&v]), pos[&u].max(pos[&v]))
    };
    (0..edges.len()).all(|i| {
        (i + 1..edges.len()).all(|j| pages[i] != pages[j] || !kind.conflicts(span(edges[i]), span(edges[j])))
    })
}

fn parts(s: &StateNode) -> (&[EdgeId], &[VertexId], &[usize]) {
    match s {
        StateNode::Cut { cut, pages } => (&cut.edges, &cut.order, pages),
        _ => (&[], &[], &[]),
    }
}

/// Returns the vertex moved from the unprocessed to the processed side if
/// there is an arc from `sx` to `sy`: the cut-sets differ exactly by that
/// vertex's edges, shared edges keep their relative order and pages, the
/// vertex is the leftmost sink before and the rightmost source after, and
/// both cut-sets are valid `page_count`-page width-`q` layouts on their own.
pub fn arc_exists(
    g: &Graph,
    sx: &StateNode,
    sy: &StateNode,
    page_count: usize,
    q: usize,
    kind: LayoutKind,
) -> Option<VertexId> {
    let px = processed(g, sx).ok()?;
    let py = processed(g, sy).ok()?;
    let (fx, ox, sgx) = parts(sx);
    let (fy, oy, sgy) = parts(sy);
    let fx_set: BTreeSet<EdgeId> = fx.iter().copied().collect();
    let fy_set: BTreeSet<EdgeId> = fy.iter().copied().collect();
    let lambda = (0..g.n()).filter(|v| !px.contains(v)).find(|&v| {
        let mut expect: BTreeSet<EdgeId> = fx_set
            .iter()
            .copied()
            .filter(|&e| {
                let (a, b) = g.edge(e);
                !(a == v && px.contains(&b) || b == v && px.contains(&a))
            })
            .collect();
        for &w in g.neighbors(v) {
            if !px.contains(&w) {
                expect.insert(g.edge_id(v, w).unwrap());
            }
        }
        expect == fy_set
    })?;
    let mut moved = px.clone();
    moved.insert(lambda);
    if moved != py {
        return None;
    }

    // Shared edges: same pages, same relative endpoint order.
    let page_x: HashMap<EdgeId, usize> = fx.iter().copied().zip(sgx.iter().copied()).collect();
    let page_y: HashMap<EdgeId, usize> = fy.iter().copied().zip(sgy.iter().copied()).collect();
    let shared: Vec<EdgeId> = fx_set.intersection(&fy_set).copied().collect();
    if shared.iter().any(|e| page_x[e] != page_y[e]) {
        return None;
    }
    let shared_ends = endpoints(g, &shared);
    let rx: Vec<_> = ox.iter().filter(|v| shared_ends.contains(v)).collect();
    let ry: Vec<_> = oy.iter().filter(|v| shared_ends.contains(v)).collect();
    if rx != ry {
        return None;
    }

    let pos_x: HashMap<VertexId, usize> = ox.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let pos_y: HashMap<VertexId, usize> = oy.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    if pos_x.contains_key(&lambda) {
        let first_sink = ox.iter().find(|v| !px.contains(v));
        if first_sink != Some(&lambda) {
            return None;
        }
    }
    if pos_y.contains_key(&lambda) {
        let last_source = oy.iter().rev().find(|v| py.contains(v));
        if last_source != Some(&lambda) {
            return None;
        }
    }
    let ok = |f: &[EdgeId], pos: &HashMap<VertexId, usize>, pages: &[usize]| {
        local_layout_ok(g, f, pos, pages, kind, page_count, q)
    };
    (ok(fx, &pos_x, sgx) && ok(fy, &pos_y, sgy)).then_some(lambda)
}

/// Orientations of a cut-set that are nicely oriented, as endpoint orders.
fn nice_orders(g: &Graph, edges: &[EdgeId]) -> Vec<Vec<VertexId>> {
    let comps = g.components_avoiding(&vec![false; g.n()], edges);
    let mut comp_of = vec![0; g.n()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    // Two-color the quotient graph; each of its connected pieces may be
    // flipped independently.
    let mut adj = vec![Vec::new(); comps.len()];
    for &e in edges {
        let (u, v) = g.edge(e);
        adj[comp_of[u]].push(comp_of[v]);
        adj[comp_of[v]].push(comp_of[u]);
    }
    let mut color = vec![usize::MAX; comps.len()];
    let mut piece = vec![0; comps.len()];
    let mut pieces = 0;
    for s in 0..comps.len() {
        if color[s] != usize::MAX || adj[s].is_empty() {
            continue;
        }
        color[s] = 0;
        piece[s] = pieces;
        let mut queue = VecDeque::from([s]);
        while let Some(c) = queue.pop_front() {
            for &d in &adj[c] {
                if color[d] == usize::MAX {
                    color[d] = 1 - color[c];
                    piece[d] = pieces;
                    queue.push_back(d);
                }
            }
        }
        pieces += 1;
    }
    let ends = endpoints(g, edges);
    let mut out = Vec::new();
    for flips in 0..1u64 << pieces {
        let is_source = |v: VertexId| {
            let c = comp_of[v];
            (color[c] as u64 ^ (flips >> piece[c] & 1)) == 0
        };
        let sources: Vec<VertexId> = ends.iter().copied().filter(|&v| is_source(v)).collect();
        let sinks: Vec<VertexId> = ends.iter().copied().filter(|&v| !is_source(v)).collect();
        for ps in sources.iter().copied().permutations(sources.len()) {
            for pt in sinks.iter().copied().permutations(sinks.len()) {
                let mut order = ps.clone();
                order.extend(pt);
                out.push(order);
            }
        }
    }
    out
}

/// All consistent states with `1 <= |F| <= q * page_count`, plus the two
/// sentinels. With `kind` given, states whose cut edges alone are not a
/// valid layout of that kind are skipped as well.
pub fn enumerate_states<'a>(
    g: &'a Graph,
    page_count: usize,
    q: usize,
    kind: Option<LayoutKind>,
) -> Result<impl Iterator<Item = StateNode> + 'a, CutsetError> {
    if !g.is_connected() {
        return Err(CutsetError::NotConnected);
    }
    let max = (q * page_count).min(g.m());
    let cuts = (1..=max)
        .flat_map(move |k| (0..g.m()).combinations(k))
        .filter(move |f| is_cut_set(g, f));
    let states = cuts.flat_map(move |f| {
        let mut out = Vec::new();
        for order in nice_orders(g, &f) {
            let pos: HashMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            for pages in (0..f.len()).map(|_| 0..page_count).multi_cartesian_product() {
                let local = match kind {
                    Some(kind) => local_layout_ok(g, &f, &pos, &pages, kind, page_count, q),
                    None => {
                        let mut load = vec![0; page_count];
                        pages.iter().all(|&p| {
                            load[p] += 1;
                            load[p] <= q
                        })
                    }
                };
                if local {
                    out.push(StateNode::Cut {
                        cut: OrientedCutSet::new(g, f.iter().copied(), order.iter().copied()),
                        pages,
                    });
                }
            }
        }
        out
    });
    Ok([StateNode::Start, StateNode::End].into_iter().chain(states))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[(&str, &str)]) -> Graph {
        Graph::from_edges(edges.iter().copied()).unwrap()
    }

    fn ids(g: &Graph, names: &str) -> Vec<VertexId> {
        names.split_whitespace().map(|s| g.vertex(s).unwrap()).collect()
    }

    #[test]
    fn p3_orientations() {
        let g = graph(&[("a", "b"), ("b", "c")]);
        let ab = g.edge_by_names("a", "b").unwrap();
        let bc = g.edge_by_names("b", "c").unwrap();
        let good = OrientedCutSet::new(&g, [bc], ids(&g, "b c"));
        assert!(is_nicely_oriented(&g, &good).unwrap());
        let (order, witness) = induce_order(&g, &good).unwrap();
        assert_eq!(order, ids(&g, "a b c"));
        assert_eq!(witness, g.vertex("b").unwrap());
        // Cutting ab: `a` alone on one side; both orders are nice.
        assert!(is_nicely_oriented(&g, &OrientedCutSet::new(&g, [ab], ids(&g, "b a"))).unwrap());
        assert!(is_nicely_oriented(&g, &OrientedCutSet::new(&g, [ab], ids(&g, "a b"))).unwrap());
        let both = OrientedCutSet::new(&g, [ab, bc], ids(&g, "a b c"));
        assert!(!is_nicely_oriented(&g, &both).unwrap());
        let tri = graph(&[("a", "b"), ("b", "c"), ("a", "c")]);
        assert_eq!(
            is_nicely_oriented(&tri, &OrientedCutSet::new(&tri, [0], ids(&tri, "a b"))),
            Err(CutsetError::NotCutSet)
        );
    }

    #[test]
    fn star_cut_puts_center_first() {
        let g = graph(&[("s", "a"), ("s", "b"), ("s", "c")]);
        let cut = OrientedCutSet::new(&g, 0..3, ids(&g, "s b a c"));
        let (order, w) = induce_order(&g, &cut).unwrap();
        assert_eq!(order, ids(&g, "s b a c"));
        assert_eq!(w, g.vertex("s").unwrap());
        assert_eq!(left_side(&g, &cut).unwrap(), BTreeSet::from([g.vertex("s").unwrap()]));
    }

    #[test]
    fn state_counts_of_tiny_graphs() {
        let k2 = graph(&[("a", "b")]);
        let states: Vec<_> = enumerate_states(&k2, 1, 1, None).unwrap().collect();
        assert_eq!(states.len(), 4);
        let tri = graph(&[("a", "b"), ("b", "c"), ("a", "c")]);
        assert_eq!(enumerate_states(&tri, 1, 1, None).unwrap().count(), 2);
        assert_eq!(enumerate_states(&tri, 1, 2, None).unwrap().count(), 14);
        assert_eq!(enumerate_states(&k2, 1, 0, None).unwrap().count(), 2);
    }

    #[test]
    fn state_lines() {
        let g = graph(&[("a", "b"), ("a", "c")]);
        let s = StateNode::cut(&g, &[1, 0], &ids(&g, "a c b"), &[1, 0]);
        assert_eq!(format_state(&g, &s), "a b,a c;a c b;1,2");
        assert_eq!(format_state(&g, &StateNode::Start), "START");
    }

    #[test]
    fn no_arc_to_itself_or_with_changed_page() {
        let g = graph(&[("a", "b"), ("b", "c"), ("c", "d")]);
        let ab = StateNode::cut(&g, &[0], &ids(&g, "a b"), &[0]);
        let bc = StateNode::cut(&g, &[1], &ids(&g, "b c"), &[0]);
        assert_eq!(arc_exists(&g, &ab, &ab, 1, 1, LayoutKind::Stack), None);
        assert_eq!(arc_exists(&g, &ab, &bc, 1, 1, LayoutKind::Stack), g.vertex("b"));
        assert_eq!(arc_exists(&g, &StateNode::Start, &ab, 1, 1, LayoutKind::Stack), g.vertex("a"));
        let two = graph(&[("a", "b"), ("a", "c"), ("b", "d")]);
        let x = StateNode::cut(&two, &[0, 1], &ids(&two, "a b c"), &[0, 0]);
        let y = StateNode::cut(&two, &[1, 2], &ids(&two, "a b d c"), &[0, 0]);
        assert_eq!(arc_exists(&two, &x, &y, 2, 2, LayoutKind::Stack), two.vertex("b"));
        // `a c` stays in the cut but changes page.
        let y = StateNode::cut(&two, &[1, 2], &ids(&two, "a b d c"), &[1, 0]);
        assert_eq!(arc_exists(&two, &x, &y, 2, 2, LayoutKind::Stack), None);
    }
}
