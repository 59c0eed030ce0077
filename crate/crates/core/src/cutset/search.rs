//! Breadth-first search of the state graph, materializing states on demand.

use std::collections::HashMap;

use crate::graph::{EdgeId, Graph, VertexId};
use crate::layout::{
    edge_count_bound, indexed_conflicts, indexed_page_width, BoundVerdict, IndexedLayout, LayoutKind, LinearLayout,
};

use super::{CutsetError, StateNode};

#[derive(Default)]
pub struct SearchOptions<'a> {
    /// Keep expanding after the end state is reached, so that `states`
    /// counts every reachable state.
    pub explore_all: bool,
    /// Refuse to materialize more states than this.
    pub max_states: Option<usize>,
    /// Called once for every newly materialized state.
    pub on_state: Option<&'a mut dyn FnMut(&StateNode)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Materialized states, sentinels included.
    pub states: usize,
    /// Arcs generated, including those into already known states.
    pub arcs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CutsetOutcome {
    Found(LinearLayout),
    /// The edge count alone rules out a layout.
    BoundRejected,
    /// The search finished without reaching the end state.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct CutsetResult {
    pub outcome: CutsetOutcome,
    pub stats: SearchStats,
    /// For every component, the states along the path that produced the
    /// layout, from start to end.
    pub paths: Vec<Vec<StateNode>>,
}

type Key = (Vec<EdgeId>, Vec<VertexId>, Vec<usize>);

struct Node {
    edges: Vec<EdgeId>,
    order: Vec<VertexId>,
    pages: Vec<usize>,
    processed: Vec<bool>,
    parent: usize,
    label: VertexId,
}

impl Node {
    fn state(&self, g: &Graph, start: bool) -> StateNode {
        if start {
            StateNode::Start
        } else {
            StateNode::cut(g, &self.edges, &self.order, &self.pages)
        }
    }
}

enum Succ {
    End(VertexId),
    Cut(VertexId, Key),
}

struct Expander<'g> {
    g: &'g Graph,
    kind: LayoutKind,
    pages: usize,
    q: usize,
}

impl Expander<'_> {
    fn successors(&self, x: &Node, out: &mut Vec<Succ>) {
        let g = self.g;
        let first_sink = x.order.iter().copied().find(|&v| !x.processed[v]);
        for lambda in 0..g.n() {
            if x.processed[lambda] {
                continue;
            }
            if x.order.contains(&lambda) && first_sink != Some(lambda) {
                continue;
            }
            let kept: Vec<(EdgeId, usize)> = x
                .edges
                .iter()
                .copied()
                .zip(x.pages.iter().copied())
                .filter(|&(e, _)| {
                    let (a, b) = g.edge(e);
                    a != lambda && b != lambda
                })
                .collect();
            let fresh: Vec<VertexId> = g.neighbors(lambda).iter().copied().filter(|&w| !x.processed[w]).collect();
            if kept.len() + fresh.len() > self.q * self.pages {
                continue;
            }
            if kept.is_empty() && fresh.is_empty() {
                out.push(Succ::End(lambda));
                continue;
            }
            let mut sources: Vec<VertexId> = x
                .order
                .iter()
                .copied()
                .filter(|&v| {
                    x.processed[v]
                        && kept.iter().any(|&(e, _)| {
                            let (a, b) = g.edge(e);
                            a == v || b == v
                        })
                })
                .collect();
            if !fresh.is_empty() {
                sources.push(lambda);
            }
            let old_sinks: Vec<VertexId> =
                x.order.iter().copied().filter(|&v| !x.processed[v] && v != lambda).collect();
            let new_sinks: Vec<VertexId> = fresh.iter().copied().filter(|w| !old_sinks.contains(w)).collect();
            let new_edges: Vec<EdgeId> = fresh.iter().map(|&w| g.edge_id(lambda, w).unwrap()).collect();

            let mut order = sources.clone();
            let mut used = vec![false; new_sinks.len()];
            self.interleave(&old_sinks, 0, &new_sinks, &mut used, &mut order, &mut |order| {
                self.assign_new(lambda, order, &kept, &new_edges, out);
            });
        }
    }

    /// Every merge of `old` (kept in order) with any permutation of `new`.
    #[allow(clippy::too_many_arguments)]
    fn interleave(
        &self,
        old: &[VertexId],
        i: usize,
        new: &[VertexId],
        used: &mut Vec<bool>,
        order: &mut Vec<VertexId>,
        f: &mut dyn FnMut(&[VertexId]),
    ) {
        let placed_new = used.iter().filter(|&&u| u).count();
        if i == old.len() && placed_new == new.len() {
            f(order);
            return;
        }
        if i < old.len() {
            order.push(old[i]);
            self.interleave(old, i + 1, new, used, order, f);
            order.pop();
        }
        for j in 0..new.len() {
            if !used[j] {
                used[j] = true;
                order.push(new[j]);
                self.interleave(old, i, new, used, order, f);
                order.pop();
                used[j] = false;
            }
        }
    }

    fn assign_new(
        &self,
        lambda: VertexId,
        order: &[VertexId],
        kept: &[(EdgeId, usize)],
        new_edges: &[EdgeId],
        out: &mut Vec<Succ>,
    ) {
        let g = self.g;
        let pos: HashMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let span = |e: EdgeId| {
            let (u, v) = g.edge(e);
            (pos[&u].min(pos[&v]), pos[&u].max(pos[&v]))
        };
        let mut load = vec![0usize; self.pages];
        for &(_, p) in kept {
            load[p] += 1;
        }
        let kept_spans: Vec<((usize, usize), usize)> = kept.iter().map(|&(e, p)| (span(e), p)).collect();
        let new_spans: Vec<(usize, usize)> = new_edges.iter().map(|&e| span(e)).collect();
        let mut chosen = vec![0usize; new_edges.len()];

        #[allow(clippy::too_many_arguments)]
        fn go(
            i: usize,
            kind: LayoutKind,
            q: usize,
            kept: &[((usize, usize), usize)],
            spans: &[(usize, usize)],
            load: &mut [usize],
            chosen: &mut [usize],
            emit: &mut dyn FnMut(&[usize]),
        ) {
            if i == spans.len() {
                emit(chosen);
                return;
            }
            for p in 0..load.len() {
                if load[p] >= q {
                    continue;
                }
                let clash = kept.iter().any(|&(s, kp)| kp == p && kind.conflicts(s, spans[i]))
                    || (0..i).any(|j| chosen[j] == p && kind.conflicts(spans[j], spans[i]));
                if clash {
                    continue;
                }
                chosen[i] = p;
                load[p] += 1;
                go(i + 1, kind, q, kept, spans, load, chosen, emit);
                load[p] -= 1;
            }
        }

        go(
            0,
            self.kind,
            self.q,
            &kept_spans,
            &new_spans,
            &mut load,
            &mut chosen,
            &mut |chosen| {
                let mut pairs: Vec<(EdgeId, usize)> = kept.to_vec();
                pairs.extend(new_edges.iter().copied().zip(chosen.iter().copied()));
                pairs.sort_unstable();
                let key = (
                    pairs.iter().map(|p| p.0).collect(),
                    order.to_vec(),
                    pairs.iter().map(|p| p.1).collect(),
                );
                out.push(Succ::Cut(lambda, key));
            },
        );
    }
}

/// Decides whether the connected graph `g` has a `pages`-page layout of the
/// given kind with page width at most `q`.
pub fn solve_bounded_width(g: &Graph, kind: LayoutKind, pages: usize, q: usize) -> Result<CutsetResult, CutsetError> {
    solve_bounded_width_with(g, kind, pages, q, &mut SearchOptions::default())
}

pub fn solve_bounded_width_with(
    g: &Graph,
    kind: LayoutKind,
    pages: usize,
    q: usize,
    opts: &mut SearchOptions<'_>,
) -> Result<CutsetResult, CutsetError> {
    if pages == 0 {
        return Err(CutsetError::NoPages);
    }
    if !g.is_connected() {
        return Err(CutsetError::NotConnected);
    }
    let mut stats = SearchStats::default();
    if g.n() == 0 {
        let layout = IndexedLayout::new(vec![], vec![]).to_layout(g, kind, pages);
        return Ok(CutsetResult {
            outcome: CutsetOutcome::Found(layout),
            stats,
            paths: vec![],
        });
    }
    if edge_count_bound(g, kind, pages) == BoundVerdict::Rejected {
        return Ok(CutsetResult {
            outcome: CutsetOutcome::BoundRejected,
            stats,
            paths: vec![],
        });
    }

    let ex = Expander { g, kind, pages, q };
    let mut nodes = vec![Node {
        edges: vec![],
        order: vec![],
        pages: vec![],
        processed: vec![false; g.n()],
        parent: usize::MAX,
        label: usize::MAX,
    }];
    let mut index: HashMap<Key, usize> = HashMap::new();
    if let Some(cb) = opts.on_state.as_mut() {
        cb(&StateNode::Start);
    }
    stats.states = 1;
    let mut end: Option<(usize, VertexId)> = None;
    let mut head = 0;
    let mut succ = Vec::new();
    while head < nodes.len() {
        let x = head;
        head += 1;
        succ.clear();
        ex.successors(&nodes[x], &mut succ);
        for s in succ.drain(..) {
            stats.arcs += 1;
            match s {
                Succ::End(lambda) => {
                    if end.is_none() {
                        end = Some((x, lambda));
                        stats.states += 1;
                        if let Some(cb) = opts.on_state.as_mut() {
                            cb(&StateNode::End);
                        }
                    }
                }
                Succ::Cut(lambda, key) => {
                    if index.contains_key(&key) {
                        continue;
                    }
                    if opts.max_states.is_some_and(|limit| nodes.len() >= limit) {
                        return Err(CutsetError::StateLimit(opts.max_states.unwrap()));
                    }
                    let mut processed = nodes[x].processed.clone();
                    processed[lambda] = true;
                    let node = Node {
                        edges: key.0.clone(),
                        order: key.1.clone(),
                        pages: key.2.clone(),
                        processed,
                        parent: x,
                        label: lambda,
                    };
                    if let Some(cb) = opts.on_state.as_mut() {
                        cb(&node.state(g, false));
                    }
                    index.insert(key, nodes.len());
                    nodes.push(node);
                    stats.states += 1;
                }
            }
        }
        if end.is_some() && !opts.explore_all {
            break;
        }
    }

    let Some((last, lambda)) = end else {
        return Ok(CutsetResult {
            outcome: CutsetOutcome::Exhausted,
            stats,
            paths: vec![],
        });
    };
    let mut chain = vec![last];
    while nodes[*chain.last().unwrap()].parent != usize::MAX {
        chain.push(nodes[*chain.last().unwrap()].parent);
    }
    chain.reverse();
    let mut order: Vec<VertexId> = chain[1..].iter().map(|&i| nodes[i].label).collect();
    order.push(lambda);
    let mut page = vec![usize::MAX; g.m()];
    for &i in &chain {
        for (&e, &p) in nodes[i].edges.iter().zip(&nodes[i].pages) {
            debug_assert!(page[e] == usize::MAX || page[e] == p);
            page[e] = p;
        }
    }
    let lay = IndexedLayout::new(order, page);
    assert!(
        indexed_conflicts(g, kind, &lay).is_empty() && indexed_page_width(g, &lay) <= q,
        "state graph path does not yield a valid layout"
    );
    let mut path: Vec<StateNode> = chain.iter().map(|&i| nodes[i].state(g, i == 0)).collect();
    path.push(StateNode::End);
    Ok(CutsetResult {
        outcome: CutsetOutcome::Found(lay.to_layout(g, kind, pages)),
        stats,
        paths: vec![path],
    })
}

/// Runs the search on every connected component and concatenates the
/// layouts. Statistics are summed over components.
pub fn solve_components(
    g: &Graph,
    kind: LayoutKind,
    pages: usize,
    q: usize,
    opts: &mut SearchOptions<'_>,
) -> Result<CutsetResult, CutsetError> {
    if pages == 0 {
        return Err(CutsetError::NoPages);
    }
    let mut total = CutsetResult {
        outcome: CutsetOutcome::Exhausted,
        stats: SearchStats::default(),
        paths: vec![],
    };
    if edge_count_bound(g, kind, pages) == BoundVerdict::Rejected {
        total.outcome = CutsetOutcome::BoundRejected;
        return Ok(total);
    }
    let mut layout = LinearLayout {
        kind,
        page_count: pages,
        spine: vec![],
        pages: Default::default(),
    };
    for comp in g.components() {
        let sub = g.induced_subgraph(&comp);
        let r = solve_bounded_width_with(&sub, kind, pages, q, opts)?;
        total.stats.states += r.stats.states;
        total.stats.arcs += r.stats.arcs;
        match r.outcome {
            CutsetOutcome::Found(l) => {
                layout.spine.extend(l.spine);
                layout.pages.extend(l.pages);
                total.paths.extend(r.paths);
            }
            other => {
                total.outcome = other;
                total.paths.clear();
                return Ok(total);
            }
        }
    }
    total.outcome = CutsetOutcome::Found(layout);
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{complete, cycle, path};
    use crate::layout::validate_layout;

    fn found(r: &CutsetResult) -> Option<&LinearLayout> {
        match &r.outcome {
            CutsetOutcome::Found(l) => Some(l),
            _ => None,
        }
    }

    #[test]
    fn path_fits_one_page_of_width_one() {
        let g = path(4);
        let r = solve_bounded_width(&g, LayoutKind::Stack, 1, 1).unwrap();
        let lay = found(&r).unwrap();
        assert!(validate_layout(&g, lay).unwrap().is_ok());
    }

    #[test]
    fn k4_needs_two_stack_pages() {
        let g = complete(4);
        let r = solve_bounded_width(&g, LayoutKind::Stack, 2, g.m()).unwrap();
        assert!(found(&r).is_some());
        let r = solve_bounded_width(&g, LayoutKind::Stack, 1, g.m()).unwrap();
        assert_eq!(r.outcome, CutsetOutcome::BoundRejected);
        // K4 minus an edge passes the bound and still has a one-page layout.
        let k4e = Graph::from_edges([("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("c", "d")]).unwrap();
        assert!(found(&solve_bounded_width(&k4e, LayoutKind::Stack, 1, 5).unwrap()).is_some());
    }

    #[test]
    fn c6_queue_width() {
        let g = cycle(6).unwrap();
        assert!(found(&solve_bounded_width(&g, LayoutKind::Queue, 1, 2).unwrap()).is_some());
        assert_eq!(
            solve_bounded_width(&g, LayoutKind::Queue, 1, 1).unwrap().outcome,
            CutsetOutcome::Exhausted
        );
    }

    #[test]
    fn zero_width_only_allows_single_vertices() {
        let g = path(3);
        let r = solve_bounded_width(&g, LayoutKind::Stack, 1, 0).unwrap();
        assert_eq!(r.outcome, CutsetOutcome::Exhausted);
        assert_eq!(r.stats.states, 1);
        let one = path(1);
        assert!(found(&solve_bounded_width(&one, LayoutKind::Stack, 1, 0).unwrap()).is_some());
    }

    #[test]
    fn disconnected_input_is_split() {
        let g = Graph::from_edges([("a", "b"), ("c", "d")]).unwrap();
        assert_eq!(
            solve_bounded_width(&g, LayoutKind::Stack, 1, 1).unwrap_err(),
            CutsetError::NotConnected
        );
        let r = solve_components(&g, LayoutKind::Stack, 1, 1, &mut SearchOptions::default()).unwrap();
        assert_eq!(found(&r).unwrap().spine, ["a", "b", "c", "d"]);
    }
}
