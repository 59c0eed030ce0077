//! Exhaustive reference solver.
//!
//! The spine is extended left to right. An edge gets its page when its left
//! endpoint is placed and is checked for conflicts when its right endpoint
//! is placed; a conflict among placed vertices never disappears, which makes
//! the pruning safe. Page choices are made before later vertices are tried,
//! so the first spine the search meets need not be the lexicographically
//! first one. That one is reached by descent: starting from any feasible
//! spine, each position in turn takes the smallest vertex for which a search
//! with that prefix forced still succeeds. [`assign_pages`] then picks the
//! lexicographically first page assignment for it.

use std::cell::Cell;
use std::collections::HashSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{EdgeId, Graph, VertexId};
use crate::layout::{IndexedLayout, LayoutKind, LinearLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleQuery {
    pub kind: LayoutKind,
    pub pages: usize,
    pub width: Option<usize>,
}

impl OracleQuery {
    pub fn new(kind: LayoutKind, pages: usize, width: Option<usize>) -> Self {
        OracleQuery { kind, pages, width }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Largest vertex count the oracle agrees to search.
    pub max_n: usize,
    /// Worker count for the fan-out over first vertices; `None` uses the
    /// global pool.
    pub threads: Option<usize>,
    /// Largest set of page configurations kept for one spine prefix before
    /// the search gives up.
    pub max_configs: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            max_n: 12,
            threads: None,
            max_configs: 1 << 20,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {n} vertices, above the oracle limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("invalid query: {0}")]
    InvalidQuery(&'static str),
    #[error("more than {0} page configurations for one spine prefix")]
    StateLimit(usize),
}

fn check(g: &Graph, q: &OracleQuery, opts: &OracleOptions) -> Result<(), OracleError> {
    if q.pages == 0 {
        return Err(OracleError::InvalidQuery("page count must be at least 1"));
    }
    if q.width == Some(0) {
        return Err(OracleError::InvalidQuery("page width cap must be at least 1"));
    }
    if g.n() > opts.max_n {
        return Err(OracleError::TooLarge {
            n: g.n(),
            limit: opts.max_n,
        });
    }
    Ok(())
}

pub(crate) fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Returns the lexicographically first layout (spine first, then pages in
/// canonical edge order), or `None` if there is none.
pub fn solve_exhaustive(
    g: &Graph,
    q: &OracleQuery,
    opts: &OracleOptions,
) -> Result<Option<LinearLayout>, OracleError> {
    spine_search(g, q, opts, false)
}

/// Some layout, or `None` if there is none. The same search as
/// [`solve_exhaustive`], but trying vertices that close many open edges
/// first, so feasible instances finish much sooner and the witness is not
/// the lexicographically first.
pub fn find_layout(g: &Graph, q: &OracleQuery, opts: &OracleOptions) -> Result<Option<LinearLayout>, OracleError> {
    spine_search(g, q, opts, true)
}

fn spine_search(g: &Graph, q: &OracleQuery, opts: &OracleOptions, greedy: bool) -> Result<Option<LinearLayout>, OracleError> {
    check(g, q, opts)?;
    if g.n() == 0 {
        return Ok(Some(IndexedLayout::new(vec![], vec![]).to_layout(g, q.kind, q.pages)));
    }
    let sym = Symmetry::of(g);
    let firsts: Vec<VertexId> = (0..g.n()).filter(|&v| sym.allows(v, &vec![UNSET; g.n()])).collect();
    let found = with_pool(opts.threads, || {
        firsts.par_iter().find_map_first(|&v| {
            let mut s = SpineSearch::new(g, q, &sym, opts);
            s.greedy = greedy;
            s.run_from(v).transpose()
        })
    });
    Ok(found.transpose()?.map(|order| {
        let page = assign_pages(g, &order, q.kind, q.pages, q.width)
            .expect("a spine found by the search admits a page assignment");
        IndexedLayout::new(order, page).to_layout(g, q.kind, q.pages)
    }))
}

/// Number of valid `(spine, page assignment)` pairs; neither reversal nor
/// page renaming is factored out.
pub fn solve_exhaustive_all(g: &Graph, q: &OracleQuery, opts: &OracleOptions) -> Result<u64, OracleError> {
    check(g, q, opts)?;
    if g.n() == 0 {
        return Ok(1);
    }
    Ok(with_pool(opts.threads, || {
        (0..g.n())
            .into_par_iter()
            .map(|v| {
                let mut s = Counter::new(g, q);
                s.try_place(v)
            })
            .sum()
    }))
}

/// Lexicographically first page assignment (canonical edge order, pages
/// ascending) making `order` a valid layout, if any.
pub fn assign_pages(
    g: &Graph,
    order: &[VertexId],
    kind: LayoutKind,
    pages: usize,
    width: Option<usize>,
) -> Option<Vec<usize>> {
    let lay = IndexedLayout::new(order.to_vec(), vec![0; g.m()]);
    let spans: Vec<(usize, usize)> = (0..g.m()).map(|e| lay.span(g, e)).collect();
    let mut page = vec![usize::MAX; g.m()];
    let mut load = vec![vec![0usize; g.n()]; pages];
    let cap = width.unwrap_or(usize::MAX);

    fn go(
        e: usize,
        spans: &[(usize, usize)],
        kind: LayoutKind,
        cap: usize,
        page: &mut [usize],
        load: &mut [Vec<usize>],
    ) -> bool {
        if e == spans.len() {
            return true;
        }
        let (a, b) = spans[e];
        for p in 0..load.len() {
            if load[p][a..b].iter().any(|&c| c >= cap) {
                continue;
            }
            if (0..e).any(|f| page[f] == p && kind.conflicts(spans[f], (a, b))) {
                continue;
            }
            page[e] = p;
            load[p][a..b].iter_mut().for_each(|c| *c += 1);
            if go(e + 1, spans, kind, cap, page, load) {
                return true;
            }
            load[p][a..b].iter_mut().for_each(|c| *c -= 1);
        }
        page[e] = usize::MAX;
        false
    }

    go(0, &spans, kind, cap, &mut page, &mut load).then_some(page)
}

/// Conditions the lexicographically first spine satisfies. Each comes from
/// an automorphism `σ` that exchanges two vertex sets and fixes the rest:
/// the first spine vertex `w` that `σ` moves must have `w < σ(w)`, or
/// applying `σ` would give a smaller spine. All conditions hold at once for
/// the first spine of every symmetry class.
struct Symmetry {
    /// For twin vertices `u < v` (`N(u) - v = N(v) - u`), `u` is listed
    /// under `v`: the first spine places `u` earlier.
    before: Vec<Vec<VertexId>>,
    /// Vertex sets moved by an exchange of two twin components.
    pieces: Vec<Vec<VertexId>>,
    /// For every vertex, the pieces it may not be the first of.
    not_first: Vec<Vec<usize>>,
}

impl Symmetry {
    fn none(n: usize) -> Self {
        Symmetry {
            before: vec![Vec::new(); n],
            pieces: Vec::new(),
            not_first: vec![Vec::new(); n],
        }
    }

    fn of(g: &Graph) -> Self {
        let mut sym = Symmetry::none(g.n());
        for v in 0..g.n() {
            for u in 0..v {
                let nu = g.neighbors(u).iter().filter(|&&w| w != v);
                let nv = g.neighbors(v).iter().filter(|&&w| w != u);
                if nu.eq(nv) {
                    sym.before[v].push(u);
                }
            }
        }
        // Twin components hanging off a small separator. The kernel code
        // proposes them; every exchange is checked here before it is used.
        let Ok(dec) = crate::kernel::compute_vertex_integrity(g, Some(PIECE_SEPARATOR_BUDGET)) else {
            return sym;
        };
        for class in crate::kernel::twin_partition(g, &dec) {
            for i in 0..class.members.len() {
                for j in i + 1..class.members.len() {
                    let (a, b) = (&class.members[i], &class.members[j]);
                    if a.len() < 2 || !swap_is_automorphism(g, a, b) {
                        continue;
                    }
                    let id = sym.pieces.len();
                    for (&x, &y) in a.iter().zip(b) {
                        sym.not_first[x.max(y)].push(id);
                    }
                    sym.pieces.push(a.iter().chain(b).copied().collect());
                }
            }
        }
        sym
    }

    fn allows(&self, v: VertexId, pos: &[usize]) -> bool {
        self.before[v].iter().all(|&u| pos[u] != UNSET)
            && self.not_first[v].iter().all(|&i| self.pieces[i].iter().any(|&x| pos[x] != UNSET))
    }
}

/// Pieces are searched only below this vertex integrity.
const PIECE_SEPARATOR_BUDGET: usize = 8;

/// Whether exchanging `a[i]` with `b[i]` for all `i`, fixing every other
/// vertex, maps edges to edges.
fn swap_is_automorphism(g: &Graph, a: &[VertexId], b: &[VertexId]) -> bool {
    let mut sigma: Vec<VertexId> = (0..g.n()).collect();
    for (&x, &y) in a.iter().zip(b) {
        if sigma[x] != x || sigma[y] != y || x == y {
            return false;
        }
        sigma[x] = y;
        sigma[y] = x;
    }
    a.len() == b.len() && g.edges().iter().all(|&(x, y)| g.has_edge(sigma[x], sigma[y]))
}

const UNSET: usize = usize::MAX;

/// Depth-first search over spine prefixes in lexicographic order. Each
/// prefix carries every distinct way its open edges (those with exactly one
/// placed endpoint, ordered by their placed endpoint) can sit on pages, so
/// a prefix is abandoned only when no page choice survives. The first full
/// spine reached is therefore the lexicographically first feasible one.
///
/// A configuration is the page of every open edge, with pages renamed by
/// first appearance. Closed edges need not be remembered: an edge closing
/// while a same-page edge that it must cross (stack) or that must enclose it
/// (queue) is still open is rejected right then, and no later edge can
/// conflict with it.
/// Prefers vertices that close many open edges and open few new ones.
fn sort_greedy(g: &Graph, pos: &[usize], candidates: &mut [VertexId]) {
    candidates.sort_by_cached_key(|&v| {
        let placed = g.neighbors(v).iter().filter(|&&w| pos[w] != UNSET).count();
        (usize::MAX - placed, g.degree(v) - placed, v)
    });
}

struct SpineSearch<'a> {
    g: &'a Graph,
    kind: LayoutKind,
    pages: usize,
    cap: usize,
    sym: &'a Symmetry,
    /// Try vertices in a closing-edges-first order instead of by id.
    greedy: bool,
    max_configs: usize,
    overflow: Cell<bool>,
    pos: Vec<usize>,
    order: Vec<VertexId>,
}

type Config = Vec<u16>;

impl<'a> SpineSearch<'a> {
    fn new(g: &'a Graph, q: &OracleQuery, sym: &'a Symmetry, opts: &OracleOptions) -> Self {
        SpineSearch {
            g,
            kind: q.kind,
            // More pages than edges are never needed.
            pages: q.pages.min(g.m().max(1)).min(u16::MAX as usize),
            cap: q.width.unwrap_or(usize::MAX),
            sym,
            greedy: false,
            max_configs: opts.max_configs,
            overflow: Cell::new(false),
            pos: vec![UNSET; g.n()],
            order: Vec::with_capacity(g.n()),
        }
    }

    fn run_from(&mut self, v: VertexId) -> Result<Option<Vec<VertexId>>, OracleError> {
        let start: HashSet<Config> = HashSet::from([Vec::new()]);
        let (open, configs) = self.step(&[], &start, v);
        let found = if configs.is_empty() {
            false
        } else {
            self.place(v);
            self.descend(&open, &configs)
        };
        if self.overflow.get() {
            return Err(OracleError::StateLimit(self.max_configs));
        }
        Ok(found.then(|| self.order.clone()))
    }

    fn place(&mut self, v: VertexId) {
        self.pos[v] = self.order.len();
        self.order.push(v);
    }

    fn unplace(&mut self) {
        let v = self.order.pop().expect("placed");
        self.pos[v] = UNSET;
    }

    fn descend(&mut self, open: &[EdgeId], configs: &HashSet<Config>) -> bool {
        if self.order.len() == self.g.n() {
            return true;
        }
        let mut candidates: Vec<VertexId> =
            (0..self.g.n()).filter(|&v| self.pos[v] == UNSET && self.sym.allows(v, &self.pos)).collect();
        if self.greedy {
            sort_greedy(self.g, &self.pos, &mut candidates);
        }
        for v in candidates {
            let (next, next_configs) = self.step(open, configs, v);
            if self.overflow.get() {
                return false;
            }
            if next_configs.is_empty() {
                continue;
            }
            self.place(v);
            if self.descend(&next, &next_configs) {
                return true;
            }
            self.unplace();
        }
        false
    }

    /// Open edges and surviving configurations after placing `v`.
    fn step(&self, open: &[EdgeId], configs: &HashSet<Config>, v: VertexId) -> (Vec<EdgeId>, HashSet<Config>) {
        let g = self.g;
        let other = |e: EdgeId, x: VertexId| {
            let (a, b) = g.edge(e);
            a + b - x
        };
        let left = |e: EdgeId| {
            let (a, b) = g.edge(e);
            if self.pos[a] != UNSET { self.pos[a] } else { self.pos[b] }
        };
        let closing: Vec<usize> = (0..open.len()).filter(|&i| g.edge(open[i]).0 == v || g.edge(open[i]).1 == v).collect();
        let staying: Vec<usize> = (0..open.len()).filter(|i| !closing.contains(i)).collect();
        let mut opening: Vec<EdgeId> = g.incident_edges(v).filter(|&e| self.pos[other(e, v)] == UNSET).collect();
        opening.sort_unstable();
        let next: Vec<EdgeId> = staying.iter().map(|&i| open[i]).chain(opening.iter().copied()).collect();

        let mut out = HashSet::new();
        'configs: for c in configs {
            for &i in &closing {
                let bad = staying.iter().any(|&j| {
                    c[j] == c[i]
                        && match self.kind {
                            LayoutKind::Stack => left(open[j]) > left(open[i]),
                            LayoutKind::Queue => left(open[j]) < left(open[i]),
                        }
                });
                if bad {
                    continue 'configs;
                }
            }
            let base = canonical(&staying.iter().map(|&j| c[j]).collect::<Vec<_>>(), self.pages);
            let mut load = vec![0usize; self.pages];
            for &x in &base {
                load[x as usize] += 1;
            }
            let used = base.iter().map(|&x| x as usize + 1).max().unwrap_or(0);
            let mut cfg = base;
            self.extend_pages(&mut cfg, opening.len(), used, &mut load, &mut out);
        }
        (next, out)
    }

    /// Every canonical page choice for `k` more edges, each opening a new
    /// page only as the next unused one.
    fn extend_pages(&self, cfg: &mut Config, k: usize, used: usize, load: &mut [usize], out: &mut HashSet<Config>) {
        if k == 0 {
            if out.len() >= self.max_configs {
                self.overflow.set(true);
                return;
            }
            out.insert(cfg.clone());
            return;
        }
        for p in 0..self.pages.min(used + 1) {
            if load[p] >= self.cap {
                continue;
            }
            cfg.push(p as u16);
            load[p] += 1;
            self.extend_pages(cfg, k - 1, used.max(p + 1), load, out);
            load[p] -= 1;
            cfg.pop();
        }
    }
}

/// Renames pages in order of first appearance.
fn canonical(cfg: &[u16], pages: usize) -> Config {
    let mut rename = vec![u16::MAX; pages];
    let mut next = 0u16;
    cfg.iter()
        .map(|&p| {
            if rename[p as usize] == u16::MAX {
                rename[p as usize] = next;
                next += 1;
            }
            rename[p as usize]
        })
        .collect()
}

/// Plain enumeration of `(spine, page assignment)` pairs, placing one
/// vertex and then choosing pages for the edges it opens.
struct Counter<'a> {
    g: &'a Graph,
    kind: LayoutKind,
    cap: usize,
    pos: Vec<usize>,
    order: Vec<VertexId>,
    page: Vec<usize>,
    open: Vec<usize>,
}

impl<'a> Counter<'a> {
    fn new(g: &'a Graph, q: &OracleQuery) -> Self {
        Counter {
            g,
            kind: q.kind,
            cap: q.width.unwrap_or(usize::MAX),
            pos: vec![UNSET; g.n()],
            order: Vec::with_capacity(g.n()),
            page: vec![UNSET; g.m()],
            open: vec![0; q.pages],
        }
    }

    fn extend(&mut self) -> u64 {
        if self.order.len() == self.g.n() {
            return 1;
        }
        let mut total = 0;
        for v in 0..self.g.n() {
            if self.pos[v] == UNSET {
                total += self.try_place(v);
            }
        }
        total
    }

    fn try_place(&mut self, v: VertexId) -> u64 {
        let g = self.g;
        let t = self.order.len();
        let closing: Vec<EdgeId> = g
            .incident_edges(v)
            .filter(|&e| {
                let (a, b) = g.edge(e);
                self.pos[a + b - v] != UNSET
            })
            .collect();
        if !closing.iter().all(|&e| self.closes_cleanly(e, v, t)) {
            return 0;
        }
        let opening: Vec<EdgeId> = g
            .incident_edges(v)
            .filter(|&e| {
                let (a, b) = g.edge(e);
                self.pos[a + b - v] == UNSET
            })
            .collect();
        self.pos[v] = t;
        self.order.push(v);
        for &e in &closing {
            self.open[self.page[e]] -= 1;
        }
        let total = self.assign(&opening, 0);
        for &e in &closing {
            self.open[self.page[e]] += 1;
        }
        self.order.pop();
        self.pos[v] = UNSET;
        total
    }

    /// Whether edge `e` from a placed vertex to `v` (about to take position
    /// `t`) avoids conflicts with everything placed so far.
    fn closes_cleanly(&self, e: EdgeId, v: VertexId, t: usize) -> bool {
        let g = self.g;
        let (a, b) = g.edge(e);
        let u = a + b - v;
        let (lo, p) = (self.pos[u], self.page[e]);
        for &w in &self.order[lo + 1..t] {
            for f in g.incident_edges(w) {
                if self.page[f] != p {
                    continue;
                }
                let (x, y) = g.edge(f);
                let other = x + y - w;
                let conflict = match self.kind {
                    // An open edge leaving from strictly inside (u, v).
                    LayoutKind::Stack => other != v && self.pos[other] == UNSET,
                    // A closed edge with both ends strictly inside (u, v).
                    LayoutKind::Queue => {
                        self.pos[other] != UNSET && self.pos[other] > lo && self.pos[other] < t
                    }
                };
                if conflict {
                    return false;
                }
            }
        }
        // On a queue page, an edge still open from left of `u` would end
        // right of `v` and nest this one.
        if self.kind == LayoutKind::Queue {
            for &w in &self.order[..lo] {
                for f in g.incident_edges(w) {
                    let (x, y) = g.edge(f);
                    let other = x + y - w;
                    if self.page[f] == p && other != v && self.pos[other] == UNSET {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn assign(&mut self, pending: &[EdgeId], i: usize) -> u64 {
        if i == pending.len() {
            return self.extend();
        }
        let e = pending[i];
        let mut total = 0;
        for p in 0..self.open.len() {
            if self.open[p] >= self.cap {
                continue;
            }
            self.page[e] = p;
            self.open[p] += 1;
            total += self.assign(pending, i + 1);
            self.open[p] -= 1;
            self.page[e] = UNSET;
        }
        total
    }
}
