//! Level planarity of proper leveled graphs.
//!
//! A drawing is fixed by one left-to-right order per level, and two edges
//! between the same pair of levels cross exactly when their endpoints appear
//! in opposite orders on the two levels. Every same-level pair therefore gets
//! a boolean "left of" variable; independent edge pairs tie two variables
//! together, which a parity union-find collapses into classes. The search
//! assigns classes one at a time and keeps each level's relation transitively
//! closed, so a full assignment is a set of total orders. The result is
//! certified by recounting crossings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, Graph, VertexId};

use super::LevelAssignment;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeveledGraph {
    pub g: Graph,
    pub levels: LevelAssignment,
    /// Same-level pairs `(a, b)` that must be drawn with `a` left of `b`.
    pub fixed: Vec<(VertexId, VertexId)>,
}

/// `orders[i]` lists the vertices of level `i + 1` from left to right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelEmbedding {
    pub orders: Vec<Vec<String>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LevelPlanarityError {
    #[error("edge `{u} {v}` joins levels {lu} and {lv}")]
    ImproperEdge {
        u: String,
        v: String,
        lu: usize,
        lv: usize,
    },
    #[error("level assignment has {found} entries for {expected} vertices")]
    SizeMismatch { expected: usize, found: usize },
    #[error("vertex `{0}` is on level {1}, outside 1..={2}")]
    LevelOutOfRange(String, usize, usize),
    #[error("fixed pair `{0}` `{1}` is not two distinct vertices of one level")]
    BadFixedPair(String, String),
}

/// Fixed pairs that `emb` puts in the wrong order.
pub fn violated_fixed_pairs(lg: &LeveledGraph, emb: &LevelEmbedding) -> Vec<(VertexId, VertexId)> {
    let pos = positions(&lg.g, emb);
    lg.fixed.iter().copied().filter(|&(a, b)| pos[a] >= pos[b]).collect()
}

fn positions(g: &Graph, emb: &LevelEmbedding) -> Vec<usize> {
    let mut pos = vec![usize::MAX; g.n()];
    for order in &emb.orders {
        for (i, name) in order.iter().enumerate() {
            if let Some(v) = g.vertex(name) {
                pos[v] = i;
            }
        }
    }
    pos
}

fn check(lg: &LeveledGraph) -> Result<(), LevelPlanarityError> {
    let (g, lv) = (&lg.g, &lg.levels);
    if lv.level.len() != g.n() {
        return Err(LevelPlanarityError::SizeMismatch {
            expected: g.n(),
            found: lv.level.len(),
        });
    }
    for v in 0..g.n() {
        if lv.level[v] == 0 || lv.level[v] > lv.h {
            return Err(LevelPlanarityError::LevelOutOfRange(g.name(v).into(), lv.level[v], lv.h));
        }
    }
    for &(a, b) in &lg.fixed {
        if a == b || lv.level[a] != lv.level[b] {
            return Err(LevelPlanarityError::BadFixedPair(g.name(a).into(), g.name(b).into()));
        }
    }
    for &(u, v) in g.edges() {
        let (lu, lv) = (lv.level[u], lv.level[v]);
        if lu.abs_diff(lv) != 1 {
            return Err(LevelPlanarityError::ImproperEdge {
                u: g.name(u).into(),
                v: g.name(v).into(),
                lu,
                lv,
            });
        }
    }
    Ok(())
}

/// Pairs of edges between consecutive levels that cross in `emb`.
pub fn embedding_crossings(lg: &LeveledGraph, emb: &LevelEmbedding) -> Vec<(EdgeId, EdgeId)> {
    let g = &lg.g;
    let pos = positions(g, emb);
    // Orient every edge bottom to top.
    let up = |e: EdgeId| {
        let (u, v) = g.edge(e);
        if lg.levels.level[u] < lg.levels.level[v] {
            (u, v)
        } else {
            (v, u)
        }
    };
    let mut out = Vec::new();
    for e in 0..g.m() {
        let (a, b) = up(e);
        for f in e + 1..g.m() {
            let (c, d) = up(f);
            if lg.levels.level[a] != lg.levels.level[c] || a == c || b == d {
                continue;
            }
            if (pos[a] < pos[c]) != (pos[b] < pos[d]) {
                out.push((e, f));
            }
        }
    }
    out
}

struct ParityUf {
    parent: Vec<usize>,
    parity: Vec<bool>,
}

impl ParityUf {
    fn new(n: usize) -> Self {
        ParityUf {
            parent: (0..n).collect(),
            parity: vec![false; n],
        }
    }

    fn find(&mut self, x: usize) -> (usize, bool) {
        if self.parent[x] == x {
            return (x, false);
        }
        let (r, p) = self.find(self.parent[x]);
        self.parent[x] = r;
        self.parity[x] ^= p;
        (r, self.parity[x])
    }

    /// Records `x xor y = p`; false on contradiction.
    fn union(&mut self, x: usize, y: usize, p: bool) -> bool {
        let (rx, px) = self.find(x);
        let (ry, py) = self.find(y);
        if rx == ry {
            return px ^ py == p;
        }
        self.parent[ry] = rx;
        self.parity[ry] = px ^ py ^ p;
        true
    }
}

/// Static problem data: per-level members and the variable classes.
struct Problem {
    members: Vec<Vec<VertexId>>,
    offset: Vec<usize>,
    /// For every variable: its class and its parity relative to the class.
    class_of: Vec<(usize, bool)>,
    /// For every class: its variables as `(level, i, j, parity)`.
    classes: Vec<Vec<(usize, usize, usize, bool)>>,
}

impl Problem {
    fn var(&self, l: usize, i: usize, j: usize) -> usize {
        let k = self.members[l].len();
        debug_assert!(i < j && j < k);
        self.offset[l] + i * (2 * k - i - 1) / 2 + (j - i - 1)
    }
}

#[derive(Clone)]
struct State {
    value: Vec<Option<bool>>,
    /// `lt[l][i * k + j]`: member `i` of level `l` is left of member `j`.
    lt: Vec<Vec<bool>>,
}

impl State {
    fn assign(&mut self, p: &Problem, class: usize, value: bool) -> bool {
        let mut queue = Vec::new();
        if !self.set_class(p, class, value, &mut queue) {
            return false;
        }
        while let Some((l, a, b)) = queue.pop() {
            if !self.relate(p, l, a, b, &mut queue) {
                return false;
            }
        }
        true
    }

    fn set_class(&mut self, p: &Problem, class: usize, value: bool, queue: &mut Vec<(usize, usize, usize)>) -> bool {
        match self.value[class] {
            Some(v) => v == value,
            None => {
                self.value[class] = Some(value);
                for &(l, i, j, par) in &p.classes[class] {
                    if value ^ par {
                        queue.push((l, i, j));
                    } else {
                        queue.push((l, j, i));
                    }
                }
                true
            }
        }
    }

    /// Adds "`a` left of `b`" on level `l` and everything transitivity implies.
    fn relate(&mut self, p: &Problem, l: usize, a: usize, b: usize, queue: &mut Vec<(usize, usize, usize)>) -> bool {
        let k = p.members[l].len();
        let lt = &mut self.lt[l];
        if lt[a * k + b] {
            return true;
        }
        if lt[b * k + a] {
            return false;
        }
        let before: Vec<usize> = (0..k).filter(|&x| x == a || lt[x * k + a]).collect();
        let after: Vec<usize> = (0..k).filter(|&y| y == b || lt[b * k + y]).collect();
        let mut fresh = Vec::new();
        for &x in &before {
            for &y in &after {
                if x == y || lt[y * k + x] {
                    return false;
                }
                if !lt[x * k + y] {
                    lt[x * k + y] = true;
                    fresh.push((x, y));
                }
            }
        }
        for (x, y) in fresh {
            let (i, j, left) = if x < y { (x, y, true) } else { (y, x, false) };
            let (class, par) = p.class_of[p.var(l, i, j)];
            if !self.set_class(p, class, left ^ par, queue) {
                return false;
            }
        }
        true
    }
}

fn search(p: &Problem, state: State, order: &[usize]) -> Option<State> {
    let Some(&class) = order.iter().find(|&&c| state.value[c].is_none()) else {
        return Some(state);
    };
    for value in [true, false] {
        let mut next = state.clone();
        if next.assign(p, class, value) {
            if let Some(done) = search(p, next, order) {
                return Some(done);
            }
        }
    }
    None
}

/// Per-level orders of a crossing-free drawing, or `None` if the leveled
/// graph is not level planar. Every edge must join consecutive levels.
pub fn test_level_planarity(lg: &LeveledGraph) -> Result<Option<LevelEmbedding>, LevelPlanarityError> {
    check(lg)?;
    let (g, h) = (&lg.g, lg.levels.h);
    let mut members: Vec<Vec<VertexId>> = vec![Vec::new(); h];
    let mut idx = vec![0usize; g.n()];
    for v in 0..g.n() {
        let l = lg.levels.level[v] - 1;
        idx[v] = members[l].len();
        members[l].push(v);
    }
    let mut offset = Vec::with_capacity(h);
    let mut vars = 0;
    for m in &members {
        offset.push(vars);
        vars += m.len() * m.len().saturating_sub(1) / 2;
    }
    let mut p = Problem {
        members,
        offset,
        class_of: Vec::new(),
        classes: Vec::new(),
    };

    // left(x, y) as (variable, negated).
    let left = |p: &Problem, x: VertexId, y: VertexId| {
        let l = lg.levels.level[x] - 1;
        let (i, j) = (idx[x], idx[y]);
        if i < j {
            (p.var(l, i, j), false)
        } else {
            (p.var(l, j, i), true)
        }
    };
    let mut uf = ParityUf::new(vars);
    let mut by_level: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); h];
    for &(u, v) in g.edges() {
        let (a, b) = if lg.levels.level[u] < lg.levels.level[v] { (u, v) } else { (v, u) };
        by_level[lg.levels.level[a] - 1].push((a, b));
    }
    for edges in &by_level {
        for (x, &(a, b)) in edges.iter().enumerate() {
            for &(c, d) in &edges[x + 1..] {
                if a == c || b == d {
                    continue;
                }
                let (v1, n1) = left(&p, a, c);
                let (v2, n2) = left(&p, b, d);
                if !uf.union(v1, v2, n1 ^ n2) {
                    return Ok(None);
                }
            }
        }
    }

    let mut root_class = vec![usize::MAX; vars];
    for l in 0..h {
        let k = p.members[l].len();
        for i in 0..k {
            for j in i + 1..k {
                let var = p.var(l, i, j);
                let (r, par) = uf.find(var);
                if root_class[r] == usize::MAX {
                    root_class[r] = p.classes.len();
                    p.classes.push(Vec::new());
                }
                p.classes[root_class[r]].push((l, i, j, par));
                p.class_of.push((root_class[r], par));
            }
        }
    }
    debug_assert_eq!(p.class_of.len(), vars);

    // Large classes first: they constrain the most.
    let mut order: Vec<usize> = (0..p.classes.len()).collect();
    order.sort_by_key(|&c| std::cmp::Reverse(p.classes[c].len()));
    let mut start = State {
        value: vec![None; p.classes.len()],
        lt: p.members.iter().map(|m| vec![false; m.len() * m.len()]).collect(),
    };
    let mut queue: Vec<(usize, usize, usize)> = lg
        .fixed
        .iter()
        .map(|&(a, b)| (lg.levels.level[a] - 1, idx[a], idx[b]))
        .collect();
    while let Some((l, a, b)) = queue.pop() {
        if !start.relate(&p, l, a, b, &mut queue) {
            return Ok(None);
        }
    }
    let Some(done) = search(&p, start, &order) else {
        return Ok(None);
    };
    let orders: Vec<Vec<String>> = p
        .members
        .iter()
        .enumerate()
        .map(|(l, m)| {
            let k = m.len();
            let mut ranked: Vec<(usize, VertexId)> = (0..k)
                .map(|j| ((0..k).filter(|&i| done.lt[l][i * k + j]).count(), m[j]))
                .collect();
            ranked.sort_unstable();
            ranked.into_iter().map(|(_, v)| g.name(v).to_string()).collect()
        })
        .collect();
    let emb = LevelEmbedding { orders };
    assert!(
        embedding_crossings(lg, &emb).is_empty() && violated_fixed_pairs(lg, &emb).is_empty(),
        "level planarity search produced an invalid drawing"
    );
    Ok(Some(emb))
}
