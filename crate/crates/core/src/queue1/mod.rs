//! One-page queue layouts through labelings and level planarity.
//!
//! A labeling orients every edge and tags it ordinary (one level up) or
//! arching (same level, from the leftmost vertex). Each labeling fixes the
//! levels up to a shift; the labeled instance is then decided by a level
//! planarity test on a framed, subdivided copy of the graph. A positive
//! answer is read back as an arched leveled embedding and the spine is the
//! concatenation of the reversed level orders.

mod planarity;
mod reduction;

use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::layout::{edge_count_bound, solve_per_component, BoundVerdict, LayoutKind, LinearLayout};

pub use planarity::{
    embedding_crossings, test_level_planarity, violated_fixed_pairs, LevelEmbedding, LevelPlanarityError, LeveledGraph,
};
pub use reduction::{arching_sources, embedding_to_queue_layout, generated_prefix, reduce_to_level_planarity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcTag {
    Ordinary,
    Arching,
}

/// One arc per edge, indexed by edge id: `arcs[e]` is the orientation of
/// edge `e` and `tags[e]` its tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling {
    pub arcs: Vec<(VertexId, VertexId)>,
    pub tags: Vec<ArcTag>,
}

/// The four choices per edge in branching order.
const CHOICES: [(bool, ArcTag); 4] = [
    (false, ArcTag::Ordinary),
    (true, ArcTag::Ordinary),
    (false, ArcTag::Arching),
    (true, ArcTag::Arching),
];

impl Labeling {
    /// `choices[e]` in `0..4`: forward ordinary, backward ordinary, forward
    /// arching, backward arching, where forward follows the edge's endpoint
    /// order.
    pub fn from_choices(g: &Graph, choices: &[u8]) -> Labeling {
        assert_eq!(choices.len(), g.m());
        let (arcs, tags) = choices
            .iter()
            .enumerate()
            .map(|(e, &c)| {
                let (u, v) = g.edge(e);
                let (back, tag) = CHOICES[c as usize];
                (if back { (v, u) } else { (u, v) }, tag)
            })
            .unzip();
        Labeling { arcs, tags }
    }

    /// The labeling at position `index` of the branching order; edge 0 is the
    /// most significant base-4 digit.
    pub fn from_index(g: &Graph, index: u64) -> Labeling {
        let m = g.m();
        assert!(m <= 31 && index < 1u64 << (2 * m), "labeling index out of range");
        let choices: Vec<u8> = (0..m).map(|e| (index >> (2 * (m - 1 - e)) & 3) as u8).collect();
        Labeling::from_choices(g, &choices)
    }

    pub fn index(&self, g: &Graph) -> u64 {
        (0..g.m()).fold(0, |acc, e| {
            let back = self.arcs[e] != g.edge(e);
            let c = CHOICES.iter().position(|&x| x == (back, self.tags[e])).unwrap() as u64;
            acc << 2 | c
        })
    }

    /// The labeling induced by levels and per-level orders (left to right):
    /// edges between levels point up, edges within a level point right.
    pub fn induced(g: &Graph, levels: &LevelAssignment, orders: &[Vec<VertexId>]) -> Labeling {
        let mut pos = vec![0; g.n()];
        for order in orders {
            for (i, &v) in order.iter().enumerate() {
                pos[v] = i;
            }
        }
        let (arcs, tags) = g
            .edges()
            .iter()
            .map(|&(u, v)| {
                let (lu, lv) = (levels.level[u], levels.level[v]);
                if lu == lv {
                    (if pos[u] < pos[v] { (u, v) } else { (v, u) }, ArcTag::Arching)
                } else {
                    (if lu < lv { (u, v) } else { (v, u) }, ArcTag::Ordinary)
                }
            })
            .unzip();
        Labeling { arcs, tags }
    }

    pub fn to_json(&self, g: &Graph) -> serde_json::Value {
        self.arcs
            .iter()
            .zip(&self.tags)
            .map(|(&(u, v), tag)| json!({"from": g.name(u), "to": g.name(v), "tag": tag}))
            .collect()
    }
}

/// Levels `1..=h`, indexed by vertex id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LevelAssignment {
    pub level: Vec<usize>,
    pub h: usize,
}

impl LevelAssignment {
    pub fn is_consistent(&self, lab: &Labeling) -> bool {
        lab.arcs.iter().zip(&lab.tags).all(|(&(u, v), tag)| match tag {
            ArcTag::Ordinary => self.level[v] == self.level[u] + 1,
            ArcTag::Arching => self.level[v] == self.level[u],
        })
    }

    pub fn to_json(&self, g: &Graph) -> serde_json::Value {
        let map: BTreeMap<&str, usize> = (0..g.n()).map(|v| (g.name(v), self.level[v])).collect();
        json!(map)
    }
}

/// The level assignment consistent with `lab`, from a breadth-first search
/// started at vertex 0 and shifted to start at level 1.
pub fn level_assignment_from_labeling(g: &Graph, lab: &Labeling) -> Option<LevelAssignment> {
    level_assignment_from_root(g, lab, 0)
}

/// As [`level_assignment_from_labeling`] with the search started at `root`.
/// Components are handled one after another and each is shifted to start at 1.
pub fn level_assignment_from_root(g: &Graph, lab: &Labeling, root: VertexId) -> Option<LevelAssignment> {
    let n = g.n();
    if n == 0 {
        return Some(LevelAssignment { level: vec![], h: 0 });
    }
    // Level offset across every edge, seen from each endpoint.
    let mut step: Vec<Vec<(VertexId, i64)>> = vec![Vec::new(); n];
    for (&(u, v), tag) in lab.arcs.iter().zip(&lab.tags) {
        let d = match tag {
            ArcTag::Ordinary => 1,
            ArcTag::Arching => 0,
        };
        step[u].push((v, d));
        step[v].push((u, -d));
    }
    let mut raw: Vec<Option<i64>> = vec![None; n];
    let mut level = vec![0usize; n];
    for start in std::iter::once(root).chain(0..n) {
        if raw[start].is_some() {
            continue;
        }
        raw[start] = Some(0);
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let lu = raw[u].unwrap();
            for &(w, d) in &step[u] {
                match raw[w] {
                    Some(lw) if lw != lu + d => return None,
                    Some(_) => {}
                    None => {
                        raw[w] = Some(lu + d);
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
        }
        let low = comp.iter().map(|&v| raw[v].unwrap()).min().unwrap();
        for &v in &comp {
            level[v] = (raw[v].unwrap() - low + 1) as usize;
        }
    }
    let h = level.iter().copied().max().unwrap_or(0);
    Some(LevelAssignment { level, h })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Queue1Error {
    #[error("component with {m} edges exceeds the limit of {limit} edges")]
    TooLarge { m: usize, limit: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone)]
pub struct Queue1Options {
    /// Largest edge count per component that is branched on.
    pub max_edges: usize,
    /// Evaluate every labeling even after a layout has been found.
    pub explore_all: bool,
    pub threads: Option<usize>,
}

impl Default for Queue1Options {
    fn default() -> Self {
        Queue1Options {
            max_edges: 26,
            explore_all: false,
            threads: None,
        }
    }
}

/// Labelings accounted for, by how they were settled. Labelings cut off
/// together with an inconsistent or rejected prefix count individually, so
/// `covered` is `4^m` per component after a full search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BranchStats {
    pub covered: u64,
    /// No consistent level assignment.
    pub inconsistent: u64,
    /// Two arching sources on one level.
    pub rejected: u64,
    /// Reached the level planarity test.
    pub tested: u64,
    /// Passed the level planarity test.
    pub positive: u64,
}

impl BranchStats {
    fn add(&mut self, o: &BranchStats) {
        self.covered += o.covered;
        self.inconsistent += o.inconsistent;
        self.rejected += o.rejected;
        self.tested += o.tested;
        self.positive += o.positive;
    }
}

/// The successful branch of one component.
#[derive(Debug, Clone)]
pub struct Branch {
    pub component: Graph,
    pub index: u64,
    pub labeling: Labeling,
    pub levels: LevelAssignment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Queue1Outcome {
    Found(LinearLayout),
    /// More than `2n - 3` edges.
    BoundRejected,
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct Queue1Result {
    pub outcome: Queue1Outcome,
    pub stats: BranchStats,
    pub branches: Vec<Branch>,
}

impl Queue1Result {
    /// The successful labeling and level assignment of every component.
    pub fn branch_json(&self) -> serde_json::Value {
        let comps: Vec<_> = self
            .branches
            .iter()
            .map(|b| {
                json!({
                    "vertices": b.component.names(),
                    "index": b.index,
                    "labeling": b.labeling.to_json(&b.component),
                    "levels": b.levels.to_json(&b.component),
                })
            })
            .collect();
        json!({ "components": comps })
    }
}

/// Level-offset union-find with undo, over a growing labeling prefix.
struct Potentials {
    parent: Vec<usize>,
    /// Level of a vertex minus the level of its parent.
    offset: Vec<i64>,
    size: Vec<usize>,
    history: Vec<Option<usize>>,
}

impl Potentials {
    fn new(n: usize) -> Self {
        Potentials {
            parent: (0..n).collect(),
            offset: vec![0; n],
            size: vec![1; n],
            history: Vec::new(),
        }
    }

    fn find(&self, mut v: usize) -> (usize, i64) {
        let mut d = 0;
        while self.parent[v] != v {
            d += self.offset[v];
            v = self.parent[v];
        }
        (v, d)
    }

    /// Requires `level(v) - level(u) = d`; false if that contradicts.
    fn link(&mut self, u: usize, v: usize, d: i64) -> bool {
        let (ru, pu) = self.find(u);
        let (rv, pv) = self.find(v);
        if ru == rv {
            self.history.push(None);
            return pv - pu == d;
        }
        let (child, parent, off) = if self.size[ru] >= self.size[rv] {
            (rv, ru, d + pu - pv)
        } else {
            (ru, rv, pv - pu - d)
        };
        self.parent[child] = parent;
        self.offset[child] = off;
        self.size[parent] += self.size[child];
        self.history.push(Some(child));
        true
    }

    fn undo(&mut self) {
        if let Some(Some(c)) = self.history.pop() {
            let p = self.parent[c];
            self.size[p] -= self.size[c];
            self.parent[c] = c;
            self.offset[c] = 0;
        }
    }
}

struct Brancher<'a> {
    g: &'a Graph,
    explore_all: bool,
    /// Smallest successful labeling index found by any worker.
    best: &'a AtomicU64,
}

struct Subtree {
    stats: BranchStats,
    found: Option<(u64, Labeling, LevelAssignment, LinearLayout)>,
}

impl Brancher<'_> {
    fn pow4(k: usize) -> u64 {
        1u64 << (2 * k)
    }

    /// Distinct arching sources known to share a level.
    fn sources_clash(&self, pot: &Potentials, choices: &[u8]) -> bool {
        let sources: Vec<usize> = choices
            .iter()
            .enumerate()
            .filter(|&(_, &c)| CHOICES[c as usize].1 == ArcTag::Arching)
            .map(|(e, &c)| {
                let (u, v) = self.g.edge(e);
                if CHOICES[c as usize].0 {
                    v
                } else {
                    u
                }
            })
            .collect();
        sources.iter().enumerate().any(|(i, &a)| {
            sources[i + 1..].iter().any(|&b| a != b && pot.find(a) == pot.find(b))
        })
    }

    /// Adds the arc for `choice` on the next edge; on failure the caller
    /// still undoes the link.
    fn push(&self, pot: &mut Potentials, choices: &mut Vec<u8>, choice: u8) -> Result<(), bool> {
        let e = choices.len();
        let (u, v) = self.g.edge(e);
        let (back, tag) = CHOICES[choice as usize];
        let (a, b) = if back { (v, u) } else { (u, v) };
        choices.push(choice);
        let d = if tag == ArcTag::Ordinary { 1 } else { 0 };
        if !pot.link(a, b, d) {
            return Err(false);
        }
        if tag == ArcTag::Arching && self.sources_clash(pot, choices) {
            return Err(true);
        }
        Ok(())
    }

    fn leaf(&self, choices: &[u8], out: &mut Subtree) -> Result<bool, Queue1Error> {
        let g = self.g;
        let index = choices.iter().fold(0u64, |acc, &c| acc << 2 | c as u64);
        out.stats.covered += 1;
        let lab = Labeling::from_choices(g, choices);
        let Some(levels) = level_assignment_from_labeling(g, &lab) else {
            out.stats.inconsistent += 1;
            return Ok(false);
        };
        let Some(reduced) = reduce_to_level_planarity(g, &lab, &levels) else {
            out.stats.rejected += 1;
            return Ok(false);
        };
        out.stats.tested += 1;
        let emb = test_level_planarity(&reduced).map_err(|e| Queue1Error::Internal(e.to_string()))?;
        let Some(emb) = emb else {
            return Ok(false);
        };
        out.stats.positive += 1;
        if out.found.is_none() {
            let layout = embedding_to_queue_layout(g, &lab, &levels, &emb)?;
            self.best.fetch_min(index, Ordering::Relaxed);
            out.found = Some((index, lab, levels, layout));
        }
        Ok(true)
    }

    fn descend(&self, pot: &mut Potentials, choices: &mut Vec<u8>, out: &mut Subtree) -> Result<bool, Queue1Error> {
        let m = self.g.m();
        if choices.len() == m {
            return self.leaf(choices, out);
        }
        if !self.explore_all && self.best.load(Ordering::Relaxed) != u64::MAX {
            // Leaves of this prefix all come after a known success?
            let lo = choices.iter().fold(0u64, |acc, &c| acc << 2 | c as u64) << (2 * (m - choices.len()));
            if lo > self.best.load(Ordering::Relaxed) {
                return Ok(true);
            }
        }
        for c in 0..4u8 {
            let rest = Self::pow4(m - choices.len() - 1);
            match self.push(pot, choices, c) {
                Ok(()) => {
                    let done = self.descend(pot, choices, out)?;
                    pot.undo();
                    choices.pop();
                    if done && !self.explore_all {
                        return Ok(true);
                    }
                }
                Err(rejected) => {
                    pot.undo();
                    choices.pop();
                    out.stats.covered += rest;
                    if rejected {
                        out.stats.rejected += rest;
                    } else {
                        out.stats.inconsistent += rest;
                    }
                }
            }
        }
        Ok(false)
    }

    /// Searches all labelings that start with `prefix`.
    fn subtree(&self, prefix: &[u8]) -> Result<Subtree, Queue1Error> {
        let m = self.g.m();
        let mut out = Subtree {
            stats: BranchStats::default(),
            found: None,
        };
        let mut pot = Potentials::new(self.g.n());
        let mut choices = Vec::with_capacity(m);
        for &c in prefix {
            if let Err(rejected) = self.push(&mut pot, &mut choices, c) {
                let rest = Self::pow4(m - prefix.len());
                out.stats.covered += rest;
                if rejected {
                    out.stats.rejected += rest;
                } else {
                    out.stats.inconsistent += rest;
                }
                return Ok(out);
            }
        }
        self.descend(&mut pot, &mut choices, &mut out)?;
        Ok(out)
    }
}

/// Branches over all labelings of a connected graph.
fn solve_connected(g: &Graph, opts: &Queue1Options, stats: &mut BranchStats) -> Result<Option<(Branch, LinearLayout)>, Queue1Error> {
    let m = g.m();
    let best = AtomicU64::new(u64::MAX);
    let brancher = Brancher {
        g,
        explore_all: opts.explore_all,
        best: &best,
    };
    // Fan out over the choices for the first few edges.
    let depth = m.min(3);
    let prefixes: Vec<Vec<u8>> = (0..Brancher::pow4(depth))
        .map(|i| (0..depth).map(|k| (i >> (2 * (depth - 1 - k)) & 3) as u8).collect())
        .collect();
    let parts: Vec<Result<Subtree, Queue1Error>> = prefixes.par_iter().map(|p| brancher.subtree(p)).collect();
    let mut found = None;
    for part in parts {
        let part = part?;
        stats.add(&part.stats);
        if found.is_none() {
            found = part.found;
        }
    }
    Ok(found.map(|(index, labeling, levels, layout)| {
        (
            Branch {
                component: g.clone(),
                index,
                labeling,
                levels,
            },
            layout,
        )
    }))
}

pub fn solve_queue_one_page(g: &Graph) -> Result<Queue1Result, Queue1Error> {
    solve_queue_one_page_with(g, &Queue1Options::default())
}

pub fn solve_queue_one_page_with(g: &Graph, opts: &Queue1Options) -> Result<Queue1Result, Queue1Error> {
    let mut result = Queue1Result {
        outcome: Queue1Outcome::Exhausted,
        stats: BranchStats::default(),
        branches: Vec::new(),
    };
    if edge_count_bound(g, LayoutKind::Queue, 1) == BoundVerdict::Rejected {
        result.outcome = Queue1Outcome::BoundRejected;
        return Ok(result);
    }
    let comps: Vec<Graph> = g.components().iter().map(|c| g.induced_subgraph(c)).collect();
    if let Some(big) = comps.iter().find(|c| c.m() > opts.max_edges.min(31)) {
        return Err(Queue1Error::TooLarge {
            m: big.m(),
            limit: opts.max_edges.min(31),
        });
    }
    if comps.iter().any(|c| edge_count_bound(c, LayoutKind::Queue, 1) == BoundVerdict::Rejected) {
        result.outcome = Queue1Outcome::BoundRejected;
        return Ok(result);
    }
    let mut stats = BranchStats::default();
    let mut branches = Vec::new();
    let layout = crate::oracle::with_pool(opts.threads, || {
        solve_per_component(g, LayoutKind::Queue, 1, |c| {
            Ok::<_, Queue1Error>(solve_connected(c, opts, &mut stats)?.map(|(branch, layout)| {
                branches.push(branch);
                layout
            }))
        })
    })?;
    result.stats = stats;
    if let Some(layout) = layout {
        result.outcome = Queue1Outcome::Found(layout);
        result.branches = branches;
    }
    Ok(result)
}
