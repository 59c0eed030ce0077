//! Instance generators and a catalog of small connected graphs.

use std::collections::{BTreeMap, HashSet};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, GraphError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `v0, v1, ...` zero-padded so that lexicographic and numeric order agree.
pub fn numbered(prefix: &str, n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

fn build(names: &[String], pairs: impl IntoIterator<Item = (usize, usize)>) -> Graph {
    Graph::new(
        names,
        pairs.into_iter().map(|(i, j)| (&names[i], &names[j])).collect::<Vec<_>>(),
    )
    .expect("generated graphs are simple")
}

pub fn path(n: usize) -> Graph {
    build(&numbered("v", n), (1..n).map(|i| (i - 1, i)))
}

pub fn cycle(n: usize) -> Result<Graph, GenError> {
    if n < 3 {
        return Err(GenError::InvalidParams(format!("a cycle needs at least 3 vertices, got {n}")));
    }
    Ok(build(&numbered("v", n), (0..n).map(|i| (i, (i + 1) % n))))
}

/// `K_{1,leaves}` with center `v0`.
pub fn star(leaves: usize) -> Graph {
    build(&numbered("v", leaves + 1), (1..=leaves).map(|i| (0, i)))
}

pub fn complete(n: usize) -> Graph {
    build(&numbered("v", n), (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}

/// A core graph plus `k` disjoint copies of `copy`; copy vertex `x` of copy
/// `j` is named `x_j` and is joined to every core vertex `s` with
/// `(x, s)` in `attach`. All copies are pairwise twins with respect to the
/// core as separator.
pub fn twin_gadget(core: &Graph, copy: &Graph, attach: &[(&str, &str)], k: usize) -> Result<Graph, GenError> {
    for &(x, s) in attach {
        if copy.vertex(x).is_none() || core.vertex(s).is_none() {
            return Err(GenError::InvalidParams(format!("attachment `{x} {s}` names an unknown vertex")));
        }
    }
    let ids = numbered("", k);
    let mut vertices: Vec<String> = core.names().to_vec();
    let mut edges: Vec<(String, String)> = core
        .edges()
        .iter()
        .map(|&(u, v)| (core.name(u).to_string(), core.name(v).to_string()))
        .collect();
    for id in &ids {
        let rename = |x: &str| format!("{x}_{id}");
        vertices.extend(copy.names().iter().map(|x| rename(x)));
        edges.extend(copy.edges().iter().map(|&(u, v)| (rename(copy.name(u)), rename(copy.name(v)))));
        edges.extend(attach.iter().map(|&(x, s)| (rename(x), s.to_string())));
    }
    Ok(Graph::new(&vertices, edges.iter().map(|(a, b)| (a, b)))?)
}

/// Uniform graph with `n` vertices and `m` edges.
pub fn random_gnm(n: usize, m: usize, seed: u64) -> Result<Graph, GenError> {
    let total = n * n.saturating_sub(1) / 2;
    if m > total {
        return Err(GenError::InvalidParams(format!("{m} edges do not fit on {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let chosen = sample(&mut rng, total, m).into_vec();
    Ok(build(&numbered("v", n), chosen.into_iter().map(|i| pairs[i])))
}

/// Random connected graph: a random recursive tree plus uniformly chosen
/// extra edges.
pub fn random_connected(n: usize, m: usize, seed: u64) -> Result<Graph, GenError> {
    let total = n * n.saturating_sub(1) / 2;
    if n == 0 || m + 1 < n || m > total {
        return Err(GenError::InvalidParams(format!(
            "no connected graph with {n} vertices and {m} edges"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let (a, b) = (perm[i], perm[j]);
        edges.insert((a.min(b), a.max(b)));
    }
    let rest: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|p| !edges.contains(p))
        .collect();
    for i in sample(&mut rng, rest.len(), m - (n - 1)).into_vec() {
        edges.insert(rest[i]);
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort_unstable();
    Ok(build(&numbered("v", n), edges))
}

/// Adjacency bitmasks of a graph with at most 16 vertices.
type Masks = Vec<u16>;

fn canonical_code(adj: &Masks) -> Vec<u16> {
    let n = adj.len();
    // Cells of vertices sharing (degree, sorted neighbor degrees); only
    // relabelings that keep the cells in invariant order are tried.
    let deg: Vec<u32> = adj.iter().map(|m| m.count_ones()).collect();
    let mut inv: BTreeMap<(u32, Vec<u32>), Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        let mut nd: Vec<u32> = (0..n).filter(|&w| adj[v] >> w & 1 == 1).map(|w| deg[w]).collect();
        nd.sort_unstable();
        inv.entry((deg[v], nd)).or_default().push(v);
    }
    let cells: Vec<Vec<usize>> = inv.into_values().collect();
    let mut best: Option<Vec<u16>> = None;
    let mut order = Vec::with_capacity(n);
    fn rec(cells: &[Vec<usize>], ci: usize, used: &mut Vec<bool>, order: &mut Vec<usize>, adj: &Masks, best: &mut Option<Vec<u16>>) {
        if ci == cells.len() {
            let mut pos = vec![0usize; adj.len()];
            for (i, &v) in order.iter().enumerate() {
                pos[v] = i;
            }
            let code: Vec<u16> = order
                .iter()
                .map(|&v| {
                    (0..adj.len())
                        .filter(|&w| adj[v] >> w & 1 == 1)
                        .fold(0u16, |acc, w| acc | 1 << pos[w])
                })
                .collect();
            if best.as_ref().map_or(true, |b| code < *b) {
                *best = Some(code);
            }
            return;
        }
        let cell = &cells[ci];
        let placed = order.len();
        let start: usize = cells[..ci].iter().map(Vec::len).sum();
        if placed == start + cell.len() {
            rec(cells, ci + 1, used, order, adj, best);
            return;
        }
        for &v in cell {
            if !used[v] {
                used[v] = true;
                order.push(v);
                rec(cells, ci, used, order, adj, best);
                order.pop();
                used[v] = false;
            }
        }
    }
    rec(&cells, 0, &mut vec![false; n], &mut order, adj, &mut best);
    best.unwrap_or_default()
}

/// One representative of every isomorphism class of connected graphs on
/// `n` vertices (`n <= 9`), named `a, b, c, ...`.
pub fn connected_catalog(n: usize) -> Vec<Graph> {
    assert!(n <= 9, "catalog is limited to 9 vertices");
    if n == 0 {
        return vec![];
    }
    // Every connected graph has a vertex whose removal keeps it connected,
    // so extending all connected graphs on n-1 vertices by one vertex with
    // a nonempty neighborhood reaches every class.
    let mut level: Vec<Masks> = vec![vec![0]];
    for k in 1..n {
        let mut seen: HashSet<Vec<u16>> = HashSet::new();
        let mut next = Vec::new();
        for adj in &level {
            for nb in 1u16..(1 << k) {
                let mut ext = adj.clone();
                for (w, m) in ext.iter_mut().enumerate() {
                    if nb >> w & 1 == 1 {
                        *m |= 1 << k;
                    }
                }
                ext.push(nb);
                let code = canonical_code(&ext);
                if seen.insert(code.clone()) {
                    next.push(code);
                }
            }
        }
        next.sort();
        level = next;
    }
    let names: Vec<String> = (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    level
        .iter()
        .map(|adj| build(&names, (0..n).flat_map(|i| (i + 1..n).filter(move |&j| adj[i] >> j & 1 == 1).map(move |j| (i, j)))))
        .collect()
}
