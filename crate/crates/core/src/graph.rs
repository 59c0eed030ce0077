//! Simple undirected graphs with canonically ordered string vertex ids.
//!
//! Vertices are stored sorted by name, so a vertex index doubles as its
//! rank in the canonical order. Every deterministic tie-break in the crate
//! goes through these indices.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Index of a vertex inside a [`Graph`]; equal to its canonical rank.
pub type VertexId = usize;
/// Index of an edge inside a [`Graph`]; edges are sorted canonically.
pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on vertex `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{0} {1}`")]
    DuplicateEdge(String, String),
    #[error("edge endpoint `{0}` is not a declared vertex")]
    UnknownVertex(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("invalid vertex name {0:?}: names must be non-empty and whitespace-free")]
    InvalidName(String),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    adj: Vec<Vec<VertexId>>,
    edges: Vec<(VertexId, VertexId)>,
    edge_index: HashMap<(VertexId, VertexId), EdgeId>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edges
            .iter()
            .map(|&(u, v)| format!("{}-{}", self.names[u], self.names[v]))
            .collect();
        f.debug_struct("Graph")
            .field("vertices", &self.names)
            .field("edges", &edges)
            .finish()
    }
}

fn check_name(name: &str) -> Result<(), GraphError> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(GraphError::InvalidName(name.to_string()));
    }
    Ok(())
}

impl Graph {
    /// Builds a graph from explicit vertex and edge lists.
    ///
    /// Every edge endpoint must appear in `vertices`.
    pub fn new<V, E, S>(vertices: V, edges: E) -> Result<Self, GraphError>
    where
        V: IntoIterator<Item = S>,
        E: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut names: Vec<String> = Vec::new();
        let mut seen = BTreeSet::new();
        for v in vertices {
            let v = v.as_ref();
            check_name(v)?;
            if !seen.insert(v.to_string()) {
                return Err(GraphError::DuplicateVertex(v.to_string()));
            }
            names.push(v.to_string());
        }
        names.sort();
        let index: HashMap<String, VertexId> =
            names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut pairs = Vec::new();
        let mut pair_set = BTreeSet::new();
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *index
                .get(a)
                .ok_or_else(|| GraphError::UnknownVertex(a.to_string()))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| GraphError::UnknownVertex(b.to_string()))?;
            if ia == ib {
                return Err(GraphError::SelfLoop(a.to_string()));
            }
            let key = (ia.min(ib), ia.max(ib));
            if !pair_set.insert(key) {
                return Err(GraphError::DuplicateEdge(
                    names[key.0].clone(),
                    names[key.1].clone(),
                ));
            }
            pairs.push(key);
        }
        Ok(Self::from_sorted_parts(names, index, pairs))
    }

    /// Builds a graph whose vertex set is exactly the set of edge endpoints.
    pub fn from_edges<E, S>(edges: E) -> Result<Self, GraphError>
    where
        E: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let edges: Vec<(String, String)> = edges
            .into_iter()
            .map(|(a, b)| (a.as_ref().to_string(), b.as_ref().to_string()))
            .collect();
        let vertices: BTreeSet<&str> = edges
            .iter()
            .flat_map(|(a, b)| [a.as_str(), b.as_str()])
            .collect();
        Self::new(vertices, edges.iter().map(|(a, b)| (a.as_str(), b.as_str())))
    }

    fn from_sorted_parts(
        names: Vec<String>,
        index: HashMap<String, VertexId>,
        mut edges: Vec<(VertexId, VertexId)>,
    ) -> Self {
        edges.sort_unstable();
        let mut adj = vec![Vec::new(); names.len()];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let edge_index = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Graph {
            names,
            index,
            adj,
            edges,
            edge_index,
        }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    /// Edges as `(u, v)` with `u < v`, in canonical order.
    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    pub fn edge_id(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.edge_index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edge_id(u, v).is_some()
    }

    /// Edge id for a pair of vertex names, in either orientation.
    pub fn edge_by_names(&self, a: &str, b: &str) -> Option<EdgeId> {
        self.edge_id(self.vertex(a)?, self.vertex(b)?)
    }

    pub fn edge_names(&self, e: EdgeId) -> (&str, &str) {
        let (u, v) = self.edges[e];
        (&self.names[u], &self.names[v])
    }

    /// Edges incident to `v`, as edge ids.
    pub fn incident_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.adj[v].iter().map(move |&w| self.edge_index[&(v.min(w), v.max(w))])
    }

    /// Connected components, each sorted, ordered by their minimum vertex.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        self.components_avoiding(&vec![false; self.n()], &[])
    }

    /// Components of the graph after deleting the vertices flagged in
    /// `removed_vertices` and the edges in `removed_edges`.
    pub fn components_avoiding(
        &self,
        removed_vertices: &[bool],
        removed_edges: &[EdgeId],
    ) -> Vec<Vec<VertexId>> {
        let cut: BTreeSet<EdgeId> = removed_edges.iter().copied().collect();
        let mut comp = vec![usize::MAX; self.n()];
        let mut out = Vec::new();
        for start in 0..self.n() {
            if removed_vertices[start] || comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adj[u] {
                    if removed_vertices[w] || comp[w] != usize::MAX {
                        continue;
                    }
                    if !cut.is_empty() && cut.contains(&self.edge_index[&(u.min(w), u.max(w))]) {
                        continue;
                    }
                    comp[w] = id;
                    members.push(w);
                    queue.push_back(w);
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// The subgraph induced by `vertices`; vertex names are preserved.
    pub fn induced_subgraph(&self, vertices: &[VertexId]) -> Graph {
        let mut keep = vec![false; self.n()];
        for &v in vertices {
            keep[v] = true;
        }
        let mut chosen: Vec<VertexId> = (0..self.n()).filter(|&v| keep[v]).collect();
        chosen.sort_unstable();
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in chosen.iter().enumerate() {
            local[v] = i;
        }
        let names: Vec<String> = chosen.iter().map(|&v| self.names[v].clone()).collect();
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| keep[u] && keep[v])
            .map(|&(u, v)| (local[u], local[v]))
            .collect();
        Self::from_sorted_parts(names, index, edges)
    }

    /// Maps vertex names of `sub` (a subgraph sharing names) back to ids of `self`.
    pub fn embed_ids(&self, sub: &Graph) -> Option<Vec<VertexId>> {
        sub.names.iter().map(|s| self.vertex(s)).collect()
    }
}

/// A vertex bipartition `(A, B)` together with the edges crossing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub left: BTreeSet<VertexId>,
    pub right: BTreeSet<VertexId>,
    pub cut_set: BTreeSet<EdgeId>,
}

impl Cut {
    pub fn new(g: &Graph, left: impl IntoIterator<Item = VertexId>) -> Cut {
        let left: BTreeSet<VertexId> = left.into_iter().collect();
        let right = (0..g.n()).filter(|v| !left.contains(v)).collect();
        let cut_set = g
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, (u, v))| left.contains(u) != left.contains(v))
            .map(|(e, _)| e)
            .collect();
        Cut {
            left,
            right,
            cut_set,
        }
    }
}

/// True iff `edges` is exactly the edge set between some nontrivial
/// bipartition of the vertices.
pub fn is_cut_set(g: &Graph, edges: &[EdgeId]) -> bool {
    if edges.is_empty() {
        return false;
    }
    let comps = g.components_avoiding(&vec![false; g.n()], edges);
    let mut comp_of = vec![0; g.n()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    // The quotient graph on components must be bipartite with every removed
    // edge joining two different components.
    let mut side: Vec<Option<bool>> = vec![None; comps.len()];
    let mut quotient = vec![Vec::new(); comps.len()];
    for &e in edges {
        let (u, v) = g.edge(e);
        let (a, b) = (comp_of[u], comp_of[v]);
        if a == b {
            return false;
        }
        quotient[a].push(b);
        quotient[b].push(a);
    }
    for start in 0..comps.len() {
        if side[start].is_some() {
            continue;
        }
        side[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            let s = side[c].unwrap();
            for &d in &quotient[c] {
                match side[d] {
                    None => {
                        side[d] = Some(!s);
                        queue.push_back(d);
                    }
                    Some(t) if t == s => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_is_lexicographic() {
        let g = Graph::from_edges([("b", "a"), ("c", "b")]).unwrap();
        assert_eq!(g.names(), &["a", "b", "c"]);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.edge_by_names("c", "b"), Some(1));
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert_eq!(
            Graph::from_edges([("a", "a")]).unwrap_err(),
            GraphError::SelfLoop("a".into())
        );
        assert!(matches!(
            Graph::from_edges([("a", "b"), ("b", "a")]),
            Err(GraphError::DuplicateEdge(..))
        ));
        assert!(matches!(
            Graph::new(["a"], [("a", "b")]),
            Err(GraphError::UnknownVertex(_))
        ));
        assert!(matches!(
            Graph::new(["a b"], Vec::<(&str, &str)>::new()),
            Err(GraphError::InvalidName(_))
        ));
    }

    #[test]
    fn cut_set_detection() {
        let tri = Graph::from_edges([("a", "b"), ("b", "c"), ("a", "c")]).unwrap();
        assert!(!is_cut_set(&tri, &[0]));
        assert!(is_cut_set(&tri, &[0, 1]));
        assert!(!is_cut_set(&tri, &[0, 1, 2]));
        let path = Graph::from_edges([("a", "b"), ("b", "c")]).unwrap();
        assert!(is_cut_set(&path, &[1]));
        assert!(is_cut_set(&path, &[0, 1]));
    }

    #[test]
    fn induced_subgraph_keeps_names() {
        let g = Graph::from_edges([("a", "b"), ("b", "c"), ("c", "d")]).unwrap();
        let h = g.induced_subgraph(&[1, 2, 3]);
        assert_eq!(h.names(), &["b", "c", "d"]);
        assert_eq!(h.m(), 2);
        assert_eq!(g.embed_ids(&h).unwrap(), vec![1, 2, 3]);
    }
}
