//! Exact vertex integrity by bounded branching.
//!
//! For a candidate value `p` and a partial separator `S`, any component of
//! `G - S` with more than `p - |S|` vertices contains a connected set of
//! `p - |S| + 1` vertices, and every valid separator extending `S` must hit
//! it. Branching on that set gives at most `(p + 1)^p` leaves.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::graph::{Graph, VertexId};

use super::KernelError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViDecomposition {
    pub p: usize,
    /// Sorted.
    pub separator: Vec<VertexId>,
    /// Components of `G - S`, each sorted, ordered by smallest vertex.
    pub components: Vec<Vec<VertexId>>,
}

impl ViDecomposition {
    pub fn from_separator(g: &Graph, separator: &[VertexId]) -> ViDecomposition {
        let mut removed = vec![false; g.n()];
        for &s in separator {
            removed[s] = true;
        }
        let mut components = g.components_avoiding(&removed, &[]);
        for c in &mut components {
            c.sort_unstable();
        }
        components.sort();
        let mut separator = separator.to_vec();
        separator.sort_unstable();
        let p = separator.len() + components.iter().map(Vec::len).max().unwrap_or(0);
        ViDecomposition {
            p,
            separator,
            components,
        }
    }
}

/// `|S| + size of the largest component of G - S`.
pub fn integrity_of(g: &Graph, separator: &[VertexId]) -> usize {
    ViDecomposition::from_separator(g, separator).p
}

struct Branch<'a> {
    g: &'a Graph,
    p: usize,
    seen: HashSet<Vec<VertexId>>,
}

impl Branch<'_> {
    /// A connected set of `size` vertices inside a component that is too
    /// large, or `None` if every component fits.
    fn oversized(&self, removed: &[bool], budget: usize) -> Option<Vec<VertexId>> {
        let g = self.g;
        let mut seen = removed.to_vec();
        for start in 0..g.n() {
            if seen[start] {
                continue;
            }
            let mut order = vec![start];
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &w in g.neighbors(u) {
                    if !seen[w] {
                        seen[w] = true;
                        order.push(w);
                        queue.push_back(w);
                    }
                }
            }
            if order.len() > budget {
                order.truncate(budget + 1);
                return Some(order);
            }
        }
        None
    }

    fn search(&mut self, sep: &mut Vec<VertexId>, removed: &mut [bool]) -> bool {
        let mut key = sep.clone();
        key.sort_unstable();
        if !self.seen.insert(key) {
            return false;
        }
        if sep.len() > self.p {
            return false;
        }
        let Some(hit) = self.oversized(removed, self.p - sep.len()) else {
            return true;
        };
        if sep.len() == self.p {
            return false;
        }
        for w in hit {
            sep.push(w);
            removed[w] = true;
            if self.search(sep, removed) {
                return true;
            }
            sep.pop();
            removed[w] = false;
        }
        false
    }
}

/// A separator witnessing integrity at most `p`, if one exists.
pub fn separator_within(g: &Graph, p: usize) -> Option<Vec<VertexId>> {
    let mut b = Branch {
        g,
        p,
        seen: HashSet::new(),
    };
    let mut sep = Vec::new();
    let mut removed = vec![false; g.n()];
    b.search(&mut sep, &mut removed).then_some(sep)
}

/// Exact vertex integrity with a minimizing separator. With a budget, gives
/// up once integrity is known to exceed it.
pub fn compute_vertex_integrity(g: &Graph, budget: Option<usize>) -> Result<ViDecomposition, KernelError> {
    for p in 0..=g.n() {
        if let Some(b) = budget {
            if p > b {
                return Err(KernelError::BudgetExceeded(b));
            }
        }
        if let Some(sep) = separator_within(g, p) {
            let dec = ViDecomposition::from_separator(g, &sep);
            debug_assert!(dec.p <= p);
            return Ok(dec);
        }
    }
    unreachable!("the empty separator always gives integrity at most n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use itertools::Itertools;

    /// Minimum over all vertex subsets.
    fn brute(g: &Graph) -> usize {
        (0..g.n())
            .powerset()
            .map(|s| integrity_of(g, &s))
            .min()
            .unwrap_or(0)
    }

    #[test]
    fn small_families() {
        assert_eq!(compute_vertex_integrity(&generate::star(6), None).unwrap().separator, [0]);
        assert_eq!(compute_vertex_integrity(&generate::star(6), None).unwrap().p, 2);
        assert_eq!(compute_vertex_integrity(&generate::complete(3), None).unwrap().p, 3);
        let p9 = generate::path(9);
        assert_eq!(brute(&p9), 5);
        assert_eq!(compute_vertex_integrity(&p9, None).unwrap().p, 5);
        assert!(matches!(
            compute_vertex_integrity(&p9, Some(4)),
            Err(KernelError::BudgetExceeded(4))
        ));
        assert_eq!(compute_vertex_integrity(&Graph::new(Vec::<String>::new(), Vec::<(String, String)>::new()).unwrap(), None).unwrap().p, 0);
    }

    #[test]
    fn matches_subset_enumeration() {
        for n in 1..=6 {
            for g in generate::connected_catalog(n) {
                let dec = compute_vertex_integrity(&g, None).unwrap();
                assert_eq!(dec.p, brute(&g), "{g:?}");
                assert_eq!(integrity_of(&g, &dec.separator), dec.p);
            }
        }
    }
}
