//! Kernelization by vertex integrity.
//!
//! Components of `G - S` are grouped into twin classes. Classes that are too
//! small to matter are folded into the fixed part, and of every remaining
//! (large) class only a bounded number of members is kept. A layout of the
//! kernel is lifted back by locating three kept groups that the layout
//! treats alike and replicating their pattern for every pruned member.

mod guide;
mod integrity;
mod twins;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::cutset::{solve_components, CutsetError, CutsetOutcome, SearchOptions};
use crate::graph::{Graph, VertexId};
use crate::layout::{LayoutKind, LinearLayout};
use crate::oracle::{find_layout, OracleError, OracleOptions, OracleQuery};

pub use guide::{find_guiding_sublayout, lift_layout, Block, Direction, GuidingSublayout, PrimeItem};
pub use integrity::{compute_vertex_integrity, integrity_of, separator_within, ViDecomposition};
pub use twins::{twin_partition, TwinClass};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("vertex integrity exceeds the budget of {0}")]
    BudgetExceeded(usize),
    #[error("lifting needs at least 5 large groups, the kernel has {0}")]
    TooFewGroups(usize),
    #[error("layout does not belong to the kernel: {0}")]
    LayoutMismatch(String),
    #[error("graph does not match the certificate: {0}")]
    GraphMismatch(String),
    #[error("lifted layout is invalid: {0}")]
    LiftInvalid(String),
    #[error("inner solver failed: {0}")]
    Inner(String),
    /// The inner solver hit one of its size guards.
    #[error("inner solver refused: {0}")]
    InnerRefused(String),
}

/// How many members a class needs to count as large, given the number of
/// pages, the vertex integrity and the size of the fixed part. `None` stands
/// for a value beyond any class size.
#[derive(Clone)]
pub enum Threshold {
    Paper,
    Constant(u64),
    Custom(Arc<dyn Fn(usize, usize, usize) -> Option<u64> + Send + Sync>),
}

impl fmt::Debug for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Paper => f.write_str("Paper"),
            Threshold::Constant(k) => write!(f, "Constant({k})"),
            Threshold::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl Threshold {
    pub fn value(&self, pages: usize, p: usize, x: usize) -> Option<u64> {
        match self {
            Threshold::Paper => paper_threshold(pages, p, x),
            Threshold::Constant(k) => Some(*k),
            Threshold::Custom(f) => f(pages, p, x),
        }
    }
}

/// `log2 log2 f(l, p, x) = l * x^2 * 2^(12 p^2)`.
pub fn paper_threshold_exponent(pages: usize, p: usize, x: usize) -> BigUint {
    BigUint::from(pages) * BigUint::from(x) * BigUint::from(x) * (BigUint::one() << (12 * p * p))
}

/// `f(l, p, x) = 2^(2^(l x^2 2^(12 p^2)))` when it fits in a `u64`.
pub fn paper_threshold(pages: usize, p: usize, x: usize) -> Option<u64> {
    let e = paper_threshold_exponent(pages, p, x).to_u32().filter(|&e| e < 6)?;
    Some(1u64 << (1u32 << e))
}

/// Whether `n` is at most `(2^^(p 2^(2p^2)) * 2 + 6)^(l p)`, the a-priori
/// kernel size under the default threshold. The tower is only evaluated
/// while it is small; from height 5 on it exceeds every machine integer.
pub fn kernel_size_bound_holds(n: usize, pages: usize, p: usize) -> bool {
    let height = match 2u32.checked_pow((2 * p * p) as u32).and_then(|t| t.checked_mul(p as u32)) {
        Some(h) if h <= 4 => h,
        _ => return true,
    };
    let mut tower = BigUint::one();
    for _ in 0..height {
        tower = BigUint::one() << tower.to_usize().expect("tower of height at most 4");
    }
    let base = tower * 2u32 + 6u32;
    let bound = num_traits::pow(base, pages * p);
    BigUint::from(n) <= bound
}

/// The reduced graph and everything needed to lift its layouts.
#[derive(Debug, Clone)]
pub struct ReducedGraphCertificate {
    pub g_reduced: Graph,
    /// Vertices of the input graph that make up the kernel, sorted; vertex
    /// `i` of `g_reduced` is `kept[i]`.
    pub kept: Vec<VertexId>,
    pub p: usize,
    pub pages: usize,
    pub separator: Vec<VertexId>,
    /// Vertices of the classes folded into the fixed part.
    pub small: Vec<VertexId>,
    pub twin_classes: Vec<TwinClass>,
    /// Indices into `twin_classes`.
    pub large_classes: Vec<usize>,
    /// Class and offset in its representative for every template position;
    /// the template is the concatenation of the large classes'
    /// representatives.
    pub template: Vec<(usize, usize)>,
    /// Kept large groups, each aligned with the template: `groups[j][i]` is
    /// member `j`'s copy of template position `i`.
    pub groups: Vec<Vec<VertexId>>,
    /// The largeness value the loop ended with.
    pub threshold: Option<u64>,
    /// Pruned members per twin class.
    pub removed: Vec<usize>,
    pub full_n: usize,
}

impl ReducedGraphCertificate {
    pub fn pruned(&self) -> usize {
        self.removed.iter().sum()
    }

    /// Vertices of `S ∪ S'`.
    pub fn fixed(&self) -> Vec<VertexId> {
        let mut f: Vec<VertexId> = self.separator.iter().chain(&self.small).copied().collect();
        f.sort_unstable();
        f
    }

    pub fn to_json(&self, g: &Graph) -> serde_json::Value {
        let names = |vs: &[VertexId]| vs.iter().map(|&v| g.name(v).to_string()).collect::<Vec<_>>();
        json!({
            "p": self.p,
            "pages": self.pages,
            "threshold": self.threshold,
            "separator": names(&self.separator),
            "small": names(&self.small),
            "large_groups": self.groups.iter().map(|grp| names(grp)).collect::<Vec<_>>(),
            "twin_classes": self.twin_classes.iter().enumerate().map(|(c, tc)| json!({
                "large": self.large_classes.contains(&c),
                "members": tc.members.iter().map(|m| names(m)).collect::<Vec<_>>(),
                "removed": self.removed[c],
            })).collect::<Vec<_>>(),
            "kernel": { "n": self.g_reduced.n(), "m": self.g_reduced.m() },
        })
    }
}

/// Folds classes that are not large into the fixed part until every
/// remaining class is large, then keeps that many groups.
pub fn build_reduced_graph(
    g: &Graph,
    dec: &ViDecomposition,
    pages: usize,
    threshold: &Threshold,
) -> ReducedGraphCertificate {
    let classes = twin_partition(g, dec);
    let mut large: Vec<usize> = (0..classes.len()).collect();
    let mut x = dec.separator.len();
    let mut small: Vec<VertexId> = Vec::new();
    // A class that is not large stays so as the fixed part grows, so the
    // result does not depend on which class is folded first.
    while let Some(i) = large
        .iter()
        .position(|&c| threshold.value(pages, dec.p, x).map_or(true, |k| (classes[c].len() as u64) < k))
    {
        let c = large.remove(i);
        for m in &classes[c].members {
            small.extend(m);
            x += m.len();
        }
    }
    small.sort_unstable();
    let k = threshold.value(pages, dec.p, x);

    let mut removed = vec![0; classes.len()];
    let mut template = Vec::new();
    let mut groups = Vec::new();
    if let Some(k) = k.filter(|_| !large.is_empty()) {
        let k = k as usize;
        for &c in &large {
            removed[c] = classes[c].len() - k;
            template.extend((0..classes[c].representative.len()).map(|o| (c, o)));
        }
        groups = (0..k)
            .map(|j| template.iter().map(|&(c, o)| classes[c].members[j][o]).collect())
            .collect();
    }

    let mut kept: Vec<VertexId> = dec.separator.iter().chain(&small).chain(groups.iter().flatten()).copied().collect();
    kept.sort_unstable();
    ReducedGraphCertificate {
        g_reduced: g.induced_subgraph(&kept),
        kept,
        p: dec.p,
        pages,
        separator: dec.separator.clone(),
        small,
        twin_classes: classes,
        large_classes: large,
        template,
        groups,
        threshold: k,
        removed,
        full_n: g.n(),
    }
}

/// A complete solver run on the kernel and, when needed, on the full graph.
#[derive(Debug, Clone, Copy)]
pub enum InnerSolver {
    Oracle(OracleOptions),
    /// The cut-set dynamic program with the page width cap set to `m`,
    /// optionally limited in materialized states.
    Cutset { max_states: Option<usize> },
}

impl InnerSolver {
    pub fn solve(&self, g: &Graph, kind: LayoutKind, pages: usize) -> Result<Option<LinearLayout>, KernelError> {
        match self {
            InnerSolver::Oracle(opts) => {
                find_layout(g, &OracleQuery::new(kind, pages, None), opts).map_err(|e| match e {
                    OracleError::TooLarge { .. } | OracleError::StateLimit(_) => KernelError::InnerRefused(e.to_string()),
                    OracleError::InvalidQuery(_) => KernelError::Inner(e.to_string()),
                })
            }
            InnerSolver::Cutset { max_states } => {
                let mut opts = SearchOptions {
                    max_states: *max_states,
                    ..Default::default()
                };
                let r = solve_components(g, kind, pages, g.m().max(1), &mut opts).map_err(|e| match e {
                    CutsetError::StateLimit(_) => KernelError::InnerRefused(e.to_string()),
                    _ => KernelError::Inner(e.to_string()),
                })?;
                Ok(match r.outcome {
                    CutsetOutcome::Found(l) => Some(l),
                    _ => None,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelPath {
    /// Nothing was pruned; the inner solver ran on the input itself.
    WholeGraph,
    /// The kernel, an induced subgraph, has no layout.
    KernelInfeasible,
    /// A kernel layout was lifted.
    Lifted,
    /// Fewer than 5 large groups; solved the full graph instead.
    FallbackTooFewGroups,
    /// No kernel layout qualified for lifting; solved the full graph instead.
    FallbackNoTriple,
}

#[derive(Debug, Clone)]
pub struct KernelRun {
    pub layout: Option<LinearLayout>,
    pub path: KernelPath,
    pub p: usize,
    pub kernel_n: usize,
    pub kernel_m: usize,
    pub pruned: usize,
    pub threshold: Option<u64>,
    /// Larger thresholds tried after a failed triple search.
    pub retries: usize,
}

const MAX_RETRIES: usize = 2;

/// Decides `pages`-page solvability of `g` through the kernel. The verdict
/// always equals the inner solver's verdict on `g`.
pub fn solve_via_kernel(
    g: &Graph,
    kind: LayoutKind,
    pages: usize,
    threshold: &Threshold,
    inner: &InnerSolver,
) -> Result<KernelRun, KernelError> {
    let dec = compute_vertex_integrity(g, None)?;
    let mut threshold = threshold.clone();
    let mut retries = 0;
    loop {
        let cert = build_reduced_graph(g, &dec, pages, &threshold);
        let mut run = KernelRun {
            layout: None,
            path: KernelPath::WholeGraph,
            p: dec.p,
            kernel_n: cert.g_reduced.n(),
            kernel_m: cert.g_reduced.m(),
            pruned: cert.pruned(),
            threshold: cert.threshold,
            retries,
        };
        if cert.pruned() == 0 {
            run.layout = inner.solve(g, kind, pages)?;
            return Ok(run);
        }
        let Some(kernel_layout) = inner.solve(&cert.g_reduced, kind, pages)? else {
            run.path = KernelPath::KernelInfeasible;
            return Ok(run);
        };
        let reason = match find_guiding_sublayout(&kernel_layout, &cert) {
            Ok(Some(guide)) => {
                run.layout = Some(lift_layout(&guide, &cert, g)?);
                run.path = KernelPath::Lifted;
                return Ok(run);
            }
            Ok(None) => KernelPath::FallbackNoTriple,
            Err(KernelError::TooFewGroups(_)) => KernelPath::FallbackTooFewGroups,
            Err(e) => return Err(e),
        };
        match threshold {
            Threshold::Constant(t) if reason == KernelPath::FallbackNoTriple && retries < MAX_RETRIES => {
                threshold = Threshold::Constant(t + 1);
                retries += 1;
            }
            _ => {
                run.layout = inner.solve(g, kind, pages)?;
                run.path = reason;
                return Ok(run);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::layout::validate_layout;

    #[test]
    fn paper_threshold_values() {
        assert_eq!(paper_threshold(1, 1, 0), Some(2));
        assert_eq!(paper_threshold(1, 0, 1), Some(4));
        assert_eq!(paper_threshold(1, 1, 1), None);
        assert_eq!(paper_threshold_exponent(2, 1, 3), BigUint::from(2u32 * 9 * 4096));
        assert!(paper_threshold_exponent(1, 10, 5).bits() > 1200);
    }

    #[test]
    fn kernel_size_bound() {
        assert!(kernel_size_bound_holds(0, 1, 0));
        assert!(!kernel_size_bound_holds(2, 1, 0));
        assert!(kernel_size_bound_holds(131_078, 1, 1));
        assert!(!kernel_size_bound_holds(131_079, 1, 1));
        assert!(kernel_size_bound_holds(usize::MAX, 1, 2));
    }

    #[test]
    fn star_keeps_three_pendants() {
        let g = generate::star(10);
        let dec = compute_vertex_integrity(&g, None).unwrap();
        let cert = build_reduced_graph(&g, &dec, 1, &Threshold::Constant(3));
        assert_eq!(cert.g_reduced.n(), 4);
        assert_eq!(cert.groups.len(), 3);
        assert_eq!(cert.removed, [7]);
        assert!(cert.small.is_empty());
    }

    #[test]
    fn default_threshold_keeps_everything() {
        let core = Graph::from_edges([("a", "b"), ("b", "c")]).unwrap();
        let copy = Graph::from_edges([("x", "y")]).unwrap();
        let g = generate::twin_gadget(&core, &copy, &[("x", "a"), ("y", "c")], 8).unwrap();
        let dec = compute_vertex_integrity(&g, None).unwrap();
        let cert = build_reduced_graph(&g, &dec, 2, &Threshold::Paper);
        assert_eq!(cert.pruned(), 0);
        assert_eq!(cert.g_reduced, g);
        assert!(cert.large_classes.is_empty());
        assert!(kernel_size_bound_holds(cert.g_reduced.n(), 2, dec.p));
    }

    #[test]
    fn star_lifts_to_one_page() {
        let g = generate::star(10);
        let inner = InnerSolver::Oracle(OracleOptions::default());
        let run = solve_via_kernel(&g, LayoutKind::Stack, 1, &Threshold::Constant(5), &inner).unwrap();
        assert_eq!(run.path, KernelPath::Lifted);
        let layout = run.layout.unwrap();
        assert!(validate_layout(&g, &layout).unwrap().is_ok());
        assert_eq!(layout.spine.len(), 11);
    }

    #[test]
    fn clique_with_triangles_agrees_with_oracle() {
        let core = generate::complete(3);
        let copy = Graph::from_edges([("a", "b"), ("b", "c"), ("a", "c")]).unwrap();
        let attach = [("a", "v0"), ("b", "v0"), ("c", "v1")];
        let g = generate::twin_gadget(&core, &copy, &attach, 12).unwrap();
        let inner = InnerSolver::Oracle(OracleOptions { max_n: 40, ..Default::default() });
        // One page is ruled out by the kernel alone, an induced subgraph.
        let run = solve_via_kernel(&g, LayoutKind::Stack, 1, &Threshold::Constant(5), &inner).unwrap();
        assert_eq!(run.path, KernelPath::KernelInfeasible);
        assert!(run.layout.is_none());
        let run = solve_via_kernel(&g, LayoutKind::Stack, 2, &Threshold::Constant(5), &inner).unwrap();
        assert_eq!(run.path, KernelPath::Lifted);
        assert_eq!(run.kernel_n, 18);
        assert!(validate_layout(&g, &run.layout.unwrap()).unwrap().is_ok());
    }

    #[test]
    fn full_witnesses_restrict_to_the_kernel() {
        let opts = OracleOptions { max_n: 20, ..Default::default() };
        let core = generate::path(3);
        let copy = Graph::from_edges([("x", "y")]).unwrap();
        for attach in [&[("x", "v0")][..], &[("x", "v0"), ("y", "v2")], &[("x", "v1"), ("y", "v1")]] {
            let g = generate::twin_gadget(&core, &copy, attach, 7).unwrap();
            let dec = compute_vertex_integrity(&g, None).unwrap();
            for kind in [LayoutKind::Stack, LayoutKind::Queue] {
                for pages in 1..=2 {
                    let Some(full) = find_layout(&g, &OracleQuery::new(kind, pages, None), &opts).unwrap() else {
                        continue;
                    };
                    let cert = build_reduced_graph(&g, &dec, pages, &Threshold::Constant(5));
                    let keep: Vec<String> = full
                        .spine
                        .iter()
                        .filter(|v| cert.g_reduced.vertex(v).is_some())
                        .cloned()
                        .collect();
                    let restricted = guide::restrict(&full, &keep);
                    assert!(validate_layout(&cert.g_reduced, &restricted).unwrap().is_ok());
                }
            }
        }
    }
}
