//! Finding three large groups that a kernel layout treats alike, and
//! replicating their pattern for every member of the full graph.
//!
//! Every kept group is a copy of the template `R`. Two groups `L`, `L'` are
//! set aside; for any other pair `A ≺ B` (the first vertex of `A ∪ B` lies in
//! `A`) the layout of the fixed part together with `A` and `B` is read as a
//! layout of the fixed part with `L` and `L'`. Three groups with pairwise
//! equal readings are laid out in interleaved blocks, which is enough to
//! place arbitrarily many more copies.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::graph::{Graph, VertexId};
use crate::layout::{edge_key, validate_layout, EdgeKey, LinearLayout};

use super::{KernelError, ReducedGraphCertificate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// The copies of the block appear as X, Y, Z from left to right.
    Ascending,
    Descending,
}

/// Consecutive template positions, in the order of the template layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub positions: Vec<usize>,
    pub direction: Direction,
}

/// An element of the template layout: a vertex of the fixed part or a
/// template position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PrimeItem {
    Fixed(VertexId),
    Template(usize),
}

#[derive(Debug, Clone)]
pub struct GuidingSublayout {
    /// Indices into the certificate's groups.
    pub l: [usize; 2],
    pub x: usize,
    pub y: usize,
    pub z: usize,
    /// The order of the fixed part and the template shared by X, Y and Z.
    pub prime_order: Vec<PrimeItem>,
    pub blocks: Vec<Block>,
    /// The kernel layout restricted to the fixed part, X, Y and Z.
    pub base_layout: LinearLayout,
    pub kernel_layout: LinearLayout,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Tok {
    Fixed(VertexId),
    Slot(u8, usize),
}

type Info = (Vec<Tok>, Vec<(Tok, Tok, usize)>);

struct View<'a> {
    cert: &'a ReducedGraphCertificate,
    /// Kernel spine as input-graph ids.
    spine: Vec<VertexId>,
    pos: HashMap<VertexId, usize>,
    pages: &'a BTreeMap<EdgeKey, usize>,
    fixed: Vec<bool>,
    /// Group and template position of every kept group vertex.
    place: HashMap<VertexId, (usize, usize)>,
}

impl<'a> View<'a> {
    fn new(layout: &'a LinearLayout, cert: &'a ReducedGraphCertificate) -> Result<Self, KernelError> {
        let g = &cert.g_reduced;
        let report = validate_layout(g, layout).map_err(|e| KernelError::LayoutMismatch(e.to_string()))?;
        if !report.is_ok() || layout.page_count != cert.pages {
            return Err(KernelError::LayoutMismatch(format!(
                "not a valid {}-page layout of the kernel",
                cert.pages
            )));
        }
        let spine: Vec<VertexId> = layout.spine.iter().map(|s| cert.kept[g.vertex(s).expect("validated")]).collect();
        let pos = spine.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut fixed = vec![false; cert.full_n];
        for v in cert.fixed() {
            fixed[v] = true;
        }
        let place = cert
            .groups
            .iter()
            .enumerate()
            .flat_map(|(j, grp)| grp.iter().enumerate().map(move |(i, &v)| (v, (j, i))))
            .collect();
        Ok(View {
            cert,
            spine,
            pos,
            pages: &layout.pages,
            fixed,
            place,
        })
    }

    fn name(&self, v: VertexId) -> &str {
        let g = &self.cert.g_reduced;
        g.name(self.cert.kept.binary_search(&v).expect("kernel vertex"))
    }

    fn page(&self, u: VertexId, v: VertexId) -> usize {
        self.pages[&edge_key(self.name(u), self.name(v))]
    }

    fn tok(&self, v: VertexId, slots: &[usize]) -> Option<Tok> {
        if self.fixed[v] {
            return Some(Tok::Fixed(v));
        }
        let (j, i) = self.place[&v];
        slots.iter().position(|&s| s == j).map(|k| Tok::Slot(k as u8, i))
    }

    /// The layout of the fixed part plus the given groups, with group
    /// `slots[k]` renamed to slot `k`.
    fn info(&self, slots: &[usize]) -> Info {
        let order: Vec<Tok> = self.spine.iter().filter_map(|&v| self.tok(v, slots)).collect();
        let g = &self.cert.g_reduced;
        let mut edges: Vec<(Tok, Tok, usize)> = g
            .edges()
            .iter()
            .filter_map(|&(a, b)| {
                let (u, v) = (self.cert.kept[a], self.cert.kept[b]);
                let (tu, tv) = (self.tok(u, slots)?, self.tok(v, slots)?);
                Some((tu.min(tv), tu.max(tv), self.page(u, v)))
            })
            .collect();
        edges.sort_unstable();
        (order, edges)
    }

    fn first(&self, group: usize) -> usize {
        self.cert.groups[group].iter().map(|v| self.pos[v]).min().expect("groups are nonempty")
    }
}

/// Looks for three large groups whose pairwise readings agree and derives
/// the block structure of their layout. `None` if no triple qualifies.
pub fn find_guiding_sublayout(
    kernel_layout: &LinearLayout,
    cert: &ReducedGraphCertificate,
) -> Result<Option<GuidingSublayout>, KernelError> {
    if cert.groups.len() < 5 {
        return Err(KernelError::TooFewGroups(cert.groups.len()));
    }
    let view = View::new(kernel_layout, cert)?;
    let mut by_first: Vec<usize> = (0..cert.groups.len()).collect();
    by_first.sort_by_key(|&j| view.first(j));
    let l = [by_first[0], by_first[1]];
    let rest = &by_first[2..];

    let mut ids: HashMap<Info, usize> = HashMap::new();
    let r = rest.len();
    let mut table = vec![vec![usize::MAX; r]; r];
    for a in 0..r {
        for b in a + 1..r {
            let next = ids.len();
            table[a][b] = *ids.entry(view.info(&[rest[a], rest[b]])).or_insert(next);
        }
    }
    let triple = (0..r).find_map(|a| {
        (a + 1..r).find_map(|b| {
            (b + 1..r)
                .find(|&c| table[a][b] == table[b][c] && table[a][b] == table[a][c])
                .map(|c| (rest[a], rest[b], rest[c]))
        })
    });
    let Some((x, y, z)) = triple else {
        return Ok(None);
    };

    // Each copy, read alone against the fixed part, gives the same order
    // and the same pages; the pairwise agreement implies it.
    let prime = view.info(&[x]);
    for other in [y, z] {
        if view.info(&[other]) != prime {
            return Err(KernelError::LiftInvalid("copies of a qualifying triple disagree".into()));
        }
    }
    let prime_order: Vec<PrimeItem> = prime
        .0
        .iter()
        .map(|t| match *t {
            Tok::Fixed(v) => PrimeItem::Fixed(v),
            Tok::Slot(_, i) => PrimeItem::Template(i),
        })
        .collect();

    let Some(blocks) = sweep(&view, &prime_order, [x, y, z]) else {
        return Ok(None);
    };

    let upsilon: Vec<VertexId> = view
        .spine
        .iter()
        .copied()
        .filter(|&v| view.tok(v, &[x, y, z]).is_some())
        .collect();
    let base_layout = restrict(kernel_layout, &upsilon.iter().map(|&v| view.name(v).to_string()).collect::<Vec<_>>());
    Ok(Some(GuidingSublayout {
        l,
        x,
        y,
        z,
        prime_order,
        blocks,
        base_layout,
        kernel_layout: kernel_layout.clone(),
    }))
}

/// Splits the template into maximal runs whose X copies sit together, and
/// checks that the three copies of every run form one contiguous stretch.
fn sweep(view: &View<'_>, prime_order: &[PrimeItem], [x, y, z]: [usize; 3]) -> Option<Vec<Block>> {
    let groups = &view.cert.groups;
    let restricted: Vec<VertexId> =
        view.spine.iter().copied().filter(|&v| view.tok(v, &[x, y, z]).is_some()).collect();
    let at: HashMap<VertexId, usize> = restricted.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // Template positions in prime order, with their index in `prime_order`.
    let template: Vec<(usize, usize)> = prime_order
        .iter()
        .enumerate()
        .filter_map(|(k, item)| match *item {
            PrimeItem::Template(i) => Some((k, i)),
            PrimeItem::Fixed(_) => None,
        })
        .collect();

    let mut blocks = Vec::new();
    let mut s = 0;
    while s < template.len() {
        let u = template[s].1;
        let (px, py, pz) = (at[&groups[x][u]], at[&groups[y][u]], at[&groups[z][u]]);
        let (direction, lead, copies) = if px < py && py < pz {
            (Direction::Ascending, x, [x, y, z])
        } else if pz < py && py < px {
            (Direction::Descending, z, [z, y, x])
        } else {
            return None;
        };
        let mut e = s;
        while e + 1 < template.len()
            && template[e + 1].0 == template[e].0 + 1
            && at[&groups[lead][template[e + 1].1]] == at[&groups[lead][template[e].1]] + 1
        {
            e += 1;
        }
        let positions: Vec<usize> = template[s..=e].iter().map(|&(_, i)| i).collect();
        let start = at[&groups[lead][u]];
        let expected = copies.iter().flat_map(|&c| positions.iter().map(move |&i| groups[c][i]));
        if !expected.enumerate().all(|(k, v)| restricted.get(start + k) == Some(&v)) {
            return None;
        }
        blocks.push(Block { positions, direction });
        s = e + 1;
    }
    Some(blocks)
}

pub(crate) fn restrict(layout: &LinearLayout, spine: &[String]) -> LinearLayout {
    let keep: std::collections::HashSet<&str> = spine.iter().map(String::as_str).collect();
    LinearLayout {
        kind: layout.kind,
        page_count: layout.page_count,
        spine: spine.to_vec(),
        pages: layout
            .pages
            .iter()
            .filter(|((a, b), _)| keep.contains(a.as_str()) && keep.contains(b.as_str()))
            .map(|(k, &p)| (k.clone(), p))
            .collect(),
    }
}

/// Replaces every block of the template order by the copies of all members,
/// left to right for ascending blocks and right to left for descending ones,
/// and copies every page through the Y group.
pub fn lift_layout(
    guide: &GuidingSublayout,
    cert: &ReducedGraphCertificate,
    g_full: &Graph,
) -> Result<LinearLayout, KernelError> {
    if g_full.n() != cert.full_n
        || cert.kept.iter().enumerate().any(|(i, &v)| cert.g_reduced.name(i) != g_full.name(v))
    {
        return Err(KernelError::GraphMismatch("kernel vertices are not where the certificate puts them".into()));
    }
    if cert.pruned() == 0 {
        return Ok(guide.kernel_layout.clone());
    }
    let classes = &cert.twin_classes;
    let t = cert.large_classes.iter().map(|&c| classes[c].len()).max().unwrap_or(0);
    let copy = |j: usize, i: usize| {
        let (c, o) = cert.template[i];
        classes[c].members.get(j).map(|m| m[o])
    };

    let mut block_of: HashMap<usize, usize> = HashMap::new();
    for (b, block) in guide.blocks.iter().enumerate() {
        block_of.insert(block.positions[0], b);
    }
    let mut order: Vec<VertexId> = Vec::with_capacity(g_full.n());
    for item in &guide.prime_order {
        match *item {
            PrimeItem::Fixed(v) => order.push(v),
            PrimeItem::Template(i) => {
                let Some(&b) = block_of.get(&i) else { continue };
                let block = &guide.blocks[b];
                let members: Vec<usize> = match block.direction {
                    Direction::Ascending => (0..t).collect(),
                    Direction::Descending => (0..t).rev().collect(),
                };
                for j in members {
                    order.extend(block.positions.iter().filter_map(|&i| copy(j, i)));
                }
            }
        }
    }

    // Stand-in in the Y group for every vertex of a large class.
    let mut through_y: HashMap<VertexId, VertexId> = HashMap::new();
    for (i, &(c, o)) in cert.template.iter().enumerate() {
        for m in &classes[c].members {
            through_y.insert(m[o], cert.groups[guide.y][i]);
        }
    }
    let image = |v: VertexId| through_y.get(&v).copied().unwrap_or(v);
    let mut pages = BTreeMap::new();
    for &(u, v) in g_full.edges() {
        let key = edge_key(g_full.name(image(u)), g_full.name(image(v)));
        let Some(&p) = guide.base_layout.pages.get(&key) else {
            return Err(KernelError::LiftInvalid(format!(
                "no page for edge `{} {}`",
                g_full.name(u),
                g_full.name(v)
            )));
        };
        pages.insert(edge_key(g_full.name(u), g_full.name(v)), p);
    }
    let layout = LinearLayout {
        kind: guide.base_layout.kind,
        page_count: guide.base_layout.page_count,
        spine: order.iter().map(|&v| g_full.name(v).to_string()).collect(),
        pages,
    };
    match validate_layout(g_full, &layout) {
        Ok(report) if report.is_ok() => Ok(layout),
        Ok(report) => Err(KernelError::LiftInvalid(format!("{} conflicting edge pairs", report.violations.len()))),
        Err(e) => Err(KernelError::LiftInvalid(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::kernel::{build_reduced_graph, compute_vertex_integrity, Threshold};
    use crate::layout::LayoutKind;

    /// `s` with `k` pendant edges `u_j w_j`, attached at `u_j`.
    fn fan(k: usize) -> Graph {
        let core = Graph::new(["s"], Vec::<(&str, &str)>::new()).unwrap();
        let copy = Graph::from_edges([("u", "w")]).unwrap();
        generate::twin_gadget(&core, &copy, &[("u", "s")], k).unwrap()
    }

    fn cert(g: &Graph, threshold: u64) -> ReducedGraphCertificate {
        cert_with_pages(g, threshold, 1)
    }

    fn cert_with_pages(g: &Graph, threshold: u64, pages: usize) -> ReducedGraphCertificate {
        let dec = compute_vertex_integrity(g, None).unwrap();
        build_reduced_graph(g, &dec, pages, &Threshold::Constant(threshold))
    }

    fn one_page(g: &Graph, spine: &str) -> LinearLayout {
        LinearLayout {
            kind: LayoutKind::Stack,
            page_count: 1,
            spine: spine.split_whitespace().map(String::from).collect(),
            pages: g.edges().iter().map(|&(a, b)| (edge_key(g.name(a), g.name(b)), 0)).collect(),
        }
    }

    /// Edges at `s` on the first page, the copies' edges on the second.
    fn two_pages(g: &Graph, spine: &str) -> LinearLayout {
        let mut l = one_page(g, spine);
        l.page_count = 2;
        for (k, p) in l.pages.iter_mut() {
            *p = usize::from(k.0 != "s" && k.1 != "s");
        }
        l
    }

    #[test]
    fn ascending_then_descending_block() {
        let g = fan(8);
        let c = cert_with_pages(&g, 5, 2);
        assert_eq!(c.groups.len(), 5);
        let kl = two_pages(&c.g_reduced, "u_0 w_0 u_1 w_1 s u_2 u_3 u_4 w_4 w_3 w_2");
        let guide = find_guiding_sublayout(&kl, &c).unwrap().unwrap();
        assert_eq!(guide.l, [0, 1]);
        assert_eq!((guide.x, guide.y, guide.z), (2, 3, 4));
        let u = c.template.iter().position(|&(_, o)| g.name(c.twin_classes[0].representative[o]) == "u_0");
        let (u, w) = (u.unwrap(), 1 - u.unwrap());
        assert_eq!(
            guide.blocks,
            [
                Block { positions: vec![u], direction: Direction::Ascending },
                Block { positions: vec![w], direction: Direction::Descending },
            ]
        );
        assert_eq!(guide.base_layout.spine.join(" "), "s u_2 u_3 u_4 w_4 w_3 w_2");

        let lifted = lift_layout(&guide, &c, &g).unwrap();
        let us = (0..8).map(|j| format!("u_{j}"));
        let ws = (0..8).rev().map(|j| format!("w_{j}"));
        let expected: Vec<String> = std::iter::once("s".to_string()).chain(us).chain(ws).collect();
        assert_eq!(lifted.spine, expected);
        assert_eq!(lifted.page_count, 2);
    }

    #[test]
    fn identical_groups_give_the_first_triple() {
        let g = fan(9);
        let c = cert(&g, 6);
        let kl = one_page(&c.g_reduced, "s u_0 w_0 u_1 w_1 u_2 w_2 u_3 w_3 u_4 w_4 u_5 w_5");
        let guide = find_guiding_sublayout(&kl, &c).unwrap().unwrap();
        assert_eq!((guide.l, guide.x, guide.y, guide.z), ([0, 1], 2, 3, 4));
        assert_eq!(guide.blocks.len(), 1);
        assert_eq!(guide.blocks[0].positions.len(), 2);
        assert_eq!(guide.blocks[0].direction, Direction::Ascending);
        let lifted = lift_layout(&guide, &c, &g).unwrap();
        assert_eq!(lifted.spine[0], "s");
        assert_eq!(lifted.spine[1..3], ["u_0", "w_0"]);
        assert_eq!(lifted.spine[17..], ["u_8", "w_8"]);
    }

    #[test]
    fn mismatched_readings_have_no_triple() {
        let g = fan(8);
        let c = cert(&g, 5);
        // Pairwise readings of groups 2, 3, 4 are all different.
        let kl = one_page(&c.g_reduced, "u_0 w_0 u_1 w_1 s u_2 w_2 w_3 u_3 u_4 w_4");
        assert!(validate_layout(&c.g_reduced, &kl).unwrap().is_ok());
        assert!(find_guiding_sublayout(&kl, &c).unwrap().is_none());
    }

    #[test]
    fn guide_needs_five_groups() {
        let g = fan(8);
        let c = cert(&g, 4);
        assert_eq!(c.groups.len(), 4);
        let kl = one_page(&c.g_reduced, "s u_0 w_0 u_1 w_1 u_2 w_2 u_3 w_3");
        assert!(matches!(find_guiding_sublayout(&kl, &c), Err(KernelError::TooFewGroups(4))));
        let bad = one_page(&c.g_reduced, "s u_0 u_1 w_0 w_1 u_2 w_2 u_3 w_3");
        let c5 = cert(&g, 5);
        assert!(matches!(find_guiding_sublayout(&bad, &c5), Err(KernelError::LayoutMismatch(_))));
    }

    #[test]
    fn no_pruning_lifts_to_the_kernel_layout() {
        let g = fan(5);
        let c = cert(&g, 5);
        assert_eq!(c.pruned(), 0);
        let kl = one_page(&c.g_reduced, "s u_0 w_0 u_1 w_1 u_2 w_2 u_3 w_3 u_4 w_4");
        let guide = find_guiding_sublayout(&kl, &c).unwrap().unwrap();
        assert_eq!(lift_layout(&guide, &c, &g).unwrap(), kl);
    }
}
