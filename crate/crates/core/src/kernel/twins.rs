//! Twin classes of the components of `G - S`.
//!
//! Two components are twins when an isomorphism between them also preserves
//! every vertex's neighborhood in `S`. The isomorphism used for each member
//! is the first one found when the member's vertices, in increasing id
//! order, are matched against the representative's in increasing id order.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::{Graph, VertexId};

use super::integrity::ViDecomposition;

/// `members[j][i]` is the vertex of member `j` that the isomorphism sends to
/// `representative[i]`. `members[0]` is the representative itself, and
/// members are ordered by their smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwinClass {
    pub representative: Vec<VertexId>,
    pub members: Vec<Vec<VertexId>>,
}

impl TwinClass {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The map of member `j` onto the representative, as `(member vertex,
    /// representative vertex)` pairs.
    pub fn iso(&self, j: usize) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.members[j].iter().copied().zip(self.representative.iter().copied())
    }
}

struct Piece<'a> {
    g: &'a Graph,
    vertices: &'a [VertexId],
    /// Neighbors in the separator, as positions in it.
    attach: Vec<Vec<usize>>,
    degree: Vec<usize>,
}

impl<'a> Piece<'a> {
    fn new(g: &'a Graph, vertices: &'a [VertexId], sep_index: &BTreeMap<VertexId, usize>) -> Self {
        let attach = vertices
            .iter()
            .map(|&v| {
                let mut a: Vec<usize> = g.neighbors(v).iter().filter_map(|w| sep_index.get(w).copied()).collect();
                a.sort_unstable();
                a
            })
            .collect();
        let degree = vertices.iter().map(|&v| g.degree(v)).collect();
        Piece {
            g,
            vertices,
            attach,
            degree,
        }
    }

    /// Isomorphism-invariant fingerprint.
    fn signature(&self) -> (usize, Vec<(usize, Vec<usize>)>) {
        let mut profile: Vec<(usize, Vec<usize>)> =
            self.degree.iter().copied().zip(self.attach.iter().cloned()).collect();
        profile.sort();
        (self.vertices.len(), profile)
    }
}

/// First attachment-preserving isomorphism from `a` onto `b`: `image[i]` is
/// the index in `b` of the image of `a`'s `i`-th vertex.
fn isomorphism(a: &Piece<'_>, b: &Piece<'_>) -> Option<Vec<usize>> {
    fn extend(a: &Piece<'_>, b: &Piece<'_>, image: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let i = image.len();
        if i == a.vertices.len() {
            return true;
        }
        for j in 0..b.vertices.len() {
            if used[j] || a.degree[i] != b.degree[j] || a.attach[i] != b.attach[j] {
                continue;
            }
            let fits = (0..i).all(|k| {
                a.g.has_edge(a.vertices[i], a.vertices[k]) == b.g.has_edge(b.vertices[j], b.vertices[image[k]])
            });
            if !fits {
                continue;
            }
            image.push(j);
            used[j] = true;
            if extend(a, b, image, used) {
                return true;
            }
            image.pop();
            used[j] = false;
        }
        false
    }
    let mut image = Vec::with_capacity(a.vertices.len());
    let mut used = vec![false; b.vertices.len()];
    extend(a, b, &mut image, &mut used).then_some(image)
}

/// Partitions the components of `G - S` into twin classes. Classes are
/// ordered by their representative's smallest vertex.
pub fn twin_partition(g: &Graph, dec: &ViDecomposition) -> Vec<TwinClass> {
    let sep_index: BTreeMap<VertexId, usize> = dec.separator.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let pieces: Vec<Piece<'_>> = dec.components.iter().map(|c| Piece::new(g, c, &sep_index)).collect();
    let mut classes: Vec<TwinClass> = Vec::new();
    let mut rep_piece: Vec<usize> = Vec::new();
    let mut by_signature: BTreeMap<(usize, Vec<(usize, Vec<usize>)>), Vec<usize>> = BTreeMap::new();
    for (pi, piece) in pieces.iter().enumerate() {
        let bucket = by_signature.entry(piece.signature()).or_default();
        let found = bucket.iter().find_map(|&c| {
            let rep = &pieces[rep_piece[c]];
            // Map the representative onto this piece so that the alignment
            // reads off directly.
            isomorphism(rep, piece).map(|image| (c, image))
        });
        match found {
            Some((c, image)) => {
                let aligned = image.iter().map(|&j| piece.vertices[j]).collect();
                classes[c].members.push(aligned);
            }
            None => {
                bucket.push(classes.len());
                rep_piece.push(pi);
                classes.push(TwinClass {
                    representative: piece.vertices.to_vec(),
                    members: vec![piece.vertices.to_vec()],
                });
            }
        }
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::kernel::integrity::compute_vertex_integrity;

    fn classes_by_name(g: &Graph, classes: &[TwinClass]) -> Vec<Vec<Vec<String>>> {
        classes
            .iter()
            .map(|c| {
                c.members
                    .iter()
                    .map(|m| m.iter().map(|&v| g.name(v).to_string()).collect())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn gadget_copies_form_one_class() {
        let core = Graph::from_edges([("a", "b"), ("b", "c"), ("a", "c")]).unwrap();
        let copy = Graph::from_edges([("x", "y")]).unwrap();
        let g = generate::twin_gadget(&core, &copy, &[("x", "a")], 4).unwrap();
        let dec = compute_vertex_integrity(&g, None).unwrap();
        assert_eq!(dec.separator, [g.vertex("a").unwrap()]);
        let classes = twin_partition(&g, &dec);
        let names = classes_by_name(&g, &classes);
        assert_eq!(names.len(), 2);
        assert_eq!(names[0], [["b", "c"]]);
        assert_eq!(names[1].len(), 4);
        for (j, m) in names[1].iter().enumerate() {
            assert_eq!(m, &[format!("x_{j}"), format!("y_{j}")]);
        }
    }

    #[test]
    fn attachments_separate_isomorphic_components() {
        // Two pendant paths, one hanging by its end and one by its middle.
        let g = Graph::from_edges([("s", "a"), ("a", "b"), ("b", "c"), ("s", "e"), ("d", "e"), ("e", "f")]).unwrap();
        let dec = ViDecomposition::from_separator(&g, &[g.vertex("s").unwrap()]);
        assert_eq!(twin_partition(&g, &dec).len(), 2);
        let h = Graph::from_edges([("s", "a"), ("a", "b"), ("s", "c"), ("c", "d")]).unwrap();
        let dec = ViDecomposition::from_separator(&h, &[h.vertex("s").unwrap()]);
        assert_eq!(twin_partition(&h, &dec).len(), 1);
    }

    #[test]
    fn alignment_is_an_isomorphism() {
        let core = Graph::from_edges([("a", "b")]).unwrap();
        let copy = Graph::from_edges([("x", "y"), ("y", "z"), ("x", "z")]).unwrap();
        let g = generate::twin_gadget(&core, &copy, &[("x", "a"), ("y", "a"), ("z", "b")], 5).unwrap();
        let dec = ViDecomposition::from_separator(&g, &[0, 1]);
        let classes = twin_partition(&g, &dec);
        assert_eq!(classes.len(), 1);
        let c = &classes[0];
        for j in 0..c.len() {
            for (u, ru) in c.iso(j) {
                for (v, rv) in c.iso(j) {
                    assert_eq!(g.has_edge(u, v), g.has_edge(ru, rv));
                }
                for &s in &dec.separator {
                    assert_eq!(g.has_edge(u, s), g.has_edge(ru, s));
                }
            }
        }
    }

    /// Twins by trying every bijection.
    fn brute_twins(g: &Graph, sep: &[VertexId], a: &[VertexId], b: &[VertexId]) -> bool {
        use itertools::Itertools;
        a.len() == b.len()
            && b.iter().copied().permutations(b.len()).any(|img| {
                (0..a.len()).all(|i| {
                    (0..a.len()).all(|j| g.has_edge(a[i], a[j]) == g.has_edge(img[i], img[j]))
                        && sep.iter().all(|&s| g.has_edge(a[i], s) == g.has_edge(img[i], s))
                })
            })
    }

    proptest::proptest! {
        #[test]
        fn classes_match_pairwise_twin_tests(n in 3usize..10, density in 0.0f64..0.5, seed in 0u64..1000, sep_mask in 0u32..512) {
            let m = ((n * (n - 1) / 2) as f64 * density) as usize;
            let g = generate::random_gnm(n, m, seed).unwrap();
            let sep: Vec<VertexId> = (0..n).filter(|&v| sep_mask >> v & 1 == 1).collect();
            let dec = ViDecomposition::from_separator(&g, &sep);
            proptest::prop_assume!(dec.components.iter().all(|c| c.len() <= 6));
            let classes = twin_partition(&g, &dec);
            let class_of = |comp: &Vec<VertexId>| {
                classes.iter().position(|c| c.members.iter().any(|m| {
                    let mut m = m.clone();
                    m.sort_unstable();
                    &m == comp
                }))
            };
            let ids: Vec<usize> = dec.components.iter().map(|c| class_of(c).expect("every component is classified")).collect();
            proptest::prop_assert_eq!(classes.iter().map(TwinClass::len).sum::<usize>(), dec.components.len());
            for (i, a) in dec.components.iter().enumerate() {
                for (j, b) in dec.components.iter().enumerate() {
                    proptest::prop_assert_eq!(ids[i] == ids[j], brute_twins(&g, &dec.separator, a, b));
                }
            }
        }
    }
}
