//! From a labeled instance to level planarity and back.
//!
//! Levels of the reduced graph are doubled so that they stay integral: an
//! original level `i` becomes `2i + 1`, the half level between `i` and `i + 1`
//! becomes `2i + 2`, and the frame's bottom and top vertices sit on levels
//! `1` and `2h + 3`.

use std::collections::BTreeMap;

use crate::graph::{Graph, VertexId};
use crate::layout::{edge_key, validate_layout, LayoutKind, LinearLayout};

use super::planarity::{LevelEmbedding, LeveledGraph};
use super::{ArcTag, LevelAssignment, Labeling, Queue1Error};

/// A name prefix that no vertex of `g` starts with, used for generated vertices.
pub fn generated_prefix(g: &Graph) -> String {
    let mut prefix = String::from("~");
    while g.names().iter().any(|n| n.starts_with(&prefix)) {
        prefix.push('~');
    }
    prefix
}

/// The arching source of every level that has one; `None` if some level
/// would need two different sources.
pub fn arching_sources(g: &Graph, lab: &Labeling, levels: &LevelAssignment) -> Option<BTreeMap<usize, VertexId>> {
    let mut sources = BTreeMap::new();
    for e in 0..g.m() {
        if lab.tags[e] == ArcTag::Arching {
            let u = lab.arcs[e].0;
            if *sources.entry(levels.level[u]).or_insert(u) != u {
                return None;
            }
        }
    }
    Some(sources)
}

/// The level planarity instance of a labeled graph, or `None` when two
/// different vertices of one level are arching sources.
pub fn reduce_to_level_planarity(g: &Graph, lab: &Labeling, levels: &LevelAssignment) -> Option<LeveledGraph> {
    let sources = arching_sources(g, lab, levels)?;
    let h = levels.h;
    let p = generated_prefix(g);
    let bottom = format!("{p}bot");
    let top = format!("{p}top");
    let l = |i: usize| format!("{p}l{i}");
    let r = |i: usize| format!("{p}r{i}");

    let mut level: BTreeMap<String, usize> = BTreeMap::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    for v in 0..g.n() {
        level.insert(g.name(v).to_string(), 2 * levels.level[v] + 1);
    }

    // Frame: bottom, l_0 .. l_h, top, r_h .. r_0, with the sides subdivided
    // on every original level.
    level.insert(bottom.clone(), 1);
    level.insert(top.clone(), 2 * h + 3);
    for i in 0..=h {
        level.insert(l(i), 2 * i + 2);
        level.insert(r(i), 2 * i + 2);
    }
    edges.push((bottom.clone(), l(0)));
    edges.push((bottom, r(0)));
    edges.push((l(h), top.clone()));
    edges.push((r(h), top));
    for i in 1..=h {
        for (side, name) in [("fl", &l as &dyn Fn(usize) -> String), ("fr", &r)] {
            let mid = format!("{p}{side}{i}");
            level.insert(mid.clone(), 2 * i + 1);
            edges.push((name(i - 1), mid.clone()));
            edges.push((mid, name(i)));
        }
    }

    for e in 0..g.m() {
        let (u, v) = lab.arcs[e];
        let (un, vn) = (g.name(u).to_string(), g.name(v).to_string());
        match lab.tags[e] {
            ArcTag::Ordinary => {
                let lo = levels.level[u].min(levels.level[v]);
                let mid = format!("{p}s{e}");
                level.insert(mid.clone(), 2 * lo + 2);
                edges.push((un, mid.clone()));
                edges.push((mid, vn));
            }
            ArcTag::Arching => edges.push((vn, r(levels.level[u]))),
        }
    }
    for (&i, &u) in &sources {
        edges.push((g.name(u).to_string(), l(i - 1)));
        edges.push((g.name(u).to_string(), l(i)));
    }

    let g2 = Graph::new(level.keys(), edges.iter().map(|(a, b)| (a, b))).expect("reduced graph is simple");
    let lv: Vec<usize> = level.values().copied().collect();

    // Everything else is drawn inside the frame, with the l side on the left.
    // Attachments alone do not force this once the arching edges are gone:
    // a piece hanging only off the r side could sit outside and escape the
    // constraint its attachment is meant to express.
    let id = |name: &str| g2.vertex(name).unwrap();
    let mut fixed = Vec::new();
    for j in 2..=2 * h + 2 {
        let (left, right) = if j % 2 == 0 {
            (id(&l(j / 2 - 1)), id(&r(j / 2 - 1)))
        } else {
            (id(&format!("{p}fl{}", j / 2)), id(&format!("{p}fr{}", j / 2)))
        };
        fixed.push((left, right));
        for x in (0..g2.n()).filter(|&x| lv[x] == j && x != left && x != right) {
            fixed.push((left, x));
            fixed.push((x, right));
        }
    }
    Some(LeveledGraph {
        g: g2,
        levels: LevelAssignment {
            level: lv,
            h: 2 * h + 3,
        },
        fixed,
    })
}

/// Reads the arched leveled embedding of `g` off a drawing of its reduced
/// instance and turns it into a one-page queue layout: each level's order
/// reversed, levels from bottom to top.
pub fn embedding_to_queue_layout(
    g: &Graph,
    lab: &Labeling,
    levels: &LevelAssignment,
    emb: &LevelEmbedding,
) -> Result<LinearLayout, Queue1Error> {
    let internal = |msg: String| Err(Queue1Error::Internal(msg));
    let p = generated_prefix(g);
    let h = levels.h;
    if emb.orders.len() != 2 * h + 3 {
        return internal(format!("embedding has {} levels, expected {}", emb.orders.len(), 2 * h + 3));
    }
    let mut orders: Vec<Vec<VertexId>> = (1..=h)
        .map(|i| emb.orders[2 * i].iter().filter_map(|name| g.vertex(name)).collect())
        .collect();
    // A drawing of the reduced instance has the l side on the left; accept a
    // reflected one too.
    let side = |name: String| emb.orders[1].iter().position(|x| *x == name);
    if let (Some(a), Some(b)) = (side(format!("{p}l0")), side(format!("{p}r0"))) {
        if a > b {
            orders.iter_mut().for_each(|o| o.reverse());
        }
    }

    let mut pos = vec![usize::MAX; g.n()];
    for (i, order) in orders.iter().enumerate() {
        for (k, &v) in order.iter().enumerate() {
            if levels.level[v] != i + 1 || pos[v] != usize::MAX {
                return internal(format!("vertex `{}` misplaced in the embedding", g.name(v)));
            }
            pos[v] = k;
        }
    }
    if let Some(v) = pos.iter().position(|&x| x == usize::MAX) {
        return internal(format!("vertex `{}` missing from the embedding", g.name(v)));
    }

    // Side conditions of an arched embedding: the source is leftmost on its
    // level and every target is at or right of the last vertex with an edge
    // to the level above.
    for e in 0..g.m() {
        if lab.tags[e] != ArcTag::Arching {
            continue;
        }
        let (u, v) = lab.arcs[e];
        let i = levels.level[u];
        let upper: Option<usize> = (0..g.m())
            .filter(|&f| lab.tags[f] == ArcTag::Ordinary)
            .map(|f| lab.arcs[f])
            .filter(|&(a, _)| levels.level[a] == i)
            .map(|(a, _)| pos[a])
            .max();
        if pos[u] != 0 || pos[v] < upper.unwrap_or(0) {
            return internal(format!(
                "arching edge `{} {}` violates the arched embedding conditions",
                g.name(u),
                g.name(v)
            ));
        }
    }

    let spine: Vec<String> = orders
        .iter()
        .flat_map(|o| o.iter().rev().map(|&v| g.name(v).to_string()))
        .collect();
    let pages = (0..g.m())
        .map(|e| {
            let (a, b) = g.edge_names(e);
            (edge_key(a, b), 0)
        })
        .collect();
    let layout = LinearLayout {
        kind: LayoutKind::Queue,
        page_count: 1,
        spine,
        pages,
    };
    match validate_layout(g, &layout) {
        Ok(report) if report.is_ok() => Ok(layout),
        Ok(report) => internal(format!("extracted layout has nesting edges: {:?}", report.violations)),
        Err(err) => internal(format!("extracted layout is malformed: {err}")),
    }
}
