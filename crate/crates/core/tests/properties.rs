use booklayout::generate::random_gnm;
use booklayout::layout::{edge_count_bound, BoundVerdict};
use booklayout::oracle::{solve_exhaustive, solve_exhaustive_all, OracleOptions, OracleQuery};
use booklayout::{page_width, validate_layout, Graph, IndexedLayout, LayoutKind, LinearLayout};
use itertools::Itertools;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kind_of(stack: bool) -> LayoutKind {
    if stack {
        LayoutKind::Stack
    } else {
        LayoutKind::Queue
    }
}

fn graph(n: usize, density: f64, seed: u64) -> Graph {
    let total = n * (n - 1) / 2;
    random_gnm(n, (total as f64 * density).round() as usize, seed).unwrap()
}

/// A random spine and page assignment.
fn random_layout(g: &Graph, pages: usize, seed: u64) -> IndexedLayout {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(&mut rng);
    let page = (0..g.m()).map(|_| rng.gen_range(0..pages)).collect();
    IndexedLayout::new(order, page)
}

/// Conflicts straight from the definitions: two same-page edges with four
/// distinct endpoints at positions `u1 < u2` (left ends) conflict when they
/// interleave (stack) or when one lies strictly inside the other (queue).
fn naive_conflicts(g: &Graph, kind: LayoutKind, lay: &IndexedLayout) -> usize {
    let mut count = 0;
    for (e, f) in (0..g.m()).tuple_combinations() {
        if lay.page[e] != lay.page[f] {
            continue;
        }
        let (mut a, mut b) = lay.span(g, e);
        let (mut c, mut d) = lay.span(g, f);
        if c < a {
            std::mem::swap(&mut a, &mut c);
            std::mem::swap(&mut b, &mut d);
        }
        let distinct = [a, b, c, d].iter().all_unique();
        let bad = match kind {
            LayoutKind::Stack => distinct && a < c && c < b && b < d,
            LayoutKind::Queue => distinct && a < c && d < b,
        };
        count += bad as usize;
    }
    count
}

fn naive_width(g: &Graph, lay: &IndexedLayout, pages: usize) -> usize {
    let mut best = 0;
    for p in 0..pages {
        for gap in 0..g.n() {
            let c = (0..g.m())
                .filter(|&e| lay.page[e] == p)
                .filter(|&e| {
                    let (a, b) = lay.span(g, e);
                    a <= gap && gap < b
                })
                .count();
            best = best.max(c);
        }
    }
    best
}

/// Every `(spine, page assignment)` pair in lexicographic order, kept when
/// valid and within the width cap.
fn enumerate(g: &Graph, kind: LayoutKind, pages: usize, width: Option<usize>) -> (u64, Option<LinearLayout>) {
    let mut count = 0;
    let mut first = None;
    for order in (0..g.n()).permutations(g.n()) {
        for idx in 0..pages.pow(g.m() as u32) {
            // Edge 0 is the most significant digit, so pages count up in
            // canonical edge order.
            let page: Vec<usize> = (0..g.m()).map(|e| idx / pages.pow((g.m() - 1 - e) as u32) % pages).collect();
            let lay = IndexedLayout::new(order.clone(), page);
            if naive_conflicts(g, kind, &lay) > 0 {
                continue;
            }
            if width.is_some_and(|q| naive_width(g, &lay, pages) > q) {
                continue;
            }
            count += 1;
            if first.is_none() {
                first = Some(lay.to_layout(g, kind, pages));
            }
        }
    }
    (count, first)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn validator_matches_definition(n in 2usize..10, density in 0.0..1.0f64, pages in 1usize..4, stack: bool, seed: u64) {
        let g = graph(n, density, seed);
        let kind = kind_of(stack);
        let lay = random_layout(&g, pages, seed ^ 1);
        let report = validate_layout(&g, &lay.to_layout(&g, kind, pages)).unwrap();
        prop_assert_eq!(report.violations.len(), naive_conflicts(&g, kind, &lay));
    }

    #[test]
    fn width_matches_definition(n in 2usize..10, density in 0.0..1.0f64, pages in 1usize..4, seed: u64) {
        let g = graph(n, density, seed);
        let lay = random_layout(&g, pages, seed ^ 2);
        prop_assert_eq!(page_width(&lay.to_layout(&g, LayoutKind::Stack, pages)), naive_width(&g, &lay, pages));
    }

    #[test]
    fn renaming_pages_and_reversing_keep_validity(n in 2usize..9, density in 0.0..1.0f64, stack: bool, seed: u64) {
        let g = graph(n, density, seed);
        let kind = kind_of(stack);
        let pages = 3;
        let lay = random_layout(&g, pages, seed ^ 3);
        let before = validate_layout(&g, &lay.to_layout(&g, kind, pages)).unwrap().violations.len();

        let mut perm: Vec<usize> = (0..pages).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let renamed = IndexedLayout::new(lay.order.clone(), lay.page.iter().map(|&p| perm[p]).collect());
        let mut reversed = lay.order.clone();
        reversed.reverse();
        let reversed = IndexedLayout::new(reversed, lay.page.clone());
        for other in [renamed, reversed] {
            let after = validate_layout(&g, &other.to_layout(&g, kind, pages)).unwrap().violations.len();
            prop_assert_eq!(before, after);
            prop_assert_eq!(
                naive_width(&g, &lay, pages),
                naive_width(&g, &other, pages)
            );
        }
    }

    #[test]
    fn edge_bound_is_sound(n in 3usize..8, density in 0.4..1.0f64, pages in 1usize..3, stack: bool, seed: u64) {
        let g = graph(n, density, seed);
        let kind = kind_of(stack);
        let found = solve_exhaustive(&g, &OracleQuery::new(kind, pages, None), &OracleOptions::default()).unwrap();
        if edge_count_bound(&g, kind, pages) == BoundVerdict::Rejected {
            prop_assert!(found.is_none());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_matches_plain_enumeration(
        n in 1usize..7,
        density in 0.0..1.0f64,
        pages in 1usize..3,
        width in proptest::option::of(1usize..3),
        stack: bool,
        seed: u64,
    ) {
        let mut g = graph(n.max(2), density, seed);
        if n == 1 {
            g = Graph::new(["a"], Vec::<(&str, &str)>::new()).unwrap();
        }
        // Keep the page assignment product small.
        prop_assume!(g.m() <= 8 || pages == 1);
        let kind = kind_of(stack);
        let q = OracleQuery::new(kind, pages, width);
        let opts = OracleOptions::default();
        let (count, first) = enumerate(&g, kind, pages, width);
        prop_assert_eq!(solve_exhaustive_all(&g, &q, &opts).unwrap(), count);
        prop_assert_eq!(solve_exhaustive(&g, &q, &opts).unwrap(), first);
    }
}
