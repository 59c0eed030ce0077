use std::path::{Path, PathBuf};

use booklayout::generate::{self, random_gnm};
use booklayout::io::{parse_graph, serialize_graph};
use booklayout::kernel::{compute_vertex_integrity, twin_partition};
use booklayout::oracle::{solve_exhaustive, OracleOptions, OracleQuery};
use booklayout::queue1::{solve_queue_one_page, Queue1Outcome};
use booklayout::svg::render_svg;
use booklayout::{validate_layout, Graph, LayoutKind};

fn dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

fn load(name: &str) -> Graph {
    parse_graph(&std::fs::read_to_string(dir("data").join(name)).unwrap()).unwrap()
}

/// Compares against a stored file; `BLESS=1` rewrites it instead.
fn golden(name: &str, actual: &str) {
    let path = dir("golden").join(name);
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} differs from the stored copy");
}

#[test]
fn corpus_round_trips() {
    let mut files: Vec<_> = std::fs::read_dir(dir("data")).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(files.len() >= 5);
    for f in files {
        let g = parse_graph(&std::fs::read_to_string(&f).unwrap()).unwrap();
        let text = serialize_graph(&g);
        let again = parse_graph(&text).unwrap();
        assert_eq!(g, again, "{}", f.display());
        assert_eq!(serialize_graph(&again), text);
    }
}

#[test]
fn corpus_shapes() {
    let g = load("isolated.txt");
    assert_eq!((g.n(), g.m(), g.components().len()), (5, 2, 3));
    let g = load("named_v.txt");
    assert_eq!(g.degree(g.vertex("v").unwrap()), 2);
    assert!(serialize_graph(&g).lines().all(|l| !l.starts_with("v ")));
}

#[test]
fn known_page_numbers() {
    let opts = OracleOptions::default();
    let solve = |g: &Graph, kind, pages| {
        let l = solve_exhaustive(g, &OracleQuery::new(kind, pages, None), &opts).unwrap();
        if let Some(l) = &l {
            assert!(validate_layout(g, l).unwrap().is_ok());
        }
        l.is_some()
    };
    let k4 = load("k4.txt");
    assert!(!solve(&k4, LayoutKind::Stack, 1));
    assert!(solve(&k4, LayoutKind::Stack, 2));
    assert!(!solve(&k4, LayoutKind::Queue, 1));
    assert!(solve(&k4, LayoutKind::Queue, 2));

    // Stack number 3 and queue number 2.
    let petersen = load("petersen.txt");
    assert!(!solve(&petersen, LayoutKind::Stack, 2));
    assert!(solve(&petersen, LayoutKind::Stack, 3));
    assert!(solve(&petersen, LayoutKind::Queue, 2));
    assert_eq!(solve_queue_one_page(&petersen).unwrap().outcome, Queue1Outcome::Exhausted);

    let isolated = load("isolated.txt");
    assert!(solve(&isolated, LayoutKind::Queue, 1));
}

#[test]
fn triangle_gadget_has_one_class_of_ten() {
    let core = generate::complete(3);
    let copy = Graph::from_edges([("x", "y")]).unwrap();
    let a = core.name(0).to_string();
    let g = generate::twin_gadget(&core, &copy, &[("x", a.as_str())], 10).unwrap();
    assert_eq!((g.n(), g.m()), (23, 23));
    let dec = compute_vertex_integrity(&g, None).unwrap();
    let classes = twin_partition(&g, &dec);
    let sizes: Vec<usize> = classes.iter().map(|c| c.len()).filter(|&s| s > 1).collect();
    assert_eq!(sizes, [10]);
}

#[test]
fn pinned_random_graph() {
    golden("gnm_8_11_1.txt", &serialize_graph(&random_gnm(8, 11, 1).unwrap()));
}

#[test]
fn pinned_renders() {
    let wheel = load("wheel.txt");
    let opts = OracleOptions::default();
    for (kind, name) in [(LayoutKind::Stack, "wheel_stack.svg"), (LayoutKind::Queue, "wheel_queue.svg")] {
        let l = solve_exhaustive(&wheel, &OracleQuery::new(kind, 2, None), &opts).unwrap().unwrap();
        golden(name, &render_svg(&l).unwrap());
    }
}
