use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_booklayout"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn oracle_witness_validates() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("c4.txt");
    assert_eq!(code(&run(&["gen", "cycle", "-n", "4", "--out", s(&g)])), 0);
    let report = dir.path().join("report.json");
    let o = run(&["solve", s(&g), "--kind", "stack", "-l", "1", "--out", s(&report)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["verdict"], "found");
    let layout = write(dir.path(), "layout.json", &v["layout"].to_string());
    assert_eq!(code(&run(&["validate", s(&g), s(&layout)])), 0);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved["layout"], v["layout"]);
}

#[test]
fn invalid_layout_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "4 2\na c\nb d\n");
    let l = write(
        dir.path(),
        "l.json",
        r#"{"kind":"stack","pages":1,"spine":["a","b","c","d"],"assignment":{"a c":1,"b d":1}}"#,
    );
    let o = run(&["validate", s(&g), s(&l)]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["violations"].as_array().unwrap().len(), 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let k4 = dir.path().join("k4.txt");
    run(&["gen", "complete", "-n", "4", "--out", s(&k4)]);
    assert_eq!(code(&run(&["solve", s(&k4), "--algo", "queue1", "--kind", "queue"])), 1);
    let p3 = write(dir.path(), "p3.txt", "3 2\na b\nb c\n");
    assert_eq!(code(&run(&["solve", s(&p3), "--algo", "cutset", "--width", "0"])), 1);
    let p20 = dir.path().join("p20.txt");
    run(&["gen", "path", "-n", "20", "--out", s(&p20)]);
    let o = run(&["solve", s(&p20)]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["verdict"], "refused");
    assert_eq!(code(&run(&["solve", s(&p3), "--algo", "queue1"])), 3);
    assert_eq!(code(&run(&["solve", s(&p3), "--no-such-flag"])), 3);
    assert_eq!(code(&run(&["solve", s(&dir.path().join("missing.txt"))])), 3);
    let bad = write(dir.path(), "bad.txt", "2 1\na a\n");
    let o = run(&["solve", s(&bad)]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn svg_output() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "k2.txt", "2 1\na b\n");
    let svg = dir.path().join("k2.svg");
    assert_eq!(code(&run(&["solve", s(&g), "--svg", s(&svg)])), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<circle").count(), 2);
    assert_eq!(text.matches("<path").count(), 1);

    let l = write(
        dir.path(),
        "l.json",
        r#"{"kind":"stack","pages":1,"spine":["a","b"],"assignment":{"a b":1}}"#,
    );
    let again = dir.path().join("again.svg");
    assert_eq!(code(&run(&["render", s(&l), "--out", s(&again), "--graph", s(&g)])), 0);
    assert_eq!(std::fs::read(&again).unwrap(), text.as_bytes());
}

#[test]
fn vi_and_kernelize() {
    let dir = tempfile::tempdir().unwrap();
    let star = dir.path().join("star.txt");
    run(&["gen", "star", "-n", "10", "--out", s(&star)]);
    let o = run(&["vi", s(&star)]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["p"], 2);
    assert_eq!(code(&run(&["vi", s(&star), "--budget", "1"])), 2);

    let kernel = dir.path().join("kernel.txt");
    let o = run(&["kernelize", s(&star), "-l", "1", "--threshold", "3", "--graph-out", s(&kernel)]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["kernel"]["n"], 4);
    assert!(std::fs::read_to_string(&kernel).unwrap().starts_with("4 3\n"));

    let o = run(&["solve", s(&star), "--algo", "kernel", "--threshold", "5", "--max-n", "20"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["params"]["path"], "lifted");
}

#[test]
fn twin_gadget_generation() {
    let dir = tempfile::tempdir().unwrap();
    let core = write(dir.path(), "core.txt", "3 3\na b\nb c\na c\n");
    let copy = write(dir.path(), "copy.txt", "2 1\nx y\n");
    let o = run(&["gen", "twin-gadget", "--core", s(&core), "--copy", s(&copy), "--attach", "x:a", "-k", "10"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("23 23\n"), "{text}");
}

#[test]
fn dumps_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "c4.txt", "4 4\na b\nb c\nc d\na d\n");
    let states = dir.path().join("states.txt");
    let o = run(&["solve", s(&g), "--algo", "cutset", "--width", "2", "--dump-states", s(&states)]);
    assert_eq!(code(&o), 0);
    let lines = std::fs::read_to_string(&states).unwrap().lines().count() as u64;
    assert_eq!(json(&o)["counts"]["states"].as_u64(), Some(lines));

    let branch = dir.path().join("branch.json");
    let o = run(&["solve", s(&g), "--algo", "queue1", "--kind", "queue", "--dump-branch", s(&branch)]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&branch).unwrap()).unwrap();
    assert_eq!(v["components"].as_array().unwrap().len(), 1);
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "k4.txt", "4 6\na b\na c\na d\nb c\nb d\nc d\n");
    let b = write(dir.path(), "c5.txt", "5 5\na b\nb c\nc d\nd e\na e\n");
    let csv = dir.path().join("bench.csv");
    let o = run(&["bench", s(&a), s(&b), "--algos", "oracle,cutset,queue1", "--width", "3", "--out", s(&csv)]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("instance,n,m,algo,params,verdict,millis,state_count"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    let verdicts: Vec<(&str, &str)> = rows.iter().map(|r| (r[3], r[5])).collect();
    assert_eq!(
        verdicts,
        [
            ("oracle", "infeasible"),
            ("cutset", "infeasible"),
            ("queue1", "infeasible"),
            ("oracle", "found"),
            ("cutset", "found"),
            ("queue1", "found"),
        ]
    );
}

#[test]
fn repeated_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    run(&["gen", "gnm", "-n", "8", "-m", "11", "--seed", "1", "--out", s(&g)]);
    let layouts: Vec<Value> = ["1", "3"]
        .iter()
        .map(|t| json(&run(&["solve", s(&g), "-l", "2", "--threads", t]))["layout"].clone())
        .collect();
    assert_eq!(layouts[0], layouts[1]);
    assert!(!layouts[0].is_null());
}
