use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn xtree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xtree")).args(args).env_remove("XTREE_BUDGET").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn build_writes_a_full_tree() {
    let o = xtree(&["build", "--height", "4", "--branching", "2", "--order", "lex"]);
    assert_eq!(o.status.code(), Some(0));
    let t = xtree::ExpandedTree::from_text(&stdout(&o)).unwrap();
    assert_eq!(t.node_count(), 15);
    assert!(stdout(&o).contains("# validate ok"));
}

#[test]
fn seeded_builds_are_identical() {
    let a = xtree(&["build", "--order", "seeded-shuffle", "--seed", "7"]);
    let b = xtree(&["build", "--order", "seeded-shuffle", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let c = xtree(&["build", "--order", "seeded-shuffle", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn zero_height_is_rejected() {
    let o = xtree(&["build", "--height", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("height"));
}

#[test]
fn census_totals_and_guard() {
    let o = xtree(&["census", "--tree", "canonical:4:2:lex", "--n", "2", "--format", "table"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("census n=1 types=1"), "{s}");
    assert!(s.contains("census n=2 types=2"), "{s}");
    let o = xtree(&["census", "--tree", "canonical:5:2:lex", "--n", "5", "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains(r#""complete":false"#));
}

#[test]
fn budget_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_xtree"))
        .args(["census", "--tree", "canonical:5:2:lex", "--n", "5"])
        .env("XTREE_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn one_color_checks_are_fast() {
    let start = Instant::now();
    let o = xtree(&[
        "check", "--tree", "canonical:4:2:lex", "--tree2", "canonical:3:2:lex", "--coloring", "constant", "--sigma", "1",
    ]);
    assert!(start.elapsed() < Duration::from_secs(1));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(r#""holds":true"#));
}

#[test]
fn missing_witness_is_still_a_verdict() {
    let o = xtree(&[
        "check", "--tree", "canonical:3:2:reversed", "--tree2", "canonical:2:2:lex", "--coloring", "constant",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(r#""witness":"none""#));
}

#[test]
fn coloring_files_and_arity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.txt");
    std::fs::write(&path, "xtree-coloring 1\narity 2\nsigma 2\nkind level\n").unwrap();
    let p = path.to_str().unwrap();
    let o = xtree(&["check", "--tree", "canonical:3:2:lex", "--tree2", "canonical:2:2:lex", "--coloring", p, "--n", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = xtree(&["check", "--tree", "canonical:3:2:lex", "--tree2", "canonical:2:2:lex", "--coloring", p, "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn tree_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.tree");
    let b = xtree(&["build", "--height", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(b.status.code(), Some(0));
    let o = xtree(&["census", "--tree", path.to_str().unwrap(), "--n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(r#""n":1,"record":"census","saturated":true,"total_types":1"#));
}
