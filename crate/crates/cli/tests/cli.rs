use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn shiftnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftnet")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", path.to_str().unwrap()]);
    let o = shiftnet(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn eval_matches_oracle() {
    let dir = TempDir::new().unwrap();
    let c = gen(dir.path(), "b.circ", &["barrel", "--n", "4"]);
    let o = shiftnet(&["eval", c.to_str().unwrap(), "--x", "1101", "--j", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("output 00110100"), "{out}");
    assert!(out.contains("(match)"));

    let o = shiftnet(&["eval", c.to_str().unwrap(), "--x", "11", "--l", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flow_on_shared_edge() {
    let dir = TempDir::new().unwrap();
    let net = dir.path().join("two.net");
    std::fs::write(
        &net,
        "node a\nnode b\nnode c\nnode d\nedge e1 a c 1\nedge e2 b c 1\nedge e3 c d 1\npair 1 a d 1\npair 2 b d 1\n",
    )
    .unwrap();
    let o = shiftnet(&["flow", "--instance", net.to_str().unwrap(), "--exact"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("rate 1/2\n"));
    let o = shiftnet(&["flow", "--instance", net.to_str().unwrap(), "--format", "csv"]);
    assert!(stdout(&o).ends_with("rate,,,0.5\n"), "{}", stdout(&o));
}

#[test]
fn reduce_writes_a_parsable_instance() {
    let dir = TempDir::new().unwrap();
    let c = gen(dir.path(), "b.circ", &["barrel", "--n", "4"]);
    let net = dir.path().join("a.net");
    let o = shiftnet(&["reduce", "A", "--circuit", c.to_str().unwrap(), "-o", net.to_str().unwrap()]);
    assert!(o.status.success());
    let o = shiftnet(&["flow", "--instance", net.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("verification: 0 violations"));
}

#[test]
fn coding_reports_rate_k() {
    let dir = TempDir::new().unwrap();
    let c = gen(dir.path(), "id.circ", &["depth3-id", "--n", "8", "--window", "1"]);
    let o = shiftnet(&["coding", "B", "--circuit", c.to_str().unwrap(), "--k", "2", "--cyclic"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("correct on all 256 tuples: true"), "{out}");
    assert!(out.contains("rate: 2.000000"), "{out}");
}

#[test]
fn correction_commands() {
    let o = shiftnet(&["correction", "budget", "--n", "100", "--k", "20", "--eps", "1/300"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("within 5n/k: false"));

    let dir = TempDir::new().unwrap();
    let fam = dir.path().join("fam.txt");
    std::fs::write(&fam, "00\n0f\nf0\nff\n").unwrap();
    let o = shiftnet(&["correction", "cost", "--n", "8", "--m", "2", "--family", fam.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("corrections outside the family: 0"));

    let o = shiftnet(&["correction", "play", "--n", "8", "--m", "2", "--family", fam.to_str().unwrap(), "--beta", "11100000"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("(in family: true)"));
}

#[test]
fn certify_is_deterministic_and_signals_failure() {
    let dir = TempDir::new().unwrap();
    let c = gen(dir.path(), "id.circ", &["depth3-id", "--n", "16", "--window", "1"]);
    let args = ["certify", "B", "--circuit", c.to_str().unwrap(), "--k", "4", "--cyclic", "--seed", "7"];
    let a = shiftnet(&args);
    let b = shiftnet(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("verdict: PASS"));

    let mut strict = args.to_vec();
    strict.push("--strict");
    let s = shiftnet(&strict);
    assert_eq!(s.status.code(), Some(1));
    assert!(stdout(&s).contains("verdict: FAIL"));
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(shiftnet(&["certify", "A", "--circuit", "/nonexistent"]).status.code(), Some(2));
    assert_eq!(shiftnet(&["correction", "budget", "--n", "8", "--k", "2", "--eps", "x"]).status.code(), Some(2));
    assert_eq!(shiftnet(&["flow", "--instance", "x", "--budget", "31"]).status.code(), Some(2));
}
