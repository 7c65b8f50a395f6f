use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const RULES: &str = "\
[?y1, owl:sameAs, ?y2] :- [?y1, :R, ?x], [?y2, :R, ?x] .
[?y1, owl:sameAs, ?y2] :- [?x, :R, ?y1], [?x, :R, ?y2] .
";

fn bfeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfeq")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = bfeq(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    /// Generates the bijective example and materialises it in `mode`.
    fn new(mode: &str) -> Workspace {
        let ws = Workspace { dir: tempfile::tempdir().unwrap() };
        ok(&["generate", "--out-facts", &ws.arg("facts.nt"), "--out-rules", &ws.arg("rules.dl"), "bijective"]);
        ok(&["materialise", "--facts", &ws.arg("facts.nt"), "--rules", &ws.arg("rules.dl"), "--mode", mode, "--out", &ws.arg("snap")]);
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn write(&self, name: &str, text: &str) -> String {
        fs::write(self.path(name), text).unwrap();
        self.arg(name)
    }
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn stats(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generated_bijective_example_is_the_listing() {
    let ws = Workspace::new("rewrite");
    assert_eq!(fs::read_to_string(ws.path("facts.nt")).unwrap(), ":a :R :b .\n:c :R :d .\n:a :R :d .\n");
    assert_eq!(fs::read_to_string(ws.path("rules.dl")).unwrap(), RULES);
}

#[test]
fn materialise_reports_store_sizes() {
    let ws = Workspace::new("rewrite");
    let facts = ws.arg("facts.nt");
    let rules = ws.arg("rules.dl");
    ok(&["materialise", "--facts", &facts, "--rules", &rules, "--out", &ws.arg("r"), "--stats", &ws.arg("r.json")]);
    assert_eq!(stats(&ws.path("r.json"))["facts"], 5);
    ok(&["materialise", "--facts", &facts, "--rules", &rules, "--mode", "axiom", "--out", &ws.arg("a"), "--stats", &ws.arg("a.json")]);
    assert_eq!(stats(&ws.path("a.json"))["facts"], 14);
    let empty = ws.write("empty.nt", "");
    let out = ok(&["materialise", "--facts", &empty, "--rules", &rules, "--out", &ws.arg("e")]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["facts"], 0);
    assert_eq!(fs::read_to_string(ws.path("r/reps.txt")).unwrap(), ":c -> :a\n:d -> :b\n");
}

#[test]
fn bfeq_update_adds_three_facts() {
    let ws = Workspace::new("rewrite");
    let del = ws.write("del.nt", ":a :R :d .\n");
    let report = ws.arg("report.json");
    let out = ok(&["update", "--snapshot", &ws.arg("snap"), "--strategy", "bfeq", "--delete", &del, "--report", &report, "--save", &ws.arg("after")]);
    assert_eq!(out.lines().next(), Some("dataset,strategy,|E|,|Π|,|E⁻|,|I|,ΔI,D,T_ms"));
    let row = &rows(&out)[0];
    assert_eq!(&row[..7], ["facts", "bfeq", "3", "2", "1", "8", "3"]);
    let r = &stats(Path::new(&report))[0];
    assert_eq!((r["added"].as_u64(), r["removed"].as_u64()), (Some(3), Some(0)));
    assert_eq!(fs::read_to_string(ws.path("after/store.nt")).unwrap().lines().count(), 8);
    assert_eq!(fs::read_to_string(ws.path("after/reps.txt")).unwrap(), "");
    assert_eq!(fs::read_to_string(ws.path("after/explicit.nt")).unwrap().lines().count(), 2);
}

#[test]
fn empty_deletion_costs_nothing() {
    let ws = Workspace::new("rewrite");
    let del = ws.write("del.nt", "");
    let out = ok(&["update", "--snapshot", &ws.arg("snap"), "--strategy", "bfeq", "--delete", &del, "--save", &ws.arg("after")]);
    let row = &rows(&out)[0];
    assert_eq!((row[6].as_str(), row[7].as_str()), ("0", "0"));
    for file in ["store.nt", "reps.txt", "explicit.nt", "dict.txt"] {
        assert_eq!(fs::read(ws.path("snap").join(file)).unwrap(), fs::read(ws.path("after").join(file)).unwrap(), "{file}");
    }
}

#[test]
fn all_strategies_run_side_by_side() {
    let ws = Workspace::new("axiom");
    let out = ok(&["update", "--snapshot", &ws.arg("snap"), "--strategy", "all", "--fraction", "0.34", "--seed", "3"]);
    let rows = rows(&out);
    let names: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(names, ["bfeq", "bf-axiom", "remat-eq", "remat-axiom"]);
    assert!(rows.iter().all(|r| r[4] == "2"));
}

#[test]
fn sweep_emits_a_row_per_fraction() {
    let ws = Workspace::new("rewrite");
    let out = ok(&["update", "--snapshot", &ws.arg("snap"), "--strategy", "remat-eq", "--sweep", "0.3,0.6,1", "--seed", "1"]);
    let sizes: Vec<String> = rows(&out).into_iter().map(|r| r[4].clone()).collect();
    assert_eq!(sizes, ["1", "2", "3"]);
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let ws = Workspace::new("rewrite");
    let run = || {
        let out = ok(&["update", "--snapshot", &ws.arg("snap"), "--strategy", "all", "--fraction", "0.5", "--seed", "9"]);
        rows(&out).into_iter().map(|mut r| { r.pop(); r }).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn mismatched_strategy_is_a_usage_error() {
    let ws = Workspace::new("axiom");
    let del = ws.write("del.nt", ":a :R :d .\n");
    let out = bfeq(&["update", "--snapshot", &ws.arg("snap"), "--strategy", "bfeq", "--delete", &del]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rewrite mode"));
}

#[test]
fn fraction_needs_a_seed_and_a_valid_range() {
    let ws = Workspace::new("rewrite");
    let snap = ws.arg("snap");
    assert_eq!(bfeq(&["update", "--snapshot", &snap, "--strategy", "bfeq", "--fraction", "0.5"]).status.code(), Some(2));
    assert_eq!(bfeq(&["update", "--snapshot", &snap, "--strategy", "bfeq", "--fraction", "0", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(bfeq(&["update", "--snapshot", &snap, "--strategy", "bfeq"]).status.code(), Some(2));
}

#[test]
fn parse_errors_fail_cleanly() {
    let ws = Workspace::new("rewrite");
    let bad = ws.write("bad.nt", ":a :R\n");
    let out = bfeq(&["materialise", "--facts", &bad, "--rules", &ws.arg("rules.dl"), "--out", &ws.arg("x")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let missing = bfeq(&["update", "--snapshot", &ws.arg("nowhere"), "--strategy", "bfeq", "--delete", &bad]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn verify_checks_generated_data() {
    let ws = Workspace::new("rewrite");
    ok(&["generate", "--seed", "4", "--out-facts", &ws.arg("c.nt"), "--out-rules", &ws.arg("c.dl"), "clique", "--constants", "30", "--groups", "3", "--equality"]);
    let out = ok(&["verify", "--facts", &ws.arg("c.nt"), "--rules", &ws.arg("c.dl"), "--seed", "2"]);
    assert_eq!(out.trim(), "ok: 10 deletion sets verified");
}
