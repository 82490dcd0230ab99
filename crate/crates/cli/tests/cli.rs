use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use stable_cluster::StabilityReport;

const FOUR_POINT: &str = r#"{"n":4,"d":[[0,0.1,1,1],[0.1,0,1,1],[1,1,0,0.1],[1,1,0.1,0]]}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_stable-cluster"));
    c.env_remove("STABLE_CLUSTER_BUDGET");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("fp.json"), FOUR_POINT).unwrap();
    std::fs::write(dir.path().join("star.txt"), "4 3\n0 1\n0 2\n0 3\n").unwrap();
    std::fs::write(dir.path().join("k6.txt"), "6 6\n0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n").unwrap();
    std::fs::write(dir.path().join("m.3dm"), "2 2\n0 0 0\n1 1 1\n").unwrap();
    dir
}

#[test]
fn stability_report_on_fixture() {
    let dir = setup();
    let out = run_in(dir.path(), &["verify", "stability", "--k", "2", "fp.json"]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!(r["command"], "verify stability");
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["summary"]["alpha_center"], 10.0);
    assert_eq!(r["inputs"][0]["path"], "fp.json");
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    let parsed: StabilityReport = serde_json::from_value(r["summary"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&parsed).unwrap(), r["summary"]);
}

#[test]
fn reduce_domset_writes_instance_and_certificate() {
    let dir = setup();
    let out = run_in(dir.path(), &["gen", "reduce-domset", "--graph", "star.txt", "--d", "1", "-o", "out.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cert: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.cert.json")).unwrap()).unwrap();
    assert_eq!(cert["expected_cost"], 1.5);
    assert_eq!(cert["source_kind"], "dom_set");
    let solved = run_in(dir.path(), &["solve", "kmedian", "--k", "1", "out.json"]);
    assert_eq!(report(&solved)["summary"]["cost"], 1.5);
    assert_eq!(report(&out)["outputs"], serde_json::json!(["out.json", "out.cert.json"]));
}

#[test]
fn other_generators() {
    let dir = setup();
    let tri = run_in(dir.path(), &["gen", "reduce-trianglepart", "--graph", "k6.txt", "-o", "t.json"]);
    assert_eq!(report(&tri)["summary"]["certificate"]["expected_cost"], 6.0);
    let solved = run_in(dir.path(), &["solve", "minsum", "--k", "2", "t.json"]);
    assert_eq!(report(&solved)["summary"]["cost"], 6.0);

    let m = run_in(dir.path(), &["gen", "from-3dm", "--input", "m.3dm", "-o", "p.json"]);
    let cert = &report(&m)["summary"]["certificate"];
    assert_eq!(cert["parameters"]["k"], 3);
    assert_eq!(cert["parameters"]["n"], 9);
    assert_eq!(cert["graph_edges"].as_array().unwrap().len(), 8);
}

#[test]
fn stream_recovers_planted_clusters() {
    let dir = setup();
    let g = run_in(dir.path(), &["gen", "planted", "--k", "2", "--sizes", "4,5", "--alpha", "6", "--seed", "3", "-o", "pl.json"]);
    assert!(g.status.success());
    assert_eq!(report(&g)["summary"]["certificate"]["certified"], true);
    let out = run_in(dir.path(), &["stream", "kmedian", "--k", "2", "--order", "random", "--seed", "7", "pl.json"]);
    let s = &report(&out)["summary"];
    assert_eq!(s["matches_ground_truth"], true);
    assert_eq!(s["peak_retained"], 2);
    let centers: Vec<u64> = serde_json::from_value(s["centers"].clone()).unwrap();
    assert_eq!(centers.len(), 2);
    assert!(centers[0] < 4 && centers[1] >= 4);

    std::fs::write(dir.path().join("order.txt"), "8\n7\n6\n5\n4\n3\n2\n1\n0\n").unwrap();
    let f = run_in(dir.path(), &["stream", "kmedian", "--k", "2", "--order-file", "order.txt", "pl.json"]);
    assert_eq!(report(&f)["summary"]["order"], "file");
    assert_eq!(report(&f)["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = setup();
    let args = ["verify", "falsify", "--k", "2", "--value", "12", "--samples", "500", "--seed", "4", "fp.json"];
    let a = run_in(dir.path(), &args);
    let b = run_in(dir.path(), &args);
    assert_eq!(a.stdout, b.stdout);
    let jobs: Vec<&str> = ["--jobs", "1"].into_iter().chain(args).collect();
    assert_eq!(run_in(dir.path(), &jobs).stdout, a.stdout);
}

#[test]
fn falsify_outcome_lives_in_payload() {
    let dir = setup();
    let hit = run_in(dir.path(), &["verify", "falsify", "--k", "2", "--value", "20", "--seed", "1", "fp.json"]);
    assert!(hit.status.success());
    let s = &report(&hit)["summary"];
    assert_eq!(s["result"], "falsified");
    assert_eq!(s["witness"]["revalidated"], true);
    let miss = run_in(dir.path(), &["verify", "falsify", "--k", "2", "--value", "5", "--samples", "200", "fp.json"]);
    assert!(miss.status.success());
    assert_eq!(report(&miss)["summary"]["result"], "no_counterexample");
}

#[test]
fn exit_codes() {
    let dir = setup();
    let usage = run_in(dir.path(), &["solve", "kmedian", "fp.json"]);
    assert_eq!(usage.status.code(), Some(2));
    let no_out = run_in(dir.path(), &["gen", "reduce-domset", "--graph", "star.txt", "--d", "1"]);
    assert_eq!(no_out.status.code(), Some(2));
    let domain = run_in(dir.path(), &["solve", "kmedian", "--k", "9", "fp.json"]);
    assert_eq!(domain.status.code(), Some(1));
    assert_eq!(report(&domain)["exit_code"], 1);
    let budget = bin()
        .current_dir(dir.path())
        .env("STABLE_CLUSTER_BUDGET", "1")
        .args(["solve", "kmedian", "--k", "2", "fp.json"])
        .output()
        .unwrap();
    assert_eq!(budget.status.code(), Some(1));
    std::fs::write(dir.path().join("bad.json"), r#"{"n":3,"d":[[0,1,5],[1,0,1],[5,1,0]]}"#).unwrap();
    let invalid = run_in(dir.path(), &["verify", "stability", "--k", "2", "bad.json"]);
    assert_eq!(invalid.status.code(), Some(1));
}

#[test]
fn verify_subcommands() {
    let dir = setup();
    let sep = report(&run_in(dir.path(), &["verify", "strict-sep", "--k", "2", "fp.json"]));
    assert_eq!(sep["summary"]["holds"], true);
    let l3 = report(&run_in(dir.path(), &["verify", "lemma3", "--k", "2", "fp.json"]));
    assert_eq!(l3["summary"]["holds"], true);
    assert_eq!(l3["summary"]["alpha"], 10.0);
    let l3_fail = report(&run_in(dir.path(), &["verify", "lemma3", "--k", "2", "--alpha", "12", "fp.json"]));
    assert_eq!(l3_fail["summary"]["holds"], false);
    let link = report(&run_in(dir.path(), &["verify", "linkage-cond", "--k", "2", "fp.json"]));
    assert_eq!(link["summary"]["holds"], true);
    assert_eq!(link["summary"]["alpha"], 6.0);
    assert_eq!(link["summary"]["exhaustive"], true);
}

#[test]
fn oracles_and_csv() {
    let dir = setup();
    let ds = report(&run_in(dir.path(), &["oracle", "domset", "--graph", "star.txt"]));
    assert_eq!(ds["summary"]["size"], 1);
    assert_eq!(ds["summary"]["witness"], serde_json::json!([0]));
    let tp = report(&run_in(dir.path(), &["oracle", "triangle-partition", "--graph", "k6.txt"]));
    assert_eq!(tp["summary"]["feasible"], true);
    let csv = run_in(dir.path(), &["solve", "minsum", "--k", "2", "--linkage", "--format", "csv", "fp.json"]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap(), "point,cluster\n0,0\n1,0\n2,1\n3,1\n");
    let to_file = run_in(dir.path(), &["oracle", "domset", "--graph", "star.txt", "-o", "r.json"]);
    assert!(to_file.stdout.is_empty());
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(saved["summary"]["size"], 1);
}
