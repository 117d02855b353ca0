use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rap_core::benchmark::{fyffe_instance, fyffe_variant};
use rap_core::RapInstance;

fn rap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rap")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_instance(dir: &Path, name: &str, inst: &RapInstance) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, inst.to_json()).unwrap();
    path
}

#[test]
fn solve_fyffe_id_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(dir.path(), "id1.json", &fyffe_instance(1).unwrap());
    let stats = dir.path().join("stats.csv");
    let out = rap(&["solve", path.to_str().unwrap(), "--stats", stats.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("R=0.954564") && first.ends_with(" W=159 C=110"), "{first}");
    assert!(text.contains("solution: 0030 200 0002 003 020 0200 200 300 0020 030 200 4000 020 0020"));
    let csv = fs::read_to_string(stats).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "stage,generated,after_bounds,after_dominance");
    assert_eq!(csv.lines().count(), 15);
}

#[test]
fn solve_infeasible_and_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let zero = fyffe_instance(1).unwrap().with_cost_ceiling(0).with_reliability_lb(None);
    let path = write_instance(dir.path(), "zero.json", &zero);
    let out = rap(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("infeasible"));

    let missing = dir.path().join("missing.json");
    assert_eq!(rap(&["solve", missing.to_str().unwrap()]).status.code(), Some(2));
    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{\"subsystems\": 3}").unwrap();
    assert_eq!(rap(&["solve", garbage.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unpruned_fyffe_hits_the_resource_cap() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(dir.path(), "id1.json", &fyffe_instance(1).unwrap());
    let out = rap(&["solve", path.to_str().unwrap(), "--no-dominance", "--no-bounds", "--max-set", "2000000"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("partial solutions"));
}

#[test]
fn json_report_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../schema/solve_report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();

    let feasible = write_instance(dir.path(), "id1.json", &fyffe_instance(1).unwrap());
    let infeasible = write_instance(dir.path(), "zero.json", &fyffe_instance(1).unwrap().with_cost_ceiling(0));
    for (path, code) in [(feasible, 0), (infeasible, 1)] {
        let out = rap(&["solve", path.to_str().unwrap(), "--json"]);
        assert_eq!(out.status.code(), Some(code));
        let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{errors:?}");
    }
}

#[test]
fn bench_single_id() {
    let out = rap(&["bench", "--ids", "1"]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3, "{text}");
    assert!(text.lines().nth(1).unwrap().contains("0.954564813"));
    // the published reliabilities carry a ~1e-8 rounding offset, see README
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_csv_and_bad_ids() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let out = rap(&["bench", "--ids", "2-3", "--csv", csv.to_str().unwrap()]);
    assert!(out.status.code().is_some());
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("id,weight_ceiling,reliability,weight,cost,"));
    assert_eq!(rap(&["bench", "--ids", "0"]).status.code(), Some(2));
    assert_eq!(rap(&["bench", "--ids", "1-x"]).status.code(), Some(2));
}

#[test]
fn verify_published_solution() {
    let dir = tempfile::tempdir().unwrap();
    let v = fyffe_variant(1).unwrap();
    let path = write_instance(dir.path(), "id1.json", &fyffe_instance(1).unwrap());
    let out = rap(&["verify", path.to_str().unwrap(), &v.expected_solution]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("R=0.954564"), "{text}");
    assert!(text.contains("W=159 C=110"));
    assert!(text.trim_end().ends_with("feasible"));

    let tight = write_instance(dir.path(), "w158.json", &fyffe_instance(1).unwrap().with_weight_ceiling(158));
    let out = rap(&["verify", tight.to_str().unwrap(), &v.expected_solution]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("infeasible(weight)"));

    let malformed = v.expected_solution.replacen("0030", "003", 1);
    assert_eq!(rap(&["verify", path.to_str().unwrap(), &malformed]).status.code(), Some(2));
}

#[test]
fn enumerate_dumps() {
    let out = rap(&["enumerate", "--mu", "4", "--cap", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 17);
    assert_eq!(lines[0], "x1,x2,x3,x4,sum");
    assert_eq!(lines[2], "1,0,0,0,1");
    assert_eq!(lines[16], "1,1,1,1,4");

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ub.csv");
    let out = rap(&["enumerate", "--mu", "4", "--cap", "9", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), 496);

    assert_eq!(rap(&["enumerate", "--mu", "0", "--cap", "9"]).status.code(), Some(2));
    assert_eq!(rap(&["enumerate", "--mu", "3"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(dir.path(), "id5.json", &fyffe_instance(5).unwrap());
    let strip = |o: Output| stdout(&o).lines().filter(|l| !l.starts_with("time:")).collect::<Vec<_>>().join("\n");
    let a = strip(rap(&["solve", path.to_str().unwrap()]));
    let b = strip(rap(&["solve", path.to_str().unwrap()]));
    assert_eq!(a, b);
}
