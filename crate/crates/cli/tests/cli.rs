use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use dircx::complex::{enumerate_marked_horns, DirectedComplex, HornInstance, MarkedComplex};
use dircx::molecule::{self, arrow, globe};
use dircx::morphism::GradedFunction;
use dircx::ogposet::{ElemRef, OgPoset};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use serde_json::{json, Value};
use tempfile::TempDir;

fn dircx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dircx")).args(args).env_remove("DIRCX_BOUND").output().expect("run dircx")
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, v.to_string()).unwrap();
    path
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn validate_arrow_file() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "arrow.json", &arrow().carrier().to_json());
    let o = dircx(&["validate", "--in", p(&f)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o), json!({"dims": [2, 1]}));
}

#[test]
fn collapse_factor_of_globe_onto_point() {
    let dir = TempDir::new().unwrap();
    let g = globe(2).carrier().clone();
    let f = GradedFunction::new(g.clone(), Arc::new(OgPoset::point()), vec![ElemRef::new(0, 0); g.len()]).unwrap();
    let path = write(&dir, "collapse.json", &f.to_json());
    let o = dircx(&["collapse-factor", "--in", p(&path)]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["length"], 2);
    assert_eq!(v["k_seq"].as_array().unwrap().len(), 2);
}

#[test]
fn fibrant_reports_the_unfilled_compositor_horn() {
    let dir = TempDir::new().unwrap();
    let a = arrow();
    let k = molecule::atom(&molecule::paste(&a, &a, 0).unwrap(), &a).unwrap().carrier().clone();
    let top = k.greatest().unwrap();
    let h = enumerate_marked_horns(&[(k.clone(), k.set_of([top]))]).remove(0);
    let x = MarkedComplex::flat(DirectedComplex::representable(&k));
    let cx = write(&dir, "complex.json", &x.to_json());
    let inv = write(&dir, "inventory.json", &json!([h.to_json()]));
    let o = dircx(&["fibrant", "--in", p(&cx), "--in", p(&inv)]);
    assert_eq!(o.status.code(), Some(2));
    let v = stdout_json(&o);
    assert_eq!(v["pass"], false);
    assert!(!v["items"][0]["witness"].is_null());
}

#[test]
fn usage_and_validation_errors() {
    let o = dircx(&["frobnicate", "--in", "/nonexistent"]);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "usage");

    assert_eq!(dircx(&["validate"]).status.code(), Some(3));
    assert_eq!(dircx(&["validate", "--in", "arrow", "--format", "dot"]).status.code(), Some(3));

    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", &json!({"strata": [[{"in": [], "out": []}], [{"in": [0], "out": [0]}]]}));
    let o = dircx(&["validate", "--in", p(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "invalid");
}

#[test]
fn bound_defaults_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_dircx")).args(["atlas", "--dim", "1"]).env("DIRCX_BOUND", "5").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["bound"], 5);
    assert_eq!(v["count"], 2);
}

#[test]
fn export_dot_has_a_node_per_element_and_an_edge_per_face() {
    let o = dircx(&["export-dot", "--in", "globe:2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("[label=\"") && !l.contains("->")).count(), 5);
    assert_eq!(text.lines().filter(|l| l.contains("->")).count(), 6);
    assert_eq!(text, String::from_utf8(dircx(&["export-dot", "--in", "globe:2"]).stdout).unwrap());
}

#[test]
fn out_flag_writes_the_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("gray.json");
    let o = dircx(&["gray", "--in", "arrow", "--in", "arrow", "--out", p(&target)]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(OgPoset::from_json(&v).unwrap().stratum_sizes(), vec![4, 4, 1]);
}

#[test]
fn horn_output_reparses() {
    let o = dircx(&["horns", "--in", "simplex:2"]);
    assert_eq!(o.status.code(), Some(0));
    let horns = stdout_json(&o);
    let horns = horns.as_array().unwrap();
    assert!(!horns.is_empty());
    for h in horns {
        assert!(HornInstance::from_json(h).unwrap().validate());
    }
}

const SHAPES: [&str; 7] = ["point", "arrow", "globe:1", "globe:2", "simplex:2", "cube:2", "simplex:1"];

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, rng_seed: RngSeed::Fixed(7), ..ProptestConfig::default() })]

    #[test]
    fn constructions_reparse_and_revalidate(i in 0..SHAPES.len(), j in 0..SHAPES.len(), verb in prop::sample::select(vec!["gray", "join"])) {
        let dir = TempDir::new().unwrap();
        let o = dircx(&[verb, "--in", SHAPES[i], "--in", SHAPES[j]]);
        prop_assert_eq!(o.status.code(), Some(0));
        let v = stdout_json(&o);
        let parsed = OgPoset::from_json(&v).unwrap();
        let path = write(&dir, "out.json", &v);
        let back = dircx(&["validate", "--in", p(&path)]);
        prop_assert_eq!(back.status.code(), Some(0));
        prop_assert_eq!(stdout_json(&back), json!({"dims": parsed.stratum_sizes()}));
    }

    #[test]
    fn merge_output_reparses(n in 1usize..4) {
        let o = dircx(&["merge", "--in", &format!("globe:{n}")]);
        prop_assert_eq!(o.status.code(), Some(0));
        let v = stdout_json(&o);
        for key in ["co_merger", "globe_subdivision"] {
            prop_assert!(GradedFunction::from_json(&v[key]).is_ok());
        }
        prop_assert!(OgPoset::from_json(&v["merger"]).is_ok());
    }
}
