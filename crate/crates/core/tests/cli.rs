//! End-to-end runs of the command line, in process and through the binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use routact::cli::{run, EXIT_BALANCE, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
use serde_json::Value;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn routact(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("routact").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn json(args: &[&str]) -> (i32, Value) {
    let r = routact(args);
    let v = serde_json::from_str(&r.out).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}{}", r.out, r.err));
    (r.code, v)
}

fn schema(name: &str) -> Value {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn type_ok(t: &str, v: &Value) -> bool {
    match t {
        "null" => v.is_null(),
        "boolean" => v.is_boolean(),
        "integer" => v.is_u64() || v.is_i64(),
        "number" => v.is_number(),
        "string" => v.is_string(),
        "array" => v.is_array(),
        "object" => v.is_object(),
        _ => panic!("unknown schema type {t}"),
    }
}

/// Checks the subset of JSON Schema the shipped schemas use, plus key order.
fn conforms(root: &Value, s: &Value, v: &Value, at: &str) {
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(t) => type_ok(t, v),
            Value::Array(ts) => ts.iter().any(|t| type_ok(t.as_str().unwrap(), v)),
            _ => unreachable!(),
        };
        assert!(ok, "{at}: {v} is not of type {t}");
        if v.is_null() {
            return;
        }
    }
    if let Some(r) = s.get("$ref").and_then(Value::as_str) {
        let name = r.strip_prefix("#/$defs/").unwrap();
        conforms(root, &root["$defs"][name], v, at);
    }
    if let Some(e) = s.get("enum").and_then(Value::as_array) {
        assert!(e.contains(v), "{at}: {v} not in {e:?}");
    }
    if let (Some(props), Some(obj)) = (s.get("properties").and_then(Value::as_object), v.as_object()) {
        for k in s["required"].as_array().into_iter().flatten() {
            assert!(obj.contains_key(k.as_str().unwrap()), "{at}: missing {k}");
        }
        if s.get("additionalProperties") == Some(&Value::Bool(false)) {
            let want: Vec<&String> = props.keys().collect();
            let got: Vec<&String> = obj.keys().collect();
            assert_eq!(got, want, "{at}: keys differ from the schema");
        }
        for (k, sub) in props {
            if let Some(x) = obj.get(k) {
                conforms(root, sub, x, &format!("{at}.{k}"));
            }
        }
    }
    if let (Some(items), Some(arr)) = (s.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            conforms(root, items, x, &format!("{at}[{i}]"));
        }
    }
}

fn check(name: &str, v: &Value) {
    let s = schema(name);
    conforms(&s, &s, v, name);
}

#[test]
fn reports_match_shipped_schemas() {
    for id in ["switch", "grandfather", "lugano", "grenoble"] {
        let (_, v) = json(&["validate", &format!("catalog:{id}"), "--format", "json"]);
        check("verdict", &v);
    }
    let (_, v) = json(&["simulate", "catalog:switch", "--trials", "2", "--ancillas", "--format", "json"]);
    check("simulate", &v);
    let (_, v) = json(&["choi", "catalog:switch", "--format", "json"]);
    check("choi", &v);
    let (_, v) = json(&["catalog", "list", "--format", "json"]);
    check("catalog-list", &v);
    let (_, v) = json(&["branch-graph", "catalog:switch", "--format", "json"]);
    check("branch-graph", &v);
}

#[test]
fn validate_exit_codes() {
    let r = routact(&["validate", "catalog:switch"]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    assert!(r.out.starts_with("valid"));

    let (code, v) = json(&["validate", "catalog:grandfather", "--format", "json"]);
    assert_eq!(code, EXIT_FAIL);
    assert_eq!(v["valid"], false);
    assert_eq!(v["univocality_witness"]["kind"], "underdetermined");

    let r = routact(&["validate", "/nonexistent/graph.json"]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(!r.err.is_empty());
    assert_eq!(routact(&["validate", "catalog:nope"]).code, EXIT_INPUT);
}

#[test]
fn malformed_json_reports_its_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\n  \"nodes\": [\n    oops\n  ]\n}\n").unwrap();
    let r = routact(&["validate", p.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.err.contains("line 3"), "{}", r.err);
}

#[test]
fn branch_graph_dot_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("switch.dot");
    let r = routact(&["branch-graph", "catalog:switch", "--dot", p.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let dot = fs::read_to_string(&p).unwrap();
    assert!(dot.trim_start().starts_with("digraph"));
    for v in ["P", "A^0", "A^1", "B^0", "B^1", "F"] {
        assert!(dot.contains(&format!("\"{v}\"")), "{v} missing from\n{dot}");
    }
}

#[test]
fn lugano_branch_graph_has_a_green_two_cycle() {
    let (code, v) = json(&["branch-graph", "catalog:lugano", "--format", "json"]);
    assert_eq!(code, EXIT_PASS);
    let green: Vec<(&str, &str)> = v["edges"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["kind"] == "green")
        .map(|e| (e["from"].as_str().unwrap(), e["to"].as_str().unwrap()))
        .collect();
    assert!(green.iter().any(|&(a, b)| green.contains(&(b, a))));
}

#[test]
fn branch_graph_refused_for_non_univocal_graph() {
    let r = routact(&["branch-graph", "catalog:grandfather"]);
    assert_eq!(r.code, EXIT_FAIL);
    assert!(!r.err.is_empty());
}

#[test]
fn simulate_exit_codes_and_determinism() {
    let a = routact(&["simulate", "catalog:lugano", "--seed", "7", "--trials", "3", "--format", "json"]);
    assert_eq!(a.code, EXIT_PASS, "{}", a.err);
    let b = routact(&["simulate", "catalog:lugano", "--seed", "7", "--trials", "3", "--format", "json"]);
    assert_eq!(a.out, b.out);
    let c = routact(&["simulate", "catalog:lugano", "--seed", "8", "--trials", "3", "--format", "json"]);
    assert_ne!(a.out, c.out);

    assert_eq!(routact(&["simulate", "catalog:grandfather"]).code, EXIT_FAIL);
    assert_eq!(routact(&["simulate", "catalog:grandfather", "--force", "--trials", "2"]).code, EXIT_FAIL);
    let r = routact(&["simulate", "catalog:grenoble", "--trials", "2"]);
    assert_eq!(r.code, EXIT_BALANCE);
    assert!(r.err.contains("unbalanced"), "{}", r.err);
}

#[test]
fn simulate_rejects_bad_arguments() {
    assert_eq!(routact(&["simulate", "catalog:switch", "--trials", "0"]).code, EXIT_INPUT);
    assert_eq!(routact(&["simulate", "catalog:switch", "--tol", "-1"]).code, EXIT_INPUT);
    assert_eq!(routact(&["frobnicate"]).code, EXIT_INPUT);
}

#[test]
fn choi_of_switch_is_rank_one() {
    let (code, v) = json(&["choi", "catalog:switch", "--format", "json"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(v["dim"], 256);
    assert_eq!(v["rank_one"], true);
    assert_eq!(v["psd"], true);
    assert!((v["trace"].as_f64().unwrap() - 16.0).abs() < 1e-9);
}

#[test]
fn choi_needs_party_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("chain.json");
    let r = routact(&["catalog", "export", "identity", "-o", p.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.err);
    let text = fs::read_to_string(&p).unwrap().replace("\"party\": true", "\"party\": false");
    fs::write(&p, text).unwrap();
    let r = routact(&["choi", p.to_str().unwrap(), "--fleshing", "random"]);
    assert_eq!(r.code, EXIT_INPUT, "{}{}", r.out, r.err);
}

#[test]
fn exported_entries_validate_identically() {
    let dir = tempfile::tempdir().unwrap();
    for id in ["switch", "three-switch", "grenoble", "lugano", "grandfather"] {
        let p = dir.path().join(format!("{id}.json"));
        let fl = dir.path().join(id);
        let r = routact(&["catalog", "export", id, "-o", p.to_str().unwrap(), "--fleshing-dir", fl.to_str().unwrap()]);
        assert_eq!(r.code, EXIT_PASS, "{id}: {}", r.err);
        let (c1, v1) = json(&["validate", &format!("catalog:{id}"), "--format", "json"]);
        let (c2, v2) = json(&["validate", p.to_str().unwrap(), "--format", "json"]);
        assert_eq!((c1, &v1), (c2, &v2), "{id}");
    }
}

#[test]
fn thread_variable_is_validated_by_the_binary() {
    let bin = env!("CARGO_BIN_EXE_routact");
    let bad = Command::new(bin).args(["validate", "catalog:switch"]).env("ROUTACT_THREADS", "abc").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INPUT));
    let ok = Command::new(bin).args(["validate", "catalog:switch"]).env("ROUTACT_THREADS", "2").output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_PASS));
}
