use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

const HEISENBERG: &str = r#"{"group":{"p":5,"blocks":[1,1,1]},"r":1,"images":{"Y_1_2":[0,1],"Y_2_3":[0,1],"Y_1_3":[0,0,3]}}"#;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_frobexp"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str], stdin: &str) -> Value {
    let out = run(args, stdin);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, value: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, value.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn root_system_queries() {
    assert_eq!(
        ok(&["class", "--family", "A", "--rank", "3", "--J", "2"], ""),
        json!({"class": 2})
    );
    assert_eq!(
        ok(
            &["good-prime", "--family", "E", "--rank", "8", "--p", "5"],
            ""
        ),
        json!({"good": false})
    );
    assert_eq!(
        ok(
            &["good-prime", "--family", "E", "--rank", "8", "--p", "7"],
            ""
        ),
        json!({"good": true})
    );
    let info = ok(&["root-info", "--family", "G", "--rank", "2"], "");
    assert_eq!(info["coxeter_number"], json!(6));
    assert_eq!(info["positive_roots"].as_array().unwrap().len(), 6);
    assert_eq!(info["class"], json!(5));
}

#[test]
fn make_group_lists_generators_in_order() {
    let g = ok(&["make-group", "--blocks", "1,1,1", "--p", "5"], "");
    let names: Vec<&str> = g["generators"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["Y_1_2", "Y_2_3", "Y_1_3"]);
    assert_eq!(
        g["generators"][2]["comultiplication"],
        json!("Y'_1_3 + Y''_1_3 + Y'_1_2*Y''_2_3")
    );
    assert_eq!(g["class"], json!(2));
}

#[test]
fn lift_echoes_low_degree_coefficients() {
    let lifted = ok(&["lift"], HEISENBERG);
    let mut expected: Value = serde_json::from_str(HEISENBERG).unwrap();
    expected.as_object_mut().unwrap().remove("r");
    assert_eq!(lifted, expected);
    assert_eq!(
        serde_json::to_string(&lifted["images"]).unwrap(),
        r#"{"Y_1_2":[0,1],"Y_2_3":[0,1],"Y_1_3":[0,0,3]}"#
    );
}

#[test]
fn outputs_feed_their_consumers() {
    let dir = tempfile::tempdir().unwrap();
    let lifted = ok(&["lift"], HEISENBERG);
    let tuple = ok(&["extract"], &lifted.to_string());
    assert_eq!(
        tuple,
        json!({"p": 5, "n": 3, "entries": [[0, 1, 0, 0, 0, 1, 0, 0, 0]]})
    );
    let back = ok(
        &["tuple-to-morphism", "--blocks", "1,1,1"],
        &tuple.to_string(),
    );
    assert_eq!(back, serde_json::from_str::<Value>(HEISENBERG).unwrap());
    assert_eq!(
        ok(&["exp", "--blocks", "1,1,1"], &tuple.to_string()),
        lifted
    );
    assert_eq!(ok(&["restrict", "--r", "1"], &lifted.to_string()), back);
    assert_eq!(
        ok(&["validate"], &back.to_string()),
        json!({"valid": true, "kind": "infinitesimal"})
    );

    let a = write(dir.path(), "a.json", &back);
    let conj = ok(
        &["conjugate", "--x", "2,0,0,0,1,0,0,0,3", "--input", &a],
        "",
    );
    let b = write(dir.path(), "b.json", &conj);
    assert_eq!(ok(&["commute", &a, &b], ""), json!({"commute": true}));
    let other: Value = serde_json::from_str(
        r#"{"group":{"p":5,"blocks":[1,1,1]},"r":1,"images":{"Y_1_2":[0,1],"Y_2_3":[0,0],"Y_1_3":[0,0]}}"#,
    )
    .unwrap();
    let c = write(dir.path(), "c.json", &other);
    assert_eq!(ok(&["commute", &a, &c], ""), json!({"commute": false}));

    let flag = ok(&["engel"], &tuple.to_string());
    assert_eq!(flag["conjugated"]["n"], json!(3));
}

#[test]
fn exit_codes() {
    let bad = HEISENBERG.replace("[0,0,3]", "[0,0,1]");
    let out = run(&["validate"], &bad);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("Y_1_3"));

    assert_eq!(run(&["validate"], "{not json").status.code(), Some(2));
    let out = run(&["frobnicate"], "");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tuple-to-morphism"));
    let out = run(
        &[
            "oracle",
            "commutation",
            "--blocks",
            "1,1,1",
            "--p",
            "3",
            "--r",
            "1",
        ],
        "",
    );
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["make-group", "--blocks", "1,1,1,1", "--p", "3"], "");
    assert_eq!(out.status.code(), Some(1));
    let out = run(
        &[
            "oracle",
            "count-tuples",
            "--blocks",
            "1,1,1",
            "--p",
            "5",
            "--r",
            "2",
            "--budget",
            "100",
        ],
        "",
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_subcommands() {
    let args = ["--blocks", "1,1,1", "--p", "3", "--r", "2"];
    let count = ok(&[&["oracle", "count-tuples"][..], &args].concat(), "");
    assert_eq!(count["tuples"], json!(297));
    let count = ok(&[&["oracle", "count-morphisms"][..], &args].concat(), "");
    assert_eq!(count["morphisms"], json!(297));
    let report = ok(&[&["oracle", "verify-bijection"][..], &args].concat(), "");
    assert_eq!(report["failures"], json!([]));
    assert_eq!(report["counts"]["distinct_morphisms"], json!(297));
    let report = ok(&[&["oracle", "surjectivity"][..], &args].concat(), "");
    assert_eq!(report["failures"], json!([]));

    let sampled = [
        "oracle",
        "commutation",
        "--blocks",
        "1,2,1",
        "--p",
        "5",
        "--r",
        "2",
        "--samples",
        "20",
        "--seed",
        "4",
    ];
    let first = ok(&sampled, "");
    assert_eq!(first["seed"], json!(4));
    assert_eq!(first["failures"], json!([]));
    assert_eq!(ok(&sampled, "")["counts"], first["counts"]);
    let report = ok(
        &[
            "oracle",
            "equivariance",
            "--blocks",
            "2,1",
            "--p",
            "5",
            "--r",
            "1",
            "--samples",
            "8",
            "--seed",
            "1",
        ],
        "",
    );
    assert_eq!(report["failures"], json!([]));
}
