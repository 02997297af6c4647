use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_synccorr"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run(args: &[&str]) -> (i32, Value, Output) {
    let out = bin().args(args).output().expect("binary runs");
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let json: Value = serde_json::from_str(text.trim())
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {text}"));
    (out.status.code().unwrap(), json, out)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_names_the_normalization_failure() {
    let (code, json, _) = run(&["validate", path(&fixture("remark_q.json"))]);
    assert_ne!(code, 0);
    let failed = json["failed_constraints"].as_array().unwrap();
    assert!(failed.contains(&Value::from("normalization")));
    let (code, json, _) = run(&["validate", path(&fixture("remark_p.json"))]);
    assert_eq!(code, 0);
    assert_eq!(json["report"]["is_synchronous"], true);
}

#[test]
fn malformed_file_gives_error_object() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"n": 2, "m": 2, "p": [[[[1.0]]]]}"#).unwrap();
    let (code, json, _) = run(&["validate", path(&bad)]);
    assert_eq!(code, 2);
    assert_eq!(json["error"], "json");
    assert!(json["message"].as_str().unwrap().contains("shape mismatch"));

    let (code, json, _) = run(&["validate", path(&dir.path().join("missing.json"))]);
    assert_eq!(code, 2);
    assert_eq!(json["error"], "io");
}

#[test]
fn infeasible_matrix_names_its_inequality() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("w.json");
    fs::write(&bad, r#"{"n": 2, "w": [[0.5, 0.7], [0.7, 0.9]]}"#).unwrap();
    let (code, json, _) = run(&["map", "--to-tensor", path(&bad)]);
    assert_eq!(code, 2);
    assert_eq!(json["error"], "infeasible-matrix");
    assert!(json["message"]
        .as_str()
        .unwrap()
        .contains("w[x][y] <= w[x][x]"));
}

#[test]
fn usage_errors_are_json() {
    let (code, json, _) = run(&["slice", "--y", ".5,.5,.5"]);
    assert_eq!(code, 2);
    assert_eq!(json["error"], "usage");
}

#[test]
fn slice_landmark_and_emitted_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let (code, json, _) = run(&[
        "slice",
        "--y",
        ".5,.5,.5",
        "--x",
        "1,1,1",
        "--class",
        "q",
        "--side",
        "lower",
        "--emit-model",
        path(&model),
    ]);
    assert_eq!(code, 0);
    assert!((json["value"].as_f64().unwrap() - 0.375).abs() < 1e-12);
    assert_eq!(json["blocks"], 9);
    assert_eq!(json["degenerate_path"], false);

    let out = dir.path().join("tensor.json");
    let (code, json, _) = run(&["synth", path(&model), "--out", path(&out)]);
    assert_eq!(code, 0);
    let p = &json["tensor"]["p"];
    assert!((p[0][1][0][0].as_f64().unwrap() - 0.125).abs() < 1e-12);
    assert!((p[2][2][0][0].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let (code, json, _) = run(&["map", "--to-matrix", path(&out)]);
    assert_eq!(code, 0);
    assert!((json["matrix"]["w"][1][2].as_f64().unwrap() - 0.125).abs() < 1e-12);
}

#[test]
fn slice_accepts_negative_directions() {
    let (code, json, _) = run(&[
        "slice", "--y", ".5,.6,.7", "--x", "0,1,-1", "--class", "q", "--side", "upper",
    ]);
    assert_eq!(code, 0);
    assert!((json["value"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    assert_eq!(json["degenerate_path"], true);
    let (code, json, _) = run(&[
        "slice",
        "--y",
        ".5,.5,.5,.5",
        "--x",
        "1,1,1,1,1,1",
        "--class",
        "q",
        "--side",
        "upper",
    ]);
    assert_eq!(code, 2);
    assert_eq!(json["error"], "unsupported");
}

#[test]
fn verify_single_point_and_grid() {
    let (code, json, _) = run(&["verify-universal3", "--a", "1", "--b", "1"]);
    assert_eq!(code, 0);
    assert_eq!(json["t"], 0.25);
    assert_eq!(json["z"], 0.25);
    assert!(json["max_residual"].as_f64().unwrap() <= 1e-12);

    let (code, json, _) = run(&["verify-universal3", "--a", "-1.5", "--b", "0.5"]);
    assert_eq!(code, 0, "{json}");

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("grid.csv");
    let (code, json, _) = run(&["verify-universal3", "--grid", "--out", path(&csv)]);
    assert_eq!(code, 0);
    assert!(json["grid_m2_points"].as_u64().unwrap() >= 50);
    assert_eq!(json["failures"], 0);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("a,b,t,z,has_m2,max_residual,double_root,passed\n"));
    assert_eq!(text.lines().count(), 1 + 196 + 100);
}

#[test]
fn embed_then_project() {
    let dir = tempfile::tempdir().unwrap();
    let embedded = dir.path().join("e.json");
    let (code, json, _) = run(&[
        "embed",
        "--m",
        "2",
        path(&fixture("remark_p.json")),
        "--out",
        path(&embedded),
    ]);
    assert_eq!(code, 0);
    assert_eq!(json["n"], 4);
    let back = dir.path().join("b.json");
    let (code, json, _) = run(&[
        "project",
        "--n",
        "2",
        "--m",
        "2",
        path(&embedded),
        "--out",
        path(&back),
    ]);
    assert_eq!(code, 0);
    assert_eq!(json["in_face"], true);
    let original: Value =
        serde_json::from_str(&fs::read_to_string(fixture("remark_p.json")).unwrap()).unwrap();
    let roundtrip: Value = serde_json::from_str(&fs::read_to_string(&back).unwrap()).unwrap();
    assert_eq!(original, roundtrip);

    let (code, json, _) = run(&["embed", "--m", "2", path(&fixture("remark_q.json"))]);
    assert_eq!(code, 2);
    assert!(json["error"].is_string());
}

#[test]
fn sample_dominate_pipeline_is_clean_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let s1 = dir.path().join("s1.csv");
    let s2 = dir.path().join("s2.csv");
    let (code, _, _) = run(&["sample", "--out", path(&s1)]);
    assert_eq!(code, 0);
    let (code, _, _) = run(&["sample", "--out", path(&s2)]);
    assert_eq!(code, 0);
    assert_eq!(fs::read(&s1).unwrap(), fs::read(&s2).unwrap());

    let queries = fixture("queries.json");
    let r1 = dir.path().join("r1.csv");
    let r2 = dir.path().join("r2.csv");
    let (code, json, out1) = run(&[
        "dominate",
        "--samples",
        path(&s1),
        "--queries",
        path(&queries),
        "--out",
        path(&r1),
    ]);
    assert_eq!(code, 0, "{json}");
    assert_eq!(json["no_data"], 0);
    assert_eq!(json["violations"], 0);
    let (_, _, out2) = run(&[
        "dominate",
        "--samples",
        path(&s1),
        "--queries",
        path(&queries),
        "--out",
        path(&r2),
    ]);
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
    assert_eq!(
        String::from_utf8(out1.stdout)
            .unwrap()
            .replace(path(&r1), ""),
        String::from_utf8(out2.stdout)
            .unwrap()
            .replace(path(&r2), "")
    );
    assert!(fs::read_to_string(&r1)
        .unwrap()
        .starts_with("query-id,value,degenerate_path,max_residual\n"));
}

#[test]
fn dominate_without_neighbors_is_not_clean() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.csv");
    fs::write(&samples, "y0,y1,y2,w01,w02,w12\n0,0,0,0,0,0\n").unwrap();
    let (code, json, _) = run(&[
        "dominate",
        "--samples",
        path(&samples),
        "--queries",
        path(&fixture("queries.json")),
    ]);
    assert_eq!(code, 1);
    assert!(json["no_data"].as_u64().unwrap() > 0);
    assert_eq!(json["clean"], false);
}
