use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(format!("{name}.st"))
        .display()
        .to_string()
}

fn modeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modeq"))
        .args(args)
        .env_remove("MODEQ_MAX_ORDER")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(v, again);
    v
}

#[test]
fn aut_of_a_triangle() {
    let o = modeq(&["aut", &fixture("c3")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("|Aut(M)| = 3"), "{text}");
    assert!(text.contains("(0 1 2)"), "{text}");
}

#[test]
fn oracle_cross_check_in_json() {
    let o = modeq(&["aut", &fixture("t4"), "--oracle", "--json", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["results"]["order"], 8);
    assert_eq!(v["results"]["oracle_agrees"], true);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(modeq(&["aut", "missing.st"]).status.code(), Some(2));
    assert_eq!(modeq(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.st");
    std::fs::write(
        &bad,
        "structure X\nsort V = { a }\nrel E/2 : V,V = { (a,b) }\n",
    )
    .unwrap();
    let o = modeq(&["aut", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown element"));
}

#[test]
fn bound_exceeded_exits_with_two() {
    let o = Command::new(env!("CARGO_BIN_EXE_modeq"))
        .args(["section", "search", &fixture("cover_m4_n2"), "--sub", "N"])
        .env("MODEQ_MAX_ORDER", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the configured bound"));
}

#[test]
fn closures_and_orbits() {
    let o = modeq(&["dcl", &fixture("square"), "--fix", "0", "--oracle"]);
    assert!(stdout(&o).contains("dcl(0) = {0, 2}"));
    let o = modeq(&["orbit", &fixture("square"), "--tuple", "0,2", "--json"]);
    assert_eq!(json(&o)["results"]["orbit"].as_array().unwrap().len(), 4);
}

#[test]
fn failed_embedding_exits_with_one() {
    let o = modeq(&["exact", &fixture("bipartite"), "--sub", "A"]);
    assert_eq!(o.status.code(), Some(1));
    let o = modeq(&["exact", &fixture("cover_m4_n2"), "--sub", "N", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["results"]["kernel"], 2);
}

#[test]
fn torsor_cover_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c62.st");
    let p = path.to_str().unwrap();
    assert_eq!(
        modeq(&["torsor", "--m", "6", "--n", "2", "--out", p])
            .status
            .code(),
        Some(0)
    );
    let o = modeq(&["section", "search", p, "--sub", "N", "--json"]);
    let v = json(&o);
    assert_eq!(v["results"]["count"], 1);
    assert_eq!(v["results"]["sections"][0]["roundtrip"], true);
    let o = modeq(&["cover", "check", p, "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["results"]["main_theorem"]["elimination"], false);
    assert_eq!(
        v["results"]["main_theorem"]["definable_points"],
        Value::Array(vec![])
    );
    let named = dir.path().join("c62e.st");
    modeq(&[
        "torsor",
        "--m",
        "6",
        "--n",
        "2",
        "--named-point",
        "--out",
        named.to_str().unwrap(),
    ]);
    let o = modeq(&["main-theorem", "--file", named.to_str().unwrap(), "--json"]);
    assert_eq!(json(&o)["results"]["definable_points"][0], "n0");
    assert_eq!(
        modeq(&["torsor", "--m", "6", "--n", "4", "--out", p])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn family_sweep_is_a_json_array_of_passes() {
    let o = modeq(&[
        "main-theorem",
        "--family",
        "cyclic",
        "--max-m",
        "12",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let reports = v.as_array().unwrap();
    assert!(!reports.is_empty());
    for r in reports {
        for key in [
            "instance",
            "sections",
            "definable_points",
            "elimination",
            "verdict",
        ] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
        assert_eq!(r["verdict"], "pass");
    }
    assert_eq!(
        modeq(&["main-theorem", "--family", "elliptic"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn stabilizer_realization_from_a_group_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("a3.grp");
    std::fs::write(&g, "group A3\ngen = (g0 g4 g3)(g1 g5 g2)\n").unwrap();
    let o = modeq(&[
        "imag",
        "stab",
        &fixture("s3"),
        "--subgroup",
        g.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["results"]["realized"], true);
    assert_eq!(v["results"]["zero_definable"], true);
    std::fs::write(&g, "group X\ngen = (g1 g2 g3)\n").unwrap();
    assert_eq!(
        modeq(&[
            "imag",
            "stab",
            &fixture("s3"),
            "--subgroup",
            g.to_str().unwrap()
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn quotients() {
    let o = modeq(&[
        "imag",
        "quotient",
        &fixture("t4"),
        "--d",
        "x = x",
        "--e",
        "{x:V, y:V | x = y}",
        "--json",
    ]);
    assert_eq!(json(&o)["results"]["classes"].as_array().unwrap().len(), 4);
    let o = modeq(&[
        "imag",
        "quotient",
        &fixture("square"),
        "--d",
        "x = x",
        "--e",
        "{x:V, y:V | E(x,y)}",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn interpretations_from_map_files() {
    let dir = tempfile::tempdir().unwrap();
    let id = dir.path().join("id.map");
    std::fs::write(&id, "0 -> 0\n1 -> 1\n2 -> 2\n").unwrap();
    let o = modeq(&[
        "morph",
        "iso",
        &fixture("c3"),
        &fixture("c3_both"),
        "--map",
        id.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let diag = dir.path().join("diag.map");
    std::fs::write(
        &diag,
        "equiv { x1:V, y1:W, x2:V, y2:W | (E(x1,x2) & F(y1,y2)) | (E(x2,x1) & F(y2,y1)) | (x1 = x2 & y1 = y2) }\n\
         0 -> (0, 0')\n1 -> (1, 0')\n2 -> (2, 0')\n",
    )
    .unwrap();
    let d = diag.to_str().unwrap();
    assert_eq!(
        modeq(&[
            "morph",
            "embed",
            &fixture("c3"),
            &fixture("two_c3"),
            "--map",
            d
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(
        modeq(&[
            "morph",
            "surj",
            &fixture("c3"),
            &fixture("two_c3"),
            "--map",
            d
        ])
        .status
        .code(),
        Some(1)
    );
    // A directed path is not definable in the undirected square.
    std::fs::write(&id, "0 -> 0\n1 -> 1\n2 -> 2\n3 -> 3\n").unwrap();
    let o = modeq(&[
        "morph",
        "check",
        &fixture("chain4"),
        &fixture("square"),
        "--map",
        id.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tower_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("c3"), dir.path().join("level0.st")).unwrap();
    std::fs::copy(fixture("c3_both"), dir.path().join("level1.st")).unwrap();
    std::fs::write(
        dir.path().join("inclusions.map"),
        "map 0 -> 1\n0 -> 1\n1 -> 2\n2 -> 0\n",
    )
    .unwrap();
    let o = modeq(&["tower", "check", dir.path().to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["results"]["orders"], serde_json::json!([3, 3]));
    assert_eq!(
        modeq(&["tower", "check", "/nonexistent"]).status.code(),
        Some(2)
    );
}
