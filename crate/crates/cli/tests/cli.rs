use std::path::Path;
use std::process::{Command, Output};

use okacert::ConvexSetSpec;
use okacert_cli::{parse_set_spec, SpecError};

fn okacert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_okacert")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn parse_examples() {
    assert_eq!(parse_set_spec(r#"{"type":"siegel","n":2}"#).unwrap(), ConvexSetSpec::Siegel { n: 2 });
    let h = parse_set_spec(r#"{"type":"polyhedron","A":[[1,0]],"b":[1]}"#).unwrap();
    assert_eq!(h, ConvexSetSpec::Polyhedron { a: vec![vec![1.0, 0.0]], b: vec![1.0] });
    assert!(matches!(
        parse_set_spec(r#"{"type":"polyhedron","A":[[1],[-1]],"b":[-1,-1]}"#),
        Err(SpecError::InfeasiblePolyhedron)
    ));
    match parse_set_spec(r#"{"type":"polyhedron","A":[[1, "x"]],"b":[1]}"#) {
        Err(SpecError::Schema { message, .. }) => assert!(message.contains("expected f64"), "{message}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn examples_list_and_emit() {
    let o = okacert(&["examples", "list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["siegel2", "siegel3", "cone-ex14", "tube-ex45", "disc-tube-prop49", "r2-in-c2", "halfspace", "ball"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
    let o = okacert(&["examples", "emit", "siegel2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(parse_set_spec(&String::from_utf8(o.stdout).unwrap()).unwrap(), ConvexSetSpec::Siegel { n: 2 });
}

#[test]
fn certify_exit_codes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("siegel2.json");
    std::fs::write(&spec, okacert(&["examples", "emit", "siegel2"]).stdout).unwrap();
    let cert = dir.path().join("cert.json");
    let o = okacert(&["certify", spec.to_str().unwrap(), "--out", cert.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let c: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c["overall"], "Verified-Sampled");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cert.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "certify");
    for p in m["outputs"].as_array().unwrap() {
        assert!(Path::new(p.as_str().unwrap()).exists());
    }
    let out = dir.path().join("h.json");
    assert_eq!(code(&okacert(&["certify", "halfspace", "--out", out.to_str().unwrap()])), 1);
    assert!(out.exists());
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&okacert(&["frobnicate"])), 64);
    assert_eq!(code(&okacert(&["certify"])), 64);
    assert_eq!(code(&okacert(&["certify", "no-such-example"])), 64);
    assert_eq!(code(&okacert(&["certify", "siegel2", "--samples", "0"])), 64);
    assert_eq!(code(&okacert(&["--help"])), 0);
}

#[test]
fn samples_and_seed_reach_the_plan() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = okacert(&["certify", "ball", "--samples", "50", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let c: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(c["plan"]["boundary"], 50);
    assert_eq!(c["plan"]["seed"], 7);
}

#[test]
fn out_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_okacert"))
        .args(["certify", "ball", "--out", "nested/ball.json"])
        .env(okacert_cli::OUT_DIR_VAR, dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("nested/ball.json").exists());
}

#[test]
fn basin_with_config_and_slice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"grid":{"slice":"z1","fixed":[0.0,0.0],"center":[1.0,0.0],"half_width":1.0,"n":24}}"#).unwrap();
    let out = dir.path().join("r.json");
    let o = okacert(&["basin", cfg.to_str().unwrap(), "--slice", "z2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["basin_in_k"], 0);
    assert_eq!(r["basin_on_hyperplane"], 0);
    let csv = std::fs::read_to_string(dir.path().join("r.json.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 24 * 24);
    // the z2 = f2 slice holds z2 = 1 on every row
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("1")));
    assert!(dir.path().join("r.json.svg").exists());
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"a":0.2,"b":0.6}"#).unwrap();
    assert_eq!(code(&okacert(&["basin", bad.to_str().unwrap()])), 64);
}

#[test]
fn basin_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"grid":{"slice":"z1","fixed":[0.0,0.0],"center":[0.0,1.0],"half_width":0.5,"n":8}}"#).unwrap();
    let o = okacert(&["basin", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("re_z1,im_z1,re_z2,im_z2,label,k\n"));
}

#[test]
fn approx_writes_state() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("disc.json");
    std::fs::write(&spec, r#"{"type":"ball","center":[0,0],"radius":1}"#).unwrap();
    let out = dir.path().join("state.json");
    let o = okacert(&["approx", spec.to_str().unwrap(), "--steps", "2", "--window", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(s["step_ends"].as_array().unwrap().len(), 2);
    assert_eq!(code(&okacert(&["approx", "halfspace"])), 64);
}

#[test]
fn cayley_check() {
    let o = okacert(&["cayley", "--check", "2000", "--dim", "3"]);
    assert_eq!(code(&o), 0);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["pass"], true);
    assert!(r["max_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    okacert(&["certify", "cone-ex14", "--out", out.to_str().unwrap()]);
    let first = std::fs::read(&out).unwrap();
    std::fs::remove_file(&out).unwrap();
    let o = okacert(&["replay", dir.path().join("c.json.manifest.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(&out).unwrap(), first);
}
