use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use tri_cli::run;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).display().to_string()
}

fn tri(args: &[&str]) -> (i32, String, String) {
    let out = run(std::iter::once("tri").chain(args.iter().copied()));
    (out.code, out.stdout, out.stderr)
}

fn result(stdout: &str) -> Value {
    serde_json::from_str::<Value>(stdout).unwrap()["result"].clone()
}

#[test]
fn report_envelope() {
    let path = fixture("fig8.tri");
    let (code, out, err) = tri(&["validate", &path]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["tool"], "tri");
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"][0], "validate");
    let text = std::fs::read(&path).unwrap();
    use sha2::Digest;
    assert_eq!(v["inputs"][0]["sha256"], hex::encode(sha2::Sha256::digest(&text)));
    assert_eq!(v["result"]["summary"]["isosig"], "2.aaHGSabmni");
    assert!(v.get("timings").is_none());
    let (_, timed, _) = tri(&["--timings", "validate", &path]);
    assert!(serde_json::from_str::<Value>(&timed).unwrap()["timings"]["elapsed_ms"].is_number());
}

#[test]
fn exit_codes() {
    assert_eq!(tri(&["homology", &fixture("fig8.tri")]).0, 0);
    assert_eq!(tri(&["anchor-check", &fixture("k4_rep.json"), "--presentation", &fixture("m367.json")]).0, 1);
    let (code, out, _) = tri(&["solve", &fixture("two_cusp.tri"), "--restarts", "4"]);
    assert_eq!(code, 1);
    assert_eq!(result(&out)["converged"], false);
    for bad in [
        vec!["homology".to_string(), fixture("missing.tri")],
        vec!["solve".to_string()],
        vec!["moves-list".to_string(), fixture("fig8.tri"), "--kind".to_string(), "2-3".to_string()],
        vec!["essential-check".to_string(), fixture("degree_one.tri")],
        vec!["frobnicate".to_string()],
    ] {
        let args: Vec<&str> = bad.iter().map(String::as_str).collect();
        let (code, out, err) = tri(&args);
        assert_eq!(code, 2, "{bad:?}");
        assert!(out.is_empty());
        assert!(err.starts_with("error"), "{err}");
    }
    assert_eq!(tri(&["--help"]).0, 0);
}

#[test]
fn binary_matches_library() {
    let path = fixture("fig8.tri");
    let out = Command::new(env!("CARGO_BIN_EXE_tri")).args(["isosig", &path]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), tri(&["isosig", &path]).1);
    let missing = Command::new(env!("CARGO_BIN_EXE_tri")).args(["isosig", "no/such/file"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn same_seed_same_bytes() {
    let fig8 = fixture("fig8.tri");
    let fold = fixture("fold.tri");
    let runs: Vec<Vec<&str>> = vec![
        vec!["--seed", "11", "solve", &fold],
        vec!["--seed", "11", "--jobs", "1", "solve", &fold],
        vec!["--seed", "11", "--jobs", "4", "solve", &fold],
    ];
    let outs: Vec<String> = runs.iter().map(|a| tri(a).1).collect();
    assert_eq!(result(&outs[0]), result(&outs[1]));
    assert_eq!(result(&outs[1]), result(&outs[2]));
    for args in [runs[0].clone(), vec!["--seed", "5", "build-essential", &fig8], vec!["--seed", "2", "connect", &fig8, &fig8]] {
        let (a, b) = (tri(&args), tri(&args));
        assert_eq!(a.0, 0, "{}", a.2);
        assert_eq!(a.1, b.1);
    }
}

#[test]
fn moves_and_fold_fill() {
    let fig8 = fixture("fig8.tri");
    let (code, out, _) = tri(&["moves-list", &fig8, "--kind", "two_three"]);
    assert_eq!(code, 0);
    let r = result(&out);
    assert_eq!(r["count"], 4);
    let site = r["moves"][0]["site"].as_str().unwrap().to_string();
    let (code, out, err) = tri(&["move", &fig8, "--kind", "two_three", "--site", &site]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(result(&out)["summary"]["tetrahedra"], 3);
    let groups: Vec<String> = (0..3)
        .map(|d| {
            let (code, out, err) = tri(&["fold-fill", &fixture("fold.tri"), "--cusp", "1", "--diagonal", &d.to_string()]);
            assert_eq!(code, 0, "{err}");
            result(&out)["h1_after"]["group"].as_str().unwrap().to_string()
        })
        .collect();
    assert_eq!(groups, ["Z + Z/2", "Z + Z/5", "Z + Z/7"]);
}
