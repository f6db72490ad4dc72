use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn menugap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_menugap"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn read(dir: &Path, name: &str) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join(name)).unwrap()).unwrap()
}

const DIST: &str = r#"{"k": 2, "support": [{"v": [1, 0], "p": "1/2"}, {"v": [0, 2], "p": 0.5}]}"#;

#[test]
fn sequence_and_gap_commands() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    let out = menugap(
        d,
        &[
            "build-sequence",
            "--layers",
            "3",
            "--out",
            "x.json",
            "--q-out",
            "q.json",
        ],
    );
    assert!(out.status.success());
    assert_eq!(read(d, "x.json")["points"].as_array().unwrap().len(), 10);

    let lp = stdout_json(&menugap(d, &["menugap", "x.json", "--lp"]));
    let given = stdout_json(&menugap(
        d,
        &["menugap", "x.json", "--q", "q.json", "--csv", "g.csv"],
    ));
    assert!(lp["objective"].as_f64().unwrap() >= given["objective"].as_f64().unwrap() - 1e-9);
    let csv = std::fs::read_to_string(d.join("g.csv")).unwrap();
    assert!(csv.starts_with("index,raw,clipped,normalized,cumulative,witness"));
    assert_eq!(csv.lines().count(), 11);

    let lag = menugap(d, &["aligngap", "x.json", "--lagrel"]);
    assert_eq!(lag.status.code(), Some(0));
    let lag = stdout_json(&lag);
    assert_eq!(lag["chain"]["chain_valid"], true);
    let search = stdout_json(&menugap(d, &["aligngap", "x.json", "--search"]));
    assert!(search["objective"].as_f64().unwrap() <= lag["objective"].as_f64().unwrap());

    let exact = menugap(d, &["--backend", "rational", "menugap", "x.json", "--sup"]);
    assert!(stdout_json(&exact)["objective"]
        .as_str()
        .unwrap()
        .contains('/'));

    let bounds = menugap(d, &["bounds", "--layers", "6", "--csv", "b.csv"]);
    assert!(bounds.status.success());
    assert_eq!(
        std::fs::read_to_string(d.join("b.csv"))
            .unwrap()
            .lines()
            .count(),
        6
    );
}

#[test]
fn auction_commands() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    std::fs::write(d.join("d.json"), DIST).unwrap();
    assert!(menugap(d, &["optmech", "d.json", "--out", "m.json"])
        .status
        .success());
    assert_eq!(read(d, "m.json")["menu"].as_array().unwrap().len(), 3);

    let rev = stdout_json(&menugap(d, &["rev", "d.json", "m.json"]));
    assert_eq!(rev["rev"].as_f64(), Some(1.5));
    let brev = stdout_json(&menugap(d, &["--backend", "rational", "brev", "d.json"]));
    assert_eq!(brev["brev"], "1");
    let verify = menugap(d, &["verify", "d.json", "m.json"]);
    assert_eq!(verify.status.code(), Some(0));

    // Intended entry 0 is dominated for the second buyer.
    std::fs::write(
        d.join("bad.json"),
        r#"{"k": 2, "menu": [{"q": [1, 0], "price": 1}, {"q": [0, 1], "price": 1}], "assignment": [0, 0]}"#,
    )
    .unwrap();
    let bad = menugap(d, &["verify", "d.json", "bad.json"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(stdout_json(&bad)["ok"], false);

    let cert = menugap(
        d,
        &[
            "--backend",
            "rational",
            "certify",
            "d.json",
            "--out",
            "c.json",
        ],
    );
    assert_eq!(cert.status.code(), Some(0));
    assert_eq!(read(d, "c.json")["pass"], true);
    let ext = menugap(d, &["certify", "d.json", "--ext", "m.json"]);
    assert_eq!(stdout_json(&ext)["pipeline"], "aligned");
}

#[test]
fn construction_round_trip_commands() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    menugap(
        d,
        &[
            "build-sequence",
            "--layers",
            "2",
            "--out",
            "x.json",
            "--q-out",
            "q.json",
        ],
    );
    let hn = menugap(
        d,
        &[
            "--backend",
            "rational",
            "hn-construct",
            "x.json",
            "q.json",
            "--base",
            "10",
            "--out-dist",
            "hd.json",
            "--out-mech",
            "hm.json",
        ],
    );
    assert!(hn.status.success());
    let hn = stdout_json(&hn);
    assert_eq!(hn["ic_ok"], true);
    assert_eq!(hn["buys_intended"], serde_json::json!([true, true, true]));

    std::fs::create_dir(d.join("cands")).unwrap();
    std::fs::write(
        d.join("cands/bundle.json"),
        r#"{"menu": [{"q": [1, 1], "price": 2}]}"#,
    )
    .unwrap();
    let prop = menugap(
        d,
        &[
            "--backend",
            "rational",
            "prop-hn",
            "x.json",
            "q.json",
            "--base",
            "10",
            "--candidates",
            "cands",
        ],
    );
    assert_eq!(prop.status.code(), Some(0));
    assert_eq!(
        stdout_json(&prop)["candidates"].as_array().unwrap().len(),
        2
    );
}

#[test]
fn exit_codes_and_manifest() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    assert_eq!(
        menugap(d, &["rev", "missing.json", "missing.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(menugap(d, &["no-such-command"]).status.code(), Some(1));
    assert_eq!(menugap(d, &["--help"]).status.code(), Some(0));

    std::fs::write(
        d.join("bad.json"),
        r#"{"k": 2, "support": [{"v": [1], "p": 1}]}"#,
    )
    .unwrap();
    let out = menugap(d, &["brev", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("support[0].v"));

    std::fs::write(d.join("d.json"), DIST).unwrap();
    let out = menugap(
        d,
        &["--manifest", "run.json", "--seed", "7", "brev", "d.json"],
    );
    assert!(out.status.success());
    let man = read(d, "run.json");
    assert_eq!(man["subcommand"], "brev");
    assert_eq!(man["config"]["seed"], 7);
    assert_eq!(man["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(man["wall_time_secs"].as_f64().unwrap() >= 0.0);
}

#[test]
fn reproduce_modes() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    let out = menugap(
        d,
        &[
            "reproduce",
            "--paper-bounds",
            "--layers",
            "10",
            "--csv",
            "t.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(d.join("t.csv"))
            .unwrap()
            .lines()
            .count(),
        10
    );

    let quick = menugap(d, &["reproduce", "--quick", "--out", "bundle"]);
    assert_eq!(quick.status.code(), Some(0));
    let text = String::from_utf8_lossy(&quick.stdout);
    assert_eq!(text.lines().filter(|l| l.contains(" PASS ")).count(), 5);
    assert!(d.join("bundle/criteria.json").exists());

    let gap = menugap(d, &["reproduce", "--criterion", "2"]);
    assert_eq!(gap.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&gap.stdout).contains("0 at interior indices"));
}
