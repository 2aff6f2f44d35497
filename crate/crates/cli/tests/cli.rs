use std::path::PathBuf;
use std::process::{Command, Output};

fn mazlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mazlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mazlab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn generate_domain_round_trips_through_report() {
    let o = mazlab(&["generate-domain", "--generator", "harmonic_comb", "--truncation", "6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let spec: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(spec["name"], "harmonic_comb");
    assert_eq!(spec["truncation"], 6);

    let dir = scratch("spec");
    let path = dir.join("comb.json");
    std::fs::write(&path, &text).unwrap();
    let o = mazlab(&[
        "mazurkiewicz",
        "--domain",
        path.to_str().unwrap(),
        "--spacing",
        "0.005",
        "--x",
        "0.1,0.5",
        "--y",
        "0.9,0.5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("[result 01-mazurkiewicz]"));
}

#[test]
fn generate_domain_writes_bitmask() {
    let dir = scratch("mask");
    let mask = dir.join("disk.pbm");
    let o = mazlab(&["generate-domain", "--generator", "disk", "--spacing", "0.1", "--mask", mask.to_str().unwrap()]);
    assert!(o.status.success());
    let pbm = std::fs::read_to_string(&mask).unwrap();
    assert!(pbm.starts_with("P1"));
    assert!(pbm.contains("20 20"));
}

#[test]
fn modulus_expectation_sets_exit_code() {
    let base = ["modulus", "--generator", "rectangle", "--param", "x1=2", "--spacing", "0.1", "--E", "left", "--F", "right"];
    let ok = mazlab(&[&base[..], &["--expect", "value=0.5"]].concat());
    assert!(ok.status.success(), "{}", stdout(&ok));
    let bad = mazlab(&[&base[..], &["--expect", "value=0.7"]].concat());
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("expectation failed: value"));
}

#[test]
fn bad_input_exits_with_usage_error() {
    let o = mazlab(&["modulus", "--generator", "no_such", "--spacing", "0.1", "--E", "left", "--F", "right"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let o = mazlab(&["mazurkiewicz", "--spacing", "0.1", "--x", "0,0", "--y", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_writes_artifacts_to_out_dir() {
    let dir = scratch("report");
    let cfg = dir.join("config.json");
    std::fs::write(
        &cfg,
        r#"{
  "domain": {"generator": "slit_disk"},
  "spacing": 0.02,
  "analyses": [
    {"kind": "prime_ends", "anchors": [[0.5, 0.0], [0.0, 1.0]], "r0": 0.5, "depth": 2},
    {"kind": "modulus", "e": "left", "f": "right"}
  ]
}"#,
    )
    .unwrap();
    let out = dir.join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_mazlab"))
        .args(["report", cfg.to_str().unwrap()])
        .env("MAZLAB_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("[result 01-prime_ends]") && text.contains("[result 02-modulus]"));
    assert_eq!(std::fs::read_to_string(out.join("report.txt")).unwrap(), text);
    let svgs = std::fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg")).count();
    assert!(svgs >= 1);
}

#[test]
fn map_verbs_run() {
    for args in [
        vec!["check-qs", "--map", "z_squared", "--triples", "40"],
        vec!["check-bqs", "--map", "identity", "--pairs", "20"],
        vec!["qc-check", "--map", "identity", "--families", "2"],
        vec!["push-chain", "--map", "z_squared", "--anchors", "0.5,0;-0.5,0", "--r0", "0.5", "--depth", "3"],
    ] {
        let mut full = vec!["--generator", "half_disk", "--spacing", "0.0625"];
        full.splice(0..0, args.clone());
        let o = mazlab(&full);
        assert!(o.status.code().is_some_and(|c| c < 2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("[result 01-"), "{args:?}");
    }
}

#[test]
fn ends_and_loewner_verbs_run() {
    let o = mazlab(&[
        "ends-at-infinity",
        "--generator",
        "strip",
        "--spacing",
        "0.05",
        "--basepoint",
        "0.5,0.5",
        "--radii",
        "1,2,3",
    ]);
    assert!(o.status.code().is_some_and(|c| c < 2), "{}", String::from_utf8_lossy(&o.stderr));
    let o = mazlab(&["loewner", "--generator", "rectangle", "--spacing", "0.0625", "--Q", "2", "--samples", "12"]);
    assert!(o.status.code().is_some_and(|c| c < 2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("fitted_c"));
}
