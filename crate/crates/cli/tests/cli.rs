use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn umetric(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_umetric"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two points at distance 0, both at distance 1 from the third.
const ZERO_PAIR: &str = "0,0,1\n0,0,1\n1,1,0\n";
const TRIANGLE_345: &str = r#"{"d": [["0", "3", "4"], ["3", "0", "5"], ["4", "5", "0"]]}"#;
const F_1_3: &str = r#"{"kind": "piecewise_affine", "pieces": [
  {"from": "0", "to": "0", "from_closed": true, "to_closed": true, "slope": "0", "intercept": "0"},
  {"from": "0", "to": "1", "from_closed": false, "to_closed": true, "slope": "0", "intercept": "1/2"},
  {"from": "1", "to": null, "from_closed": false, "to_closed": false, "slope": "0", "intercept": "3"}
]}"#;

#[test]
fn classify_space_requirements() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "ex.csv", ZERO_PAIR);
    let r = umetric(&["classify-space", "--input", s(&p), "--require", "ultrametric"]);
    assert_eq!(r.code, 1);
    let j = r.json();
    assert_eq!(j["schema"], "umetric-report/1");
    assert_eq!(
        j["result"]["report"]["identity_of_indiscernibles"]["witness"],
        serde_json::json!([0, 1])
    );
    assert_eq!(j["result"]["witness_values"]["identity_of_indiscernibles"], "0");
    assert_eq!(
        umetric(&["classify-space", "--input", s(&p), "--require", "pseudoultrametric"]).code,
        0
    );
}

#[test]
fn snowflake_cube_fails_on_345() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "t.json", TRIANGLE_345);
    let r = umetric(&["probe-snowflake", "--input", s(&p), "--alpha", "3"]);
    assert_eq!(r.code, 1);
    let j = r.json();
    let t: Vec<usize> = serde_json::from_value(j["result"]["verdict"]["triple"].clone()).unwrap();
    let sides: Vec<i64> = j["result"]["sides"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().parse().unwrap())
        .collect();
    assert_eq!(t.len(), 3);
    assert!(sides[0].pow(3) > sides[1].pow(3) + sides[2].pow(3));
    assert_eq!(umetric(&["probe-snowflake", "--input", s(&p), "--alpha", "2"]).code, 0);
    assert_eq!(umetric(&["probe-snowflake", "--input", s(&p), "--alpha", "201/100"]).code, 1);
}

#[test]
fn fab_is_ultrametric_preserving() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.json", F_1_3);
    assert_eq!(
        umetric(&["classify-fn", "--fn", s(&f), "--require", "ultrametric-preserving"]).code,
        0
    );
    let r = umetric(&["classify-fn", "--fn", s(&f), "--require", "doubling"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let th = write(
        &dir,
        "th.json",
        r#"{"kind": "piecewise_affine", "pieces": [
      {"from": "0", "to": "1", "from_closed": true, "to_closed": true, "slope": "0", "intercept": "0"},
      {"from": "1", "to": null, "from_closed": false, "to_closed": false, "slope": "1", "intercept": "0"}]}"#,
    );
    let r = umetric(&["classify-fn", "--fn", s(&th), "--require", "semimetric-preserving"]);
    assert_eq!(r.code, 1);
    assert!(r.json()["result"]["witness"]["violated_axiom"].is_string());
}

#[test]
fn malformed_inputs_exit_2_with_positions() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.csv", "0,1\n1,x\n");
    let r = umetric(&["classify-space", "--input", s(&bad)]);
    assert_eq!(r.code, 2);
    let msg = r.json()["result"]["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("line 2") && msg.contains("column 3"), "{msg}");
    let bad = write(&dir, "bad.json", "{\"d\": [[0, 1],\n  [1, 0]");
    let r = umetric(&["classify-space", "--input", s(&bad)]);
    assert_eq!(r.code, 2);
    assert!(r.json()["result"]["error"]["message"].as_str().unwrap().contains("line 2"));
    assert_eq!(umetric(&["classify-space", "--input", "/nonexistent/file.csv"]).code, 2);
    let p = write(&dir, "ex.csv", ZERO_PAIR);
    assert_eq!(umetric(&["probe-fab", "--input", s(&p)]).code, 2, "precondition: not a metric");
    assert_eq!(umetric(&["probe-snowflake", "--input", s(&p), "--alpha", "1/0"]).code, 2);
}

#[test]
fn undecided_exit_code() {
    // (3, 4, 5) is a tie at alpha = 2; 2^-40 away needs more than 24 bits.
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "t.json", TRIANGLE_345);
    let alpha = "2199023255553/1099511627776";
    let r = umetric(&["--precision", "24", "probe-snowflake", "--input", s(&p), "--alpha", alpha]);
    assert_eq!(r.code, 3, "{}", r.stdout);
    assert_eq!(r.json()["result"]["verdict"]["verdict"], "undecided");
    let r = umetric(&["--precision", "128", "probe-snowflake", "--input", s(&p), "--alpha", alpha]);
    assert_eq!(r.code, 1, "{}", r.stdout);
}

#[test]
fn every_subcommand_replays() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "t.json", TRIANGLE_345);
    let z = write(&dir, "z.csv", ZERO_PAIR);
    let f = write(&dir, "f.json", F_1_3);
    let fam = write(
        &dir,
        "fam.json",
        r#"[{"kind": "power", "alpha": "1"}, {"kind": "power", "alpha": "2"}]"#,
    );
    let um = write(&dir, "u.json", r#"{"d": [["0", "1", "2"], ["1", "0", "2"], ["2", "2", "0"]]}"#);
    let runs: Vec<Vec<&str>> = vec![
        vec!["classify-space", "--input", s(&t)],
        vec!["classify-fn", "--fn", s(&f)],
        vec!["transform", "--input", s(&um), "--fn", s(&f)],
        vec!["dual-witness", "--input", s(&t)],
        vec!["probe-fab", "--input", s(&t)],
        vec!["probe-snowflake", "--input", s(&t), "--alpha", "5/2"],
        vec!["min-exponent", "--input", s(&t), "--tol", "1/1048576"],
        vec!["decompose", "--input", s(&z)],
        vec!["zero-gap", "--input", s(&um), "--fn", s(&f)],
        vec!["family-check", "--family", s(&fam), "--pairs", "1,3;3,4"],
        vec!["find-separator", "--family", s(&fam), "--t1", "1", "--t2", "2"],
        vec!["power-separator", "--t1", "1000", "--t2", "1001"],
        vec!["family-counterexample", "--family", s(&fam), "--t1", "3", "--t2", "4"],
        vec!["family-ultrametric", "--family", s(&fam), "--input", s(&um)],
    ];
    for (i, args) in runs.iter().enumerate() {
        let r = umetric(args);
        assert!(r.code == 0 || r.code == 1, "{args:?}: {}", r.stdout);
        let again = umetric(args);
        assert_eq!(r.stdout, again.stdout, "{args:?} is not deterministic");
        let rep = write(&dir, &format!("r{i}.json"), &r.stdout);
        let replay = umetric(&["replay", "--report", s(&rep)]);
        assert_eq!(replay.code, 0, "{args:?}: {}", replay.stdout);
    }
}

#[test]
fn replay_detects_tampering() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "t.json", TRIANGLE_345);
    let r = umetric(&["dual-witness", "--input", s(&t)]);
    assert_eq!(r.code, 1);
    let mut j = r.json();
    j["result"]["witness"]["indices"] = serde_json::json!([0, 1, 2]);
    let rep = write(&dir, "tampered.json", &j.to_string());
    assert_ne!(umetric(&["replay", "--report", s(&rep)]).code, 0);

    let rep = write(&dir, "ok.json", &r.stdout);
    std::fs::write(&t, TRIANGLE_345.replace("\"5\"", "\"6\"")).unwrap();
    assert_ne!(umetric(&["replay", "--report", s(&rep)]).code, 0, "input digest changed");
}

#[test]
fn gen_is_reproducible_and_loadable() {
    let dir = TempDir::new().unwrap();
    let args = ["gen", "--seed", "11", "--n", "7", "--class", "metric", "--embed-345"];
    let a = umetric(&args);
    assert_eq!(a.code, 0, "{}", a.stdout);
    assert_eq!(a.stdout, umetric(&args).stdout);
    let p = write(&dir, "g.json", &a.stdout);
    let r = umetric(&["classify-space", "--input", s(&p), "--require", "metric"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(umetric(&["probe-snowflake", "--input", s(&p), "--alpha", "3"]).code, 1);

    let f = umetric(&["gen", "--seed", "3", "--class", "non_doubling"]);
    assert_eq!(f.code, 0, "{}", f.stdout);
    let p = write(&dir, "f.json", &f.stdout);
    assert_eq!(
        umetric(&["classify-fn", "--fn", s(&p), "--require", "ultrametric-metric-preserving"]).code,
        1
    );
    assert_eq!(umetric(&["gen", "--seed", "1", "--class", "nonsense"]).code, 2);
}

#[test]
fn text_output() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "t.json", TRIANGLE_345);
    let r = umetric(&["--text", "dual-witness", "--input", s(&t)]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.starts_with("dual-witness:"), "{}", r.stdout);
}
