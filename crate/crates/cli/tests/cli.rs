use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistorkit"))
        .args(args)
        .env_remove("TWISTORKIT_BACKEND")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn split_diag() {
    let out = run(&["split", "--bundle", path_str(&data("diag_z_z.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["splitting"], serde_json::json!([1, 1]));
    assert_eq!(v["schema"], "twistorkit/1");
}

#[test]
fn cohomology_o_minus_one() {
    let out = run(&["cohomology", "--bundle", path_str(&data("o_minus1.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!((v["h0"].as_u64(), v["h1"].as_u64()), (Some(0), Some(0)));
    let twisted = stdout_json(&run(&["cohomology", "--bundle", path_str(&data("diag_z_z.json")), "--twist", "-3"]));
    assert_eq!((twisted["h0"].as_u64(), twisted["h1"].as_u64()), (Some(0), Some(2)));
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(run(&["split", "--nope"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["split", "--bundle", "/no/such/file.json"]).status.code(), Some(2));
}

#[test]
fn float_backend_rejected_for_split() {
    let out = run(&["--backend", "float", "split", "--bundle", path_str(&data("diag_z_z.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let env = Command::new(env!("CARGO_BIN_EXE_twistorkit"))
        .args(["cohomology", "--bundle", path_str(&data("o_minus1.json"))])
        .env("TWISTORKIT_BACKEND", "float")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(2));
}

#[test]
fn quat_check_and_real_section() {
    let ok = run(&["quat-check", "--matrix", path_str(&data("a_flat.json"))]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout_json(&ok)["quaternionic"], true);
    let bad = run(&["quat-check", "--matrix", path_str(&data("a_not_quaternionic.json"))]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(stdout_json(&bad)["quaternionic"], false);
    let rs = run(&[
        "real-section",
        "--matrix",
        path_str(&data("a_flat.json")),
        "--section",
        path_str(&data("real_section.json")),
    ]);
    assert_eq!(rs.status.code(), Some(0));
    let v = stdout_json(&rs);
    assert_eq!(v["real"], true);
    assert_eq!(v["r_of_s"]["b"][0]["re"], "-1/1");
}

#[test]
fn twistor_build_then_verify_and_metric() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.json");
    let build = run(&["twistor", "build", "--n", "1", "--out", path_str(&flat)]);
    assert_eq!(build.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&flat).unwrap()).unwrap();
    for key in ["A", "Omega_raw", "frames", "matrices"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    let verify = run(&["verify", "--data", path_str(&flat), "--samples", "20", "--seed", "7"]);
    assert_eq!(verify.status.code(), Some(0));
    assert_eq!(stdout_json(&verify)["report"]["passed"], true);
    let metric = run(&["metric", "--data", path_str(&flat), "--a", "1,i", "--b", "1,0"]);
    assert_eq!(metric.status.code(), Some(0));
    // g(a, b) = 2·Re⟨a, b⟩ = 2
    assert_eq!(stdout_json(&metric)["g"]["re"], "2/1");
    let fverify = run(&["--backend", "float", "verify", "--data", path_str(&flat), "--samples", "20"]);
    assert_eq!(fverify.status.code(), Some(0));
}

#[test]
fn twistor_check_passes() {
    for backend in ["exact", "float"] {
        let out = run(&["--backend", backend, "twistor", "check", "--n", "1", "--samples", "10"]);
        assert_eq!(out.status.code(), Some(0), "{backend}");
        assert_eq!(stdout_json(&out)["passed"], true);
    }
}

#[test]
fn deform_scan_jump_family() {
    let out = run(&[
        "deform",
        "scan",
        "--family",
        path_str(&data("jump_family.json")),
        "--special",
        "0",
        "--samples",
        "1,i,0.5",
        "--twist",
        "-1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["special"]["h0"], 1);
    assert!(v["samples"].as_array().unwrap().iter().all(|r| r["h0"] == 0));
    assert_eq!(v["semicontinuous"], true);
}

#[test]
fn roundtrip_exact() {
    let out = run(&["roundtrip", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["metric_gram_is_2re"], true);
    let gram = &v["metric_gram"];
    assert_eq!(gram["rank"], 4);
    for (idx, entry) in gram["entries"].as_array().unwrap().iter().enumerate() {
        let expected = if idx % 5 == 0 { "2/1" } else { "0/1" };
        let got = entry.as_array().unwrap().first().map(|t| t["re"].as_str().unwrap()).unwrap_or("0/1");
        assert_eq!(got, expected, "entry {idx}");
    }
    assert_eq!(run(&["roundtrip", "--n", "2", "--samples", "10"]).status.code(), Some(0));
}

#[test]
fn roundtrip_rejects_corrupted_omega() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.json");
    assert_eq!(run(&["twistor", "build", "--n", "1", "--out", path_str(&flat)]).status.code(), Some(0));
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&flat).unwrap()).unwrap();
    // multiply the stored Ω by the unit (3 + 4i)/5
    for entry in doc["Omega"]["entries"].as_array_mut().unwrap() {
        for term in entry.as_array_mut().unwrap() {
            let re = term["re"].as_str().unwrap().to_string();
            let im = term["im"].as_str().unwrap().to_string();
            let parse = |s: &str| -> i64 { s.split('/').next().unwrap().parse().unwrap() };
            assert!(re.ends_with("/1") && im.ends_with("/1"));
            let (a, b) = (parse(&re), parse(&im));
            term["re"] = Value::String(format!("{}/5", 3 * a - 4 * b));
            term["im"] = Value::String(format!("{}/5", 4 * a + 3 * b));
        }
    }
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(&["roundtrip", "--data", path_str(&bad)]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NotReal"));
    assert!(stdout_json(&out)["failures"].as_array().unwrap().iter().any(|f| f == "NotReal"));
}

#[test]
fn output_is_deterministic() {
    for args in [vec!["roundtrip", "--n", "1", "--seed", "3"], vec!["twistor", "check", "--n", "1", "--seed", "9"]] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout);
        assert!(!a.stdout.is_empty());
    }
    let flat = data("flat_n1.json");
    let f = ["--backend", "float", "verify", "--data", path_str(&flat), "--seed", "5"];
    assert_eq!(run(&f).stdout, run(&f).stdout);
}

#[test]
fn schema_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let cases = [
        write("nojson.json", "this is not json"),
        write("noschema.json", r#"{"transition":{"rank":1,"entries":[[]]}}"#),
        write("wrongschema.json", r#"{"schema":"twistorkit/0","transition":{"rank":1,"entries":[[]]}}"#),
        write("mixed.json", r#"{"schema":"twistorkit/1","transition":{"rank":1,"entries":[[{"pow":1,"re":"1/1","im":0}]]}}"#),
        write("rank.json", r#"{"schema":"twistorkit/1","transition":{"rank":2,"entries":[[]]}}"#),
        write("float.json", r#"{"schema":"twistorkit/1","transition":{"rank":1,"entries":[[{"pow":1,"re":1.0,"im":0.0}]]}}"#),
    ];
    for p in &cases {
        assert_eq!(run(&["split", "--bundle", path_str(p)]).status.code(), Some(3), "{}", p.display());
    }
}

fn valid_bundle_text() -> String {
    std::fs::read_to_string(data("diag_z_z.json")).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn truncated_input_exits_3(cut in 0usize..200) {
        let text = valid_bundle_text();
        let cut = cut % text.trim_end().len();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        std::fs::write(&p, &text[..cut]).unwrap();
        prop_assert_eq!(run(&["split", "--bundle", path_str(&p)]).status.code(), Some(3));
    }

    #[test]
    fn mangled_literals_exit_3(which in 0usize..4, junk in "[a-z#@]{1,6}") {
        let mut doc: Value = serde_json::from_str(&valid_bundle_text()).unwrap();
        let entries = doc["transition"]["entries"].as_array_mut().unwrap();
        let nonempty: Vec<usize> = (0..entries.len()).filter(|&k| !entries[k].as_array().unwrap().is_empty()).collect();
        let k = nonempty[which % nonempty.len()];
        let field = if which % 2 == 0 { "re" } else { "pow" };
        entries[k][0][field] = Value::String(junk);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        std::fs::write(&p, serde_json::to_string(&doc).unwrap()).unwrap();
        prop_assert_eq!(run(&["split", "--bundle", path_str(&p)]).status.code(), Some(3));
    }

    #[test]
    fn dropped_fields_exit_3(key in prop::sample::select(vec!["schema", "transition"])) {
        let mut doc: Value = serde_json::from_str(&valid_bundle_text()).unwrap();
        doc.as_object_mut().unwrap().remove(key);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.json");
        std::fs::write(&p, serde_json::to_string(&doc).unwrap()).unwrap();
        prop_assert_eq!(run(&["split", "--bundle", path_str(&p)]).status.code(), Some(3));
    }
}
