use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn qsective(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsective"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn classify_emits_versioned_report() {
    let out = qsective(&["classify", "--q", "3", "--a", "7,251,1757,12299"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["qsective_schema"], 1);
    assert_eq!(v["kind"], "classification_report");
    assert_eq!(v["report"]["verdict"], "intersective");
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        &["classify", "--q", "4", "--a", "2,3"][..],
        &["classify", "--q", "3", "--a", "1,2"],
        &["classify", "--q", "3", "--a", "-1"],
        &["classify", "--q", "3", "--a", "8"],
        &["classify", "--q", "3", "--a", "2,2"],
        &["residue", "--q", "3", "--a", "2", "--mod", "0"],
        &["witness", "--q", "3", "--a", "7,251,1757,12299"],
        &["generate", "q3", "--p1", "7", "--p2", "7"],
    ] {
        let out = qsective(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let v = json(&out);
        assert_eq!(v["kind"], "error", "{args:?}");
        assert_eq!(v["exit_code"], 2);
    }
}

#[test]
fn bound_refusals_exit_3() {
    for args in [
        &["oracle", "--q", "3", "--a", "2", "--bound", "2000000"][..],
        &["classify", "--q", "29", "--a", "2,3"],
        &[
            "witness",
            "--q",
            "3",
            "--a",
            "2,3",
            "--search-bound",
            "2000000",
        ],
    ] {
        let out = qsective(args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
        assert_eq!(json(&out)["exit_code"], 3);
    }
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(qsective(&["bogus"]).status.code(), Some(2));
    assert_eq!(qsective(&["classify", "--q", "3"]).status.code(), Some(2));
    let help = qsective(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("classify"));
}

#[test]
fn plus_signs_and_spaces_are_rejected() {
    for list in ["+2,3", "2, 3", "2,,3", "2,x"] {
        assert_eq!(
            qsective(&["classify", "--q", "3", "--a", list])
                .status
                .code(),
            Some(2),
            "{list}"
        );
    }
}

#[test]
fn negative_entries() {
    let out = qsective(&["classify", "--q", "3", "--a", "-2,-7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["entries"], serde_json::json!([-2, -7]));
    assert_eq!(v["report"]["verdict"], "not_intersective");
    let r = json(&qsective(&["radq", "--q", "3", "--n", "-54"]));
    assert_eq!(r["signed"], -2);
    assert_eq!(r["abs"], 2);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &[
            "classify",
            "--q",
            "3",
            "--a",
            "2,3,6,12,18",
            "--cross-check",
        ][..],
        &["witness", "--q", "3", "--a", "2,5,7"],
        &["mine", "--q", "3", "--bound", "200"],
        &["minlc", "--q", "3", "--k", "3"],
    ] {
        let a = qsective(args);
        let b = qsective(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn verify_flag_rechecks_output() {
    for args in [
        &[
            "--verify",
            "classify",
            "--q",
            "3",
            "--a",
            "7,2141,14987,104909",
        ][..],
        &["--verify", "witness", "--q", "3", "--a", "2,3,6,12"],
        &[
            "--verify", "oracle", "--q", "3", "--a", "7", "--bound", "1000",
        ],
        &[
            "--verify",
            "rootmod",
            "--q",
            "3",
            "--a",
            "7,251,1757,12299",
            "--m",
            "123456",
        ],
        &[
            "--verify", "hensel", "--q", "3", "--a", "251", "--p", "3", "--b", "5",
        ],
    ] {
        assert_eq!(qsective(args).status.code(), Some(0), "{args:?}");
    }
}

#[test]
fn verify_subcommand_reads_files_and_stdin() {
    let doc = qsective(&["witness", "--q", "3", "--a", "2,5,7"]).stdout;
    let path = std::env::temp_dir().join(format!("qsective-witness-{}.json", std::process::id()));
    std::fs::write(&path, &doc).unwrap();
    let out = qsective(&["verify", "--input", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["kind"], "verification");

    // A tampered certificate must be rejected.
    let forged = String::from_utf8(doc)
        .unwrap()
        .replace("\"modulus\":", "\"modulus\":1");
    let mut child = Command::new(env!("CARGO_BIN_EXE_qsective"))
        .args(["verify", "--input", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(forged.as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn hensel_from_qq_seed() {
    let v = json(&qsective(&[
        "hensel", "--q", "3", "--a", "251", "--p", "3", "--b", "5",
    ]));
    assert_eq!(v["seed_modulus"], 27);
    assert_eq!(v["modulus"], 243);
    let x = v["root"].as_u64().unwrap();
    assert_eq!(x.pow(3) % 243, 251 % 243);
}
