use std::process::Command;

fn seqdiag(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_seqdiag"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn fixtures_verify_reports_all_checks() {
    let (code, out, _) = seqdiag(&["fixtures", "--verify"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("29 canonical q-partitions"));
    assert!(out.contains("0 failed"));
}

#[test]
fn simulated_circuit_session_takes_one_query() {
    let (code, out, err) = seqdiag(&[
        "session",
        "fixtures/circuit.net",
        "--enhance",
        "--simulate",
        "--reference",
        "fixtures/circuit_reference.txt",
    ]);
    assert_eq!(code, 0, "{err}");
    let t: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(t.as_array().unwrap().len(), 1);
    assert_eq!(t[0]["query"][0], "!outX1");
    assert!(err.contains("{X1}"));
}

#[test]
fn simulated_target_session() {
    let (code, _, err) = seqdiag(&["session", "fixtures/exk.dpi", "--simulate", "--target", "1,4,7"]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("{a1,a4,a7}"));
}

#[test]
fn unknown_flag_exits_with_usage_error() {
    let (code, _, _) = seqdiag(&["diagnose", "fixtures/exk.dpi", "--bogus"]);
    assert_eq!(code, 2);
}

#[test]
fn reduce_emits_a_parseable_dpi() {
    let (code, out, _) = seqdiag(&["reduce", "fixtures/circuit.net"]);
    assert_eq!(code, 0);
    let dpi = seqdiag::parse_dpi(&out).unwrap();
    assert_eq!(dpi.kb().len(), 5);
    assert!(out.contains("# 1 = X1"));
}

#[test]
fn diagnose_and_query() {
    let (code, out, _) = seqdiag(&["diagnose", "fixtures/exk.dpi", "-n", "6"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 6);
    let (code, out, _) = seqdiag(&["query", "fixtures/circuit.net", "--qcm", "sum"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("outX2 <->"));
    let (code, out, _) = seqdiag(&["qpartition", "fixtures/exk.dpi", "--brute-force"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("29 canonical q-partitions"));
}

#[test]
fn invalid_input_fails_cleanly() {
    let (code, _, err) = seqdiag(&["diagnose", "Cargo.toml"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
}
