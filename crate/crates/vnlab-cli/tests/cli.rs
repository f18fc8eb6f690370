use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_vnlab"))
        .args(args)
        .env_remove("VNLAB_SEED")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn check_square_reports_commuting_mub_pair() {
    let (code, stdout, _) = run(&["check-square", "--s", "pauli:X", "--t", "pauli:Z", "--within", "full:2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["schema"], "vnlab/1");
    assert_eq!(v["manifest"]["command"], "check-square");
    assert_eq!(v["report"]["commuting"], true);
}

#[test]
fn measure_recovers_the_half_bit_fixture() {
    let (code, stdout, _) = run(&["measure", "--kind", "isq", "--s", "pauli:X", "--t", "pauli:Z", "--state", "up-y"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let bits = v["report"]["estimate"]["value_bits"].as_f64().unwrap();
    assert!((bits - 0.5).abs() < 1e-9, "got {bits}");
}

#[test]
fn invalid_inputs_exit_with_code_2() {
    let (code, _, stderr) = run(&["cmi", "--s", "nosuch:9", "--t", "pauli:Z", "--within", "full:2", "--state", "up-y"]);
    assert_eq!(code, 2, "stderr: {stderr}");
    let (code, _, _) = run(&["scan", "--suite", "bogus"]);
    assert_eq!(code, 2);
}

#[test]
fn failed_margin_exits_with_code_1() {
    // maximally mixed qubit saturates the coherence relation with zero
    // slack, so any strictly positive required margin fails
    let (code, _, _) = run(&[
        "--tolerance=-1.0",
        "ucr", "--relation", "coherence", "--d", "2", "--state", "mixed:2",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn identical_seeds_give_byte_identical_reports() {
    let args = ["cmi", "--s", "pauli:X", "--t", "pauli:Z", "--within", "full:2", "--state", "random:2", "--seed", "7"];
    let (c1, out1, _) = run(&args);
    let (c2, out2, _) = run(&args);
    assert_eq!(c1, 0);
    assert_eq!(c2, 0);
    assert_eq!(out1, out2);
}

#[test]
fn scan_emits_ndjson_records_and_passes() {
    let dir = std::env::temp_dir().join(format!("vnlab-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ssa.ndjson");
    let (code, stdout, _) = run(&[
        "scan", "--suite", "ssa", "--dims", "2,3", "--samples", "10",
        "--seed", "5", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let summary: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(summary["report"]["failures"], 0);
    let body = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines.len(), 10); // --samples is the total instance count
    for line in lines {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(rec["schema"], "vnlab/1");
        assert_eq!(rec["pass"], true);
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn demo_prints_stage_lines_and_succeeds() {
    let (code, stdout, stderr) = run(&["demo", "--name", "epr-ucr"]);
    assert_eq!(code, 0);
    assert!(stderr.contains("PASS"));
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["report"]["all_pass"], true);
}
