use std::process::Command;

fn bwqa() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bwqa"))
}

#[test]
fn eval_on_bundled_data_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = bwqa().args(["eval", "--report"]).arg(&report).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Parse rate"), "{text}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert!(json["spatial"].as_u64().unwrap() >= 120);
}

#[test]
fn eval_reports_bad_lines_and_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.tsv");
    std::fs::write(&corpus, "What is the highest block?\tidentification\tThe Toyota block.\nno tabs here\n").unwrap();
    let out = bwqa().args(["eval", "--corpus"]).arg(&corpus).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("line 2"), "{text}");

    std::fs::write(&corpus, "").unwrap();
    let out = bwqa().args(["eval", "--corpus"]).arg(&corpus).output().unwrap();
    assert!(out.status.success());
}

#[test]
fn repl_answers_from_stdin() {
    use std::io::Write;
    let mut child = bwqa()
        .arg("repl")
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"What is the highest block?\n:move Toyota -0.15 -0.1\nWhere is the Toyota block?\n:quit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("The Toyota block."), "{text}");
    assert!(text.contains("moved"), "{text}");
    assert!(text.contains("The Toyota block is on the table."), "{text}");
}

#[test]
fn missing_files_fail_cleanly() {
    let out = bwqa().args(["eval", "--scene", "/nonexistent/scene.json"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/scene.json"));
}
