use std::io::Write;
use std::process::{Command, Output, Stdio};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stdsets")).args(args).env_remove("LCT_DEFAULT_CAP").output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn stdout(args: &[&str]) -> String {
    String::from_utf8(run(args).stdout).unwrap()
}

fn stderr(args: &[&str]) -> String {
    String::from_utf8(run(args).stderr).unwrap()
}

const DEGENERATE: &str = "fam(0; 1/n[1]*m[1] - 1/n[1]*p[1])";
const MALFORMED: &str = "fam(5/6; 1/m[1 n[1])";

#[test]
fn enum_contract() {
    let args = ["enum", "ht1()", "--interval", "1/5..1", "--cap", "100", "--format", "csv"];
    assert_eq!(code(&args), 0);
    assert_eq!(stdout(&args), "1/5\n1/4\n1/3\n1/2\n1\n");
    assert_eq!(stdout(&args), stdout(&args));
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&["enum", "g16()", "--interval", "0..1", "--cap", "3", "--format", "json"]))
            .unwrap();
    assert!(json.is_object());
    assert_eq!(code(&["enum", "ht1()", "--interval", "-2..2", "--cap", "5"]), 0);
    assert_eq!(code(&["enum", "ht2()", "--interval", "1/5..1", "--cap", "5"]), 0);
    assert_eq!(code(&["enum", MALFORMED, "--interval", "0..1"]), 3);
    assert_eq!(code(&["enum", "ht1()", "--interval", "1..0"]), 3);
    assert_eq!(code(&["enum", "ht1()", "--interval", "a..b"]), 3);
    assert_eq!(code(&["enum", "ht1()", "--interval", "0..1", "--cap", "0"]), 3);
    assert_eq!(code(&["enum", "ht1()"]), 3);
    let out = Command::new(env!("CARGO_BIN_EXE_stdsets"))
        .args(["enum", "ht1()", "--interval", "1/5..1", "--format", "csv"])
        .env("LCT_DEFAULT_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1/2\n1\n");
}

#[test]
fn malformed_input_is_located() {
    let err = stderr(&["enum", MALFORMED, "--interval", "0..1"]);
    assert!(err.contains("E001"), "{err}");
    assert!(err.contains("1:"), "{err}");
    assert!(stdout(&["enum", MALFORMED, "--interval", "0..1"]).is_empty());
    assert_eq!(code(&["certify", "union({1}, B)"]), 3);
    assert_eq!(code(&["certify", "translate({1})"]), 3);
    assert_eq!(code(&["certify", "ct3(1, 1)"]), 3);
}

#[test]
fn derived_contract() {
    assert_eq!(code(&["derived", "fam(0; 1/n[1] + 1/m[1])", "-k", "2"]), 0);
    assert_eq!(stdout(&["derived", "fam(0; 1/n[1] + 1/m[1])", "-k", "2"]).trim(), "{0}");
    assert_eq!(code(&["derived", DEGENERATE]), 2);
    assert_eq!(code(&["derived", "ht1()", "-k", "x"]), 3);
    assert_eq!(code(&["derived", "ht1()", "--format", "csv"]), 3);
    assert_eq!(code(&["derived", "ht2()"]), 3);
}

#[test]
fn check_contract() {
    assert_eq!(code(&["check", "g16()", "--near", "5/6"]), 0);
    let args = ["check", "fam(0; 1/n[1] + 1/m[1])", "--near", "0"];
    assert_eq!(code(&args), 1);
    assert!(stdout(&args).contains("∂²"));
    assert_eq!(code(&["check", DEGENERATE, "--near", "0"]), 2);
    assert_eq!(code(&["check", "ht1()", "--near", "-1/3"]), 0);
    assert_eq!(code(&["check", "ht1()", "--near", "1/0"]), 3);
    assert_eq!(code(&["check", "ht1()"]), 3);
}

#[test]
fn certify_contract() {
    let args = ["certify", "g16()", "--format", "json"];
    assert_eq!(code(&args), 0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&args)).unwrap();
    assert_eq!(json["verdict"], "standardized");
    assert_eq!(json["depth"], 2);
    assert_eq!(code(&["certify", DEGENERATE]), 2);
    assert_eq!(code(&["certify", "ht1()", "--format", "csv"]), 3);
    assert_eq!(code(&["certify", MALFORMED]), 3);
}

#[test]
fn fit_contract() {
    assert_eq!(code(&["fit", "ht1()", "--near", "0", "--interval", "-1..1", "--cap", "200"]), 0);
    assert_eq!(
        code(&["fit", "fam(0; 3/n[1])", "--near", "0", "--interval", "-1..1", "--cap", "50", "--bound", "1"]),
        1
    );
    assert_eq!(code(&["fit", "{1}", "--near", "0", "--interval", "-1..1"]), 2);
    assert_eq!(code(&["fit", "ht1()", "--near", "0", "--interval", "-1..1", "--bound", "0"]), 3);
    assert_eq!(code(&["fit", "ht1()", "--near", "0"]), 3);
}

#[test]
fn clusters_contract() {
    let args = ["clusters", "ht1()", "--interval", "0..1", "--cap", "300"];
    assert_eq!(code(&args), 0);
    assert!(stdout(&args).starts_with("# 1 clusters"));
    assert_eq!(code(&["clusters", "ht1()", "--interval", "0..1", "--threshold", "1"]), 3);
    assert_eq!(code(&["clusters", "ht1()", "--interval", "0..1", "--resolution", "-1"]), 3);
}

#[test]
fn verify_contract() {
    let args = ["verify-paper", "--case", "ex16"];
    assert_eq!(code(&args), 0);
    assert!(stdout(&args).contains("ex16   PASS"));
    assert_eq!(code(&["verify-paper", "--case", "nope"]), 3);
}

#[test]
fn program_sources() {
    let dir = std::env::temp_dir().join(format!("stdsets-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("g.fam");
    std::fs::write(&path, "set G = union(g16(), {12/13})\nG\n").unwrap();
    let at = format!("@{}", path.display());
    assert_eq!(code(&["certify", &at]), 0);
    assert_eq!(code(&["certify", "@/nonexistent/file.fam"]), 3);
    let mut child = Command::new(env!("CARGO_BIN_EXE_stdsets"))
        .args(["enum", "-", "--interval", "0..1", "--format", "csv"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"{1/2, 1}").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1/2\n1\n");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors() {
    assert_eq!(code(&[]), 3);
    assert_eq!(code(&["nosuch"]), 3);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
}
