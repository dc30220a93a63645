use std::process::Command;

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_workbench")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn json(args: &[&str]) -> (i32, serde_json::Value) {
    let (code, s) = run(args);
    (code, serde_json::from_str(&s).expect("json report"))
}

#[test]
fn hopf_table_p3() {
    let (code, v) = json(&["hopf-table", "--p", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["data"]["atypical"]["closed_form"].as_array().unwrap().len(), 3);
    assert_eq!(v["data"]["atypical"]["closed_form"], v["data"]["atypical"]["first_principles"]);
}

#[test]
fn hopf_table_backends() {
    let (code, v) = json(&["hopf-table", "--p", "2", "--even", "--backend", "both"]);
    assert_eq!(code, 0);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["check"].as_str().unwrap()).collect();
    assert!(names.contains(&"even-p table p=2"));
    assert!(names.contains(&"typical float backend p=2"));
}

#[test]
fn deterministic_output() {
    let a = run(&["lift-check", "--p", "3", "--seed", "11"]);
    let b = run(&["lift-check", "--p", "3", "--seed", "11"]);
    assert_eq!(a, b);
    assert_eq!(a.0, 0);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["verlinde", "--p", "3"]).0, 0);
    assert_eq!(run(&["qh-char", "--p", "3", "--order", "10"]).0, 0);
    assert_eq!(run(&["fusion", "--p", "2", "--table", "intro"]).0, 0);
    assert_eq!(run(&["gring", "--p", "5"]).0, 0);
    // the listed p=3 scalars include values the braiding does not produce
    assert_eq!(run(&["fusion", "--p", "3"]).0, 1);
    assert_eq!(run(&["hopf-table", "--p", "1"]).0, 2);
    assert_eq!(run(&["gring", "--p", "3", "--even"]).0, 2);
}

#[test]
fn series_dump_format() {
    let (code, s) = run(&["series-dump", "--p", "3", "--order", "2"]);
    assert_eq!(code, 0);
    let mut lines = s.lines();
    assert!(lines.next().unwrap().starts_with("# phase"));
    assert_eq!(lines.next(), Some("q^{0} x^{0} : 1"));
    assert!(lines.all(|l| l.starts_with("q^{") && l.contains(" : ")));
}
