use std::process::{Command, Output};

use toricdec::cli::Report;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toricdec")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap().trim_end().to_string()
}

#[test]
fn print_and_classify() {
    let o = run(&["print", r#"morphic(tau={0:"01",1:"0"}, start=0)"#, "-n", "11"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "01001010010");
    let o = run(&["classify", "fibonacci_sturmian", "11"]);
    assert!(stdout(&o).starts_with("transient"), "{}", stdout(&o));
    let o = run(&["classify", "fibonacci_sturmian", "010"]);
    assert!(stdout(&o).starts_with("recurrent"));
}

#[test]
fn accept_reports_are_deterministic_json() {
    let args = ["accept", "fibonacci_sturmian", "no-11", "--pipeline", "semenov"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r = Report::from_json(&stdout(&a)).unwrap();
    assert!(r.accepted());
    assert_eq!(r.certificates.len(), 3);
    let p = Report::from_json(&stdout(&run(&["accept", "fibonacci", "no-11"]))).unwrap();
    assert_eq!((p.verdict.as_str(), &p.inf_set), (r.verdict.as_str(), &r.inf_set));
}

#[test]
fn automaton_files_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let hoa = dir.path().join("inf_b.hoa");
    std::fs::write(
        &hoa,
        "HOA: v1\nStates: 2\nStart: 0\nAP: 1 \"p\"\nacc-name: Buchi\nAcceptance: 1 Inf(0)\n\
         properties: deterministic complete\n--BODY--\nState: 0\n[!0] 0\n[0] 1\nState: 1 {0}\n[!0] 0\n[0] 1\n--END--\n",
    )
    .unwrap();
    // HOA letters are valuations of the atomic propositions
    let r = Report::from_json(&stdout(&run(&["accept", r#"periodic("001")"#, hoa.to_str().unwrap()]))).unwrap();
    assert!(r.accepted());
    let native = dir.path().join("fin.aut");
    std::fs::write(&native, "states 2\nalphabet 0 1\ninitial 0\ntrans 0 0 0\ntrans 0 1 1\ntrans 1 0 0\ntrans 1 1 1\nmuller {0}\n").unwrap();
    let r = Report::from_json(&stdout(&run(&["accept", "fibonacci", native.to_str().unwrap()]))).unwrap();
    assert!(!r.accepted());
}

#[test]
fn word_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("w.txt");
    std::fs::write(&f, "# squares\ncoding(carton_thomas,\n  {a: \"1\", b: \"1\", c: \"0\"})\n").unwrap();
    let o = run(&["print", &format!("@{}", f.display()), "-n", "10"]);
    assert_eq!(stdout(&o), "1100100001");
}

#[test]
fn closure_crosscheck_gaps() {
    assert_eq!(stdout(&run(&["closure", "1/3", "1/6"])), "L=6, rank=0, points=6");
    assert_eq!(stdout(&run(&["closure", "1/2", "golden"])), "L=2, rank=1, points=2");
    let o = run(&["crosscheck", "fibonacci", "inf-ones", "--horizon", "20000"]);
    assert!(stdout(&o).ends_with("AGREE"), "{}", stdout(&o));
    let o = run(&["gaps", "10"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("has no (+,-)"));
}

#[test]
fn fixtures_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(run(&["fixtures", d, "--write"]).status.success());
    assert!(run(&["fixtures", d]).status.success());
    std::fs::write(dir.path().join("prefixes/salomaa.txt"), "ab\n").unwrap();
    assert_eq!(run(&["fixtures", d]).status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["print", "periodic(\"01\""]), Some(1));
    assert_eq!(code(&["print", "nonsense_word"]), Some(1));
    assert_eq!(code(&["accept", "fibonacci", "/nonexistent/automaton"]), Some(1));
    assert_eq!(code(&["accept", "product(sign_static(), sign_drift())", "inf-ones", "--pipeline", "semenov"]), Some(1));
    assert_eq!(code(&["closure", "golden", "golden_sq"]), Some(1));
    assert_eq!(code(&["--step-budget", "3", "accept", "fibonacci", "no-11", "--pipeline", "profinite"]), Some(2));
    assert_eq!(code(&["--precision-budget", "8", "gaps", "5"]), Some(2));
    let e = run(&["print", "sturmian(theta=pi, xi=0)"]);
    assert!(String::from_utf8_lossy(&e.stderr).contains("1:16"));
}
