use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn path(rel: &str) -> String {
    root().join(rel).display().to_string()
}

fn lgs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgs")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn validate_reference_file() {
    let o = lgs(&["validate", &path("examples/full2.lgs")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "ok\n");
}

#[test]
fn corrupted_file_reports_its_rule() {
    let text = std::fs::read_to_string(root().join("examples/golden.lgs")).unwrap();
    let bad = text.replace("iota 0 2 2\n", "iota 0 2 1\n");
    assert_ne!(bad, text);
    let dir = std::env::temp_dir().join(format!("lgs-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("bad-iota.lgs");
    std::fs::write(&f, bad).unwrap();
    let o = lgs(&["validate", f.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.starts_with("iota-surjectivity at l=0 v(0,2)"), "{out}");
    assert!(out.contains("local-property"), "{out}");
}

#[test]
fn even_shift_has_seven_words_of_length_three() {
    let o = lgs(&["words", &path("examples/even.lgs"), "-k", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn records_format_tags_each_line() {
    let o = lgs(&["--format", "records", "words", &path("examples/full2.lgs"), "-k", "2"]);
    assert_eq!(stdout(&o), "word\taa\nword\tab\nword\tba\nword\tbb\n");
}

#[test]
fn partition_of_unity_reduces_to_zero() {
    let o = lgs(&["algebra", &path("examples/full2.lgs"), "-e", "S(a) S(a)^* + S(b) S(b)^* - 1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "0\n");
}

#[test]
fn expression_errors_carry_a_column() {
    let o = lgs(&["algebra", &path("examples/full2.lgs"), "-e", "S(a) + E(1,3)"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("<expr>:1:8:"));
}

#[test]
fn parse_errors_carry_file_line_col() {
    let dir = std::env::temp_dir().join(format!("lgs-cli-parse-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("bad.lgs");
    std::fs::write(&f, "lgs x\nalphabet a\ndepth 1\nvertices 1 1\nedgee 1\n").unwrap();
    let o = lgs(&["validate", f.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.starts_with(&format!("{}:5:1:", f.display())), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&lgs(&["bogus"])), 2);
    assert_eq!(code(&lgs(&["words", &path("examples/full2.lgs"), "--nope"])), 2);
}

#[test]
fn sms_dump_round_trips() {
    let first = lgs(&["sms-dump", &path("examples/golden.lgs")]);
    assert_eq!(code(&first), 0);
    let dir = std::env::temp_dir().join(format!("lgs-cli-sms-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("golden.sms");
    std::fs::write(&f, &first.stdout).unwrap();
    let second = lgs(&["sms-dump", f.to_str().unwrap()]);
    assert_eq!(stdout(&first), stdout(&second));
    let check = lgs(&["sms-check", f.to_str().unwrap()]);
    assert_eq!(code(&check), 0);
}

#[test]
fn stalled_certificate_fails_coe() {
    let d = "crates/lgs/data";
    let o = lgs(&[
        "--format",
        "records",
        "coe-check",
        &path(&format!("{d}/full2.graph")),
        &path(&format!("{d}/full2.graph")),
        &path(&format!("{d}/full2-stalled.cert")),
        "-d",
        "3",
    ]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("clause\torbit-1\tFAIL"), "{out}");
    assert!(out.contains("witness\torbit-1\tab\n"), "{out}");
    assert!(out.ends_with("verdict\tFAIL\n"));
}

#[test]
fn shallow_graph_hits_the_depth_budget() {
    let d = "crates/lgs/data";
    let o = lgs(&[
        "--graph-depth",
        "3",
        "coe-check",
        &path(&format!("{d}/full2.graph")),
        &path(&format!("{d}/full2.graph")),
        &path(&format!("{d}/full2-identity.cert")),
        "-d",
        "3",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn shifted_marked_code_still_conjugates() {
    let d = "crates/lgs/data";
    let args = |shift: &'static str| {
        lgs(&[
            "conj-check",
            &path(&format!("{d}/full3.graph")),
            &path(&format!("{d}/marked3.graph")),
            &path(&format!("{d}/full3-marked.cert")),
            "-d",
            "4",
            "--shift",
            shift,
        ])
    };
    for shift in ["0", "1", "2"] {
        let o = args(shift);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        assert!(stdout(&o).contains("transitive: true"));
    }
    let one = stdout(&args("1"));
    assert!(one.contains("inj-window: 2"), "{one}");
}

#[test]
fn golden_stable_iso_passes() {
    let d = "crates/lgs/data";
    let o = lgs(&[
        "stable-iso",
        &path(&format!("{d}/golden.graph")),
        &path(&format!("{d}/golden2.graph")),
        &path(&format!("{d}/golden-golden2.cert")),
        "--samples",
        "100",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).ends_with("PASS\n"));
}

#[test]
fn groupoid_compose_reports_the_cocycle() {
    let o = lgs(&["groupoid-compose", &path("examples/full2.lgs"), "a,v(1,1),b", "b,v(1,1),a"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "a,v(1,1),a cocycle 0\n");
}
