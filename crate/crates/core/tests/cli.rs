use std::io::Write as _;
use std::path::PathBuf;
use std::process::{Command, Output};

use hopi::equiv::{check_normal, Mode};
use hopi::parse::parse_term;
use hopi::semantics::{normalize, ExploreBudget};
use hopi::syntax::{CalcId, Term};

fn hopi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopi"))
        .args(args)
        .env_remove("HOPI_BUDGET_STATES")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const GOLDEN: &[(&str, &[&str])] = &[
    ("parse-abstraction", &["parse", "--calc", "piD1", "\\(X). a!<X>.0"]),
    ("parse-normalizes", &["parse", "new c. (c! | c. a!) | 0 | a(X). X<\\(Y). b!>"]),
    ("parse-elaborated-tau", &["parse", "--elaborate", "tau. a!"]),
    ("trace-w", &["trace", "--calc", "pid1", "(\\(x). x!)<d>"]),
    ("trace-nil", &["trace", "0"]),
    ("trace-replication", &["trace", "-n", "2", "--max-depth", "3", "!a!<\\(Z). 0>.0"]),
    ("lts-dot", &["lts", "--format", "dot", "d!<\\(Y). 0>.0"]),
    ("check-distinguished", &["check", "a!", "b!"]),
    ("factorize-intro", &["factorize", "X<\\(Y). 0> | b(W). W<\\(Z). 0>", "\\(Y). a!<\\(Z). b!>.0"]),
    ("replicate", &["replicate", "!a!<\\(Z). 0>.0"]),
    ("claims-list", &["claims", "--list"]),
];

#[test]
fn golden_outputs() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for (name, args) in GOLDEN {
        let out = stdout(&hopi(args));
        let path = dir.join(format!("{name}.out"));
        if update {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &out).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
        assert_eq!(out, want, "golden {name}");
        assert_eq!(stdout(&hopi(args)), out, "{name} is not deterministic");
    }
}

#[test]
fn parse_reports_errors_with_exit_one() {
    let o = hopi(&["parse", "a!<"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("parse error"));
    let o = hopi(&["parse", "a(X). X<0>"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sort"));
}

#[test]
fn parse_json_is_the_ast() {
    let src = "a(X). (X<\\(Y). b!> | new c. c!<\\(Z). Z<\\(W). 0>>.0)";
    let o = hopi(&["parse", "--format", "json", src]);
    assert_eq!(o.status.code(), Some(0));
    let t: Term = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(t, normalize(&parse_term(src, CalcId::PiD(1)).unwrap()));
}

#[test]
fn lts_json_and_truncation() {
    let o = hopi(&["lts", "--format", "json", "a!. b!"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["states"].as_array().unwrap().len(), 3);
    assert_eq!(v["edges"].as_array().unwrap().len(), 2);
    assert_eq!(v["root"], 0);
    assert_eq!(v["truncated"], false);
    let o = hopi(&["lts", "--format", "json", "--max-states", "1", "a!. b!"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["truncated"], true);
}

#[test]
fn check_exit_codes() {
    assert_eq!(hopi(&["check", "a!. b!", "a!. tau. b!"]).status.code(), Some(0));
    let o = hopi(&["check", "--format", "json", "a!<\\(Y). b!>.0", "a!<\\(Y). 0>.0"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "distinguished");
    assert!(!v["witness"]["steps"].as_array().unwrap().is_empty());
    assert_eq!(hopi(&["check", "--relation", "context", "a!", "b!"]).status.code(), Some(2));
    assert_eq!(hopi(&["check", "--max-states", "1", "a!. b!", "a!. tau. b!"]).status.code(), Some(3));
    assert_eq!(hopi(&["check", "a!", "\\(X). 0"]).status.code(), Some(1));
}

#[test]
fn budget_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_hopi"))
        .args(["check", "a!. b!", "a!. tau. b!"])
        .env("HOPI_BUDGET_STATES", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn abstractions_are_compared_through_instances() {
    let o = hopi(&["check", "\\(X). (X<\\(Y). 0> | 0)", "\\(X). X<\\(Y). 0>"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn factorize_without_hole_keeps_behaviour() {
    let o = hopi(&["factorize", "b!", "\\(Y). a!"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let f = parse_term(out.trim(), CalcId::PiD(1)).unwrap();
    let b = parse_term("b!", CalcId::PiD(1)).unwrap();
    assert!(check_normal(&b, &f, Mode::Weak, &ExploreBudget::default()).unwrap().is_bisimilar());
}

#[test]
fn factorize_refuses_name_abstractions() {
    let o = hopi(&["factorize", "--calc", "pid1", "X", "\\(y). 0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("name-passing is not allowed"));
}

#[test]
fn definitions_file() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "def T [piD1] = \\(Z). m!<Z>.0;\ndef P [piD1] = a!<T>.0;").unwrap();
    let path = f.path().to_str().unwrap();
    let o = hopi(&["parse", "--defs", path, "P | b!"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("m!<"));
    assert_eq!(hopi(&["parse", "--defs", "/nonexistent/defs", "0"]).status.code(), Some(1));
}

#[test]
fn stdin_input() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hopi"))
        .args(["parse", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"a! | 0\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(stdout(&o), "a!<\\(X). 0>.0\n");
}

#[test]
fn claims_report() {
    let o = hopi(&["claims", "--json", "server-law"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let claims = v["claims"].as_array().unwrap();
    assert_eq!(claims.len(), 4);
    for c in claims {
        assert_eq!(c["pass"], true);
        assert!(c["id"].as_str().unwrap().starts_with("server-law"));
        assert!(c["elapsed_ms"].as_f64().is_some());
        assert!(!c["checks"].as_array().unwrap().is_empty());
    }
    assert_eq!(v["passed"], v["total"]);
    assert_eq!(hopi(&["claims", "nonexistent"]).status.code(), Some(1));
}

#[test]
fn full_casebook_passes() {
    let o = hopi(&["claims"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("20/20 claims pass"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(hopi(&["--bogus"]).status.code(), Some(1));
    assert_eq!(hopi(&["check", "a!"]).status.code(), Some(1));
    assert_eq!(hopi(&["--help"]).status.code(), Some(0));
}
