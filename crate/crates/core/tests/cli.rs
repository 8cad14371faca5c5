use std::fs;
use std::path::{Path, PathBuf};

use sadic_core::cli::{run, EXIT_ERROR, EXIT_INEQUIVALENT, EXIT_OK};

const BASIS: &str =
    "one const-rational 1\nsqrt2 sqrt-integer 2\nsqrt3 sqrt-integer 3\nsqrt5 sqrt-integer 5\n";

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn sadic(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sadic").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn workdir() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let basis = dir.path().join("primes.basis");
    fs::write(&basis, BASIS).unwrap();
    (dir, basis)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rank(basis: &Path, out: &Path, n: &str, params: &str) -> Run {
    sadic(&[
        "construct-rank",
        "--n",
        n,
        "--basis",
        s(basis),
        "--params",
        params,
        "--levels",
        "3",
        "--out",
        s(out),
    ])
}

#[test]
fn construct_toe_writes_gsq_and_manifest() {
    let (dir, basis) = workdir();
    let out = dir.path().join("t.gsq");
    let r = sadic(&[
        "construct-toe",
        "--basis",
        s(&basis),
        "--params",
        "sqrt2,sqrt3",
        "--levels",
        "4",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.contains("0 failed"), "{}", r.out);
    let manifest = fs::read_to_string(dir.path().join("t.gsq.manifest")).unwrap();
    assert!(
        manifest
            .lines()
            .any(|l| l.starts_with("output: ") && l.contains(" sha256 ")),
        "{manifest}"
    );
    assert!(manifest.contains("outcome: ok"));
    assert!(!manifest.to_lowercase().contains("time"));
}

#[test]
fn construct_is_deterministic() {
    let (dir, basis) = workdir();
    let a = dir.path().join("a.gsq");
    let b = dir.path().join("b.gsq");
    assert_eq!(rank(&basis, &a, "3", "sqrt2,sqrt3").code, EXIT_OK);
    assert_eq!(rank(&basis, &b, "3", "sqrt2,sqrt3").code, EXIT_OK);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn rank_certificate_is_printed() {
    let (dir, basis) = workdir();
    let r = rank(&basis, &dir.path().join("r.gsq"), "3", "sqrt2,sqrt3");
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.contains("rank: exactly 3"), "{}", r.out);
}

#[test]
fn compare_verdicts_and_symmetry() {
    let (dir, basis) = workdir();
    let a = dir.path().join("a.gsq");
    let b = dir.path().join("b.gsq");
    let c = dir.path().join("c.gsq");
    rank(&basis, &a, "3", "sqrt2,sqrt3");
    rank(&basis, &b, "3", "sqrt3,sqrt2");
    rank(&basis, &c, "3", "sqrt3,sqrt5");
    let yes = sadic(&["compare", s(&a), s(&b), "--basis", s(&basis)]);
    assert_eq!(yes.code, EXIT_OK, "{}", yes.err);
    assert!(yes.out.contains("equivalent: yes"));
    for (x, y) in [(&a, &c), (&c, &a)] {
        let no = sadic(&["compare", s(x), s(y), "--basis", s(&basis)]);
        assert_eq!(no.code, EXIT_INEQUIVALENT, "{}", no.err);
        assert!(no.out.contains("equivalent: no"));
    }
}

#[test]
fn decide_fn_exit_codes() {
    let (_dir, basis) = workdir();
    let yes = sadic(&[
        "decide-fn",
        "--n",
        "2",
        "--basis",
        s(&basis),
        "--x",
        "sqrt2",
        "--y",
        "2*sqrt2+1/3",
    ]);
    assert_eq!(yes.code, EXIT_OK, "{}", yes.err);
    assert!(yes.out.contains("equivalent: yes"));
    let no = sadic(&[
        "decide-fn",
        "--n",
        "2",
        "--basis",
        s(&basis),
        "--x",
        "sqrt2",
        "--y",
        "sqrt3",
    ]);
    assert_eq!(no.code, EXIT_INEQUIVALENT);
}

#[test]
fn analyze_and_measure_clean_file() {
    let (dir, basis) = workdir();
    let a = dir.path().join("a.gsq");
    rank(&basis, &a, "2", "sqrt2");
    let an = sadic(&["analyze", s(&a), "--basis", s(&basis)]);
    assert_eq!(an.code, EXIT_OK, "{}{}", an.out, an.err);
    let me = sadic(&["measure", s(&a), "--basis", s(&basis)]);
    assert_eq!(me.code, EXIT_OK, "{}", me.err);
    assert!(me.out.contains("c[1][0] = "));
    assert!(me.out.contains("tower 0"));
}

#[test]
fn analyze_reports_corruption() {
    let (dir, basis) = workdir();
    let a = dir.path().join("a.gsq");
    rank(&basis, &a, "2", "sqrt2");
    let text = fs::read_to_string(&a).unwrap();
    let at = text.find("w0: 0 1 0").unwrap() + "w0: ".len();
    let mut bytes = text.into_bytes();
    bytes[at] = b'1';
    fs::write(&a, bytes).unwrap();
    let r = sadic(&["analyze", s(&a), "--basis", s(&basis)]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(
        r.out.contains("first violation") || r.out.contains("FAIL"),
        "{}",
        r.out
    );
}

#[test]
fn errors_exit_two() {
    let (dir, basis) = workdir();
    let missing = dir.path().join("nope.gsq");
    assert_eq!(sadic(&["analyze", s(&missing)]).code, EXIT_ERROR);
    assert_eq!(sadic(&["frobnicate"]).code, EXIT_ERROR);
    let bad = sadic(&[
        "construct-toe",
        "--basis",
        s(&basis),
        "--params",
        "sqrt7",
        "--levels",
        "2",
        "--out",
        s(&dir.path().join("x.gsq")),
    ]);
    assert_eq!(bad.code, EXIT_ERROR);
    assert!(!bad.err.is_empty());
}

#[test]
fn measure_without_measures_fails() {
    let (dir, basis) = workdir();
    let a = dir.path().join("a.gsq");
    rank(&basis, &a, "2", "sqrt2");
    let text: String = fs::read_to_string(&a)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("meta:"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&a, text).unwrap();
    assert_eq!(
        sadic(&["measure", s(&a), "--basis", s(&basis)]).code,
        EXIT_ERROR
    );
}

#[test]
fn version_and_help_succeed() {
    assert_eq!(sadic(&["--version"]).code, EXIT_OK);
    assert_eq!(sadic(&["--help"]).code, EXIT_OK);
}
