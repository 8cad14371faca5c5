mod common;

use common::{prec, primes, rank3, toe4};
use sadic_core::build_toe::verify_toe_invariants;
use sadic_core::gsq::{load_gsq, read_gsq, save_gsq, write_gsq};
use sadic_core::Error;

#[test]
fn engine_outputs_round_trip() {
    for (gs, mv) in [toe4(), rank3()] {
        let text = write_gsq(gs, mv);
        let (g2, m2) = read_gsq(&text).unwrap();
        assert_eq!(&g2, gs);
        assert_eq!(&m2, mv);
        assert_eq!(write_gsq(&g2, &m2), text);
    }
}

#[test]
fn round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.gsq");
    let (gs, mv) = rank3();
    save_gsq(&path, gs, mv).unwrap();
    let (g2, m2) = load_gsq(&path).unwrap();
    assert_eq!((&g2, &m2), (gs, mv));
}

fn line_of(text: &str, prefix: &str) -> usize {
    text.lines().position(|l| l.starts_with(prefix)).unwrap() + 1
}

#[test]
fn wrong_h_is_reported_on_its_line() {
    let (gs, mv) = toe4();
    let text = write_gsq(gs, mv);
    let bad = text.replace("level 2 len 256 h 256", "level 2 len 256 h 255");
    assert_ne!(bad, text);
    let line = line_of(&bad, "level 2 ");
    match read_gsq(&bad) {
        Err(Error::Gsq { line: l, .. }) => assert_eq!(l, line),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn short_building_is_rejected() {
    let (gs, mv) = toe4();
    let text = write_gsq(gs, mv);
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let at = line_of(&text, "level 2 ");
    let w0 = &mut lines[at];
    let cut = w0.rfind(' ').unwrap();
    w0.truncate(cut);
    assert!(read_gsq(&(lines.join("\n") + "\n")).is_err());
}

#[test]
fn unknown_field_is_rejected() {
    let (gs, mv) = rank3();
    let text = write_gsq(gs, mv).replacen("engine: rank", "engine: rank\nflavour: mild", 1);
    assert!(read_gsq(&text).is_err());
}

#[test]
fn garbage_magic_is_rejected() {
    assert!(read_gsq("gsq 9\nalphabet: 01\n").is_err());
    assert!(read_gsq("").is_err());
}

#[test]
fn dropping_last_meta_leaves_checks_unverifiable() {
    let (gs, mv) = toe4();
    let text = write_gsq(gs, mv);
    let metas: Vec<usize> = (text.lines().enumerate())
        .filter(|(_, l)| l.starts_with("meta:"))
        .map(|(i, _)| i)
        .collect();
    let last_meta = *metas.last().unwrap();
    let kept: Vec<&str> = text
        .lines()
        .enumerate()
        .filter(|(i, _)| *i != last_meta)
        .map(|(_, l)| l)
        .collect();
    let (g2, m2) = read_gsq(&(kept.join("\n") + "\n")).unwrap();
    assert_eq!(m2.last_level(), Some(3));
    let r = verify_toe_invariants(&g2, &m2, &primes(), Some(&[1, 2]), &prec()).unwrap();
    assert!(r.first_failure().is_none());
    assert!(r.unverifiable().any(|c| c.level == 4));
}

#[test]
fn measures_must_cover_a_prefix() {
    let (gs, mv) = toe4();
    let text = write_gsq(gs, mv);
    let first_meta = text.lines().position(|l| l.starts_with("meta:")).unwrap();
    let kept: Vec<&str> = text
        .lines()
        .enumerate()
        .filter(|(i, _)| *i != first_meta)
        .map(|(_, l)| l)
        .collect();
    assert!(read_gsq(&(kept.join("\n") + "\n")).is_err());
}
