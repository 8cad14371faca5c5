mod common;

use common::{prec, primes, rank3, toe4};
use num_bigint::BigInt;
use sadic_core::build_rank::verify_rank_invariants;
use sadic_core::build_toe::verify_toe_invariants;
use sadic_core::measures::MeasureVector;
use sadic_core::report::VerifyReport;
use sadic_core::scalars::{rat, ParamScalar};
use sadic_core::words::GeneratingSequence;

fn toe_report(gs: &GeneratingSequence, mv: &MeasureVector) -> VerifyReport {
    verify_toe_invariants(gs, mv, &primes(), Some(&[1, 2]), &prec()).unwrap()
}

fn rank_report(gs: &GeneratingSequence, mv: &MeasureVector) -> VerifyReport {
    let basis = primes();
    let xs = common::params(&basis, &["sqrt2", "sqrt3"]);
    verify_rank_invariants(gs, mv, &basis, Some(&xs), &prec()).unwrap()
}

/// The first failure sits at `level` and `label` is among the failures there.
fn assert_localized(r: &VerifyReport, level: usize, label: &str) {
    let first = r.first_failure().expect("tampering went unnoticed");
    assert_eq!(first.level, level, "first failure {first}");
    assert!(
        r.failures()
            .any(|c| c.level == level && c.hypothesis == label),
        "no {label} failure at level {level}: {:?}",
        r.failures().map(ToString::to_string).collect::<Vec<_>>()
    );
}

fn nudge(mv: &MeasureVector, n: usize, i: usize, delta: &ParamScalar) -> MeasureVector {
    let mut out = mv.clone();
    let c = out.get_mut(n, i).unwrap();
    *c = &*c + delta;
    out
}

fn tiny() -> ParamScalar {
    ParamScalar::rational(rat(1, 1 << 40))
}

#[test]
fn toe_marker_swap() {
    let (gs, mv) = toe4();
    let mut b = gs.building(3, 0).unwrap().to_vec();
    b.swap(1, 2);
    assert_localized(
        &toe_report(&gs.with_building(3, 0, b).unwrap(), mv),
        3,
        "hyp(1):recognizable-marker",
    );
}

#[test]
fn toe_count_change() {
    let (gs, mv) = toe4();
    let mut b = gs.building(4, 2).unwrap().to_vec();
    let mid = b.len() / 2;
    b[mid] = (b[mid] + 1) % 4;
    let r = toe_report(&gs.with_building(4, 2, b).unwrap(), mv);
    assert_localized(&r, 4, "hyp(5)");
    assert!(!r.passed(4, "bullet:even"));
}

#[test]
fn toe_measure_perturbation() {
    let (gs, mv) = toe4();
    let r = toe_report(gs, &nudge(mv, 3, 1, &tiny()));
    assert_localized(&r, 3, "(**)");
    assert!(!r.passed(3, "hyp(5)"));
}

#[test]
fn toe_mass_preserving_perturbation() {
    let (gs, mv) = toe4();
    let moved = nudge(&nudge(mv, 3, 1, &tiny()), 3, 2, &-&tiny());
    let r = toe_report(gs, &moved);
    assert_localized(&r, 3, "hyp(5)");
    assert!(r.passed(3, "(**)"));
}

#[test]
fn toe_epsilon_meta() {
    let (gs, mv) = toe4();
    for (key, value) in [("e4", "1/10000000"), ("e2", "1")] {
        let mut g = gs.clone();
        let mut meta = g.level(3).unwrap().meta.clone();
        meta.eps.iter_mut().find(|(k, _)| k == key).unwrap().1 = value.into();
        g.set_meta(3, meta).unwrap();
        assert_localized(&toe_report(&g, mv), 3, "bullet:within-e4");
    }
}

#[test]
fn toe_wrong_parameters() {
    let (gs, mv) = toe4();
    let r = verify_toe_invariants(gs, mv, &primes(), Some(&[2, 1]), &prec()).unwrap();
    assert_localized(&r, 1, "hyp(4):coset");
}

#[test]
fn toe_missing_measures_are_unverifiable() {
    let (gs, mv) = toe4();
    let cut = MeasureVector::new(1, (1..=2).map(|n| mv.level(n).unwrap().to_vec()).collect());
    let r = toe_report(gs, &cut);
    assert!(r.first_failure().is_none());
    assert!(r.unverifiable().any(|c| c.level == 3));
}

#[test]
fn rank_k_perturbation() {
    let (gs, mv) = rank3();
    let mut g = gs.clone();
    let mut meta = g.level(2).unwrap().meta.clone();
    meta.k.as_mut().unwrap()[0] += BigInt::from(6);
    g.set_meta(2, meta).unwrap();
    let r = rank_report(&g, mv);
    assert_localized(&r, 2, "(d)");
    assert!(!r.passed(2, "(f)"));
}

#[test]
fn rank_r_perturbation() {
    let (gs, mv) = rank3();
    let mut g = gs.clone();
    let mut meta = g.level(2).unwrap().meta.clone();
    *meta.r.as_mut().unwrap() += 1;
    g.set_meta(2, meta).unwrap();
    assert_localized(&rank_report(&g, mv), 2, "hyp(5):multiples");
}

#[test]
fn rank_measure_perturbation() {
    let (gs, mv) = rank3();
    let r = rank_report(gs, &nudge(mv, 2, 1, &tiny()));
    assert_localized(&r, 2, "hyp(5):mass");
    assert!(!r.passed(2, "recurrence"));
}

#[test]
fn rank_marker_swap() {
    let (gs, mv) = rank3();
    let mut b = gs.building(2, 0).unwrap().to_vec();
    b.swap(0, 1);
    let r = rank_report(&gs.with_building(2, 0, b).unwrap(), mv);
    assert_localized(&r, 2, "hyp(2):recognizable-marker");
    assert!(!r.passed(2, "(g)"));
}

#[test]
fn rank_surplus_letter() {
    let (gs, mv) = rank3();
    let mut b = gs.building(2, 1).unwrap().to_vec();
    let at = b.len() - 4;
    b[at] = (b[at] + 1) % 3;
    let r = rank_report(&gs.with_building(2, 1, b).unwrap(), mv);
    assert_localized(&r, 2, "(f)");
}

#[test]
fn rank_count_change() {
    let (gs, mv) = rank3();
    let mut b = gs.building(3, 2).unwrap().to_vec();
    let mid = b.len() / 2;
    b[mid] = (b[mid] + 1) % 3;
    let r = rank_report(&gs.with_building(3, 2, b).unwrap(), mv);
    assert_localized(&r, 3, "hyp(4):counts");
}

#[test]
fn rank_wrong_parameters() {
    let (gs, mv) = rank3();
    let basis = primes();
    let ys = common::params(&basis, &["sqrt3", "sqrt2"]);
    let r = verify_rank_invariants(gs, mv, &basis, Some(&ys), &prec()).unwrap();
    assert_localized(&r, 0, "c0:y");
}
