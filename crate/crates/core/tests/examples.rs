mod common;

use common::{prec, primes};
use num_bigint::BigInt;
use sadic_core::build_rank::{build_rank_subshift, verify_rank_invariants, RankConfig};
use sadic_core::gamma::{gamma_from_system, GammaModule};
use sadic_core::measures::{ergodic_dim_bound, integrate_step_function, kr_from_level, StepTerm};
use sadic_core::scalars::{rat, ParamBasis, ParamScalar};
use sadic_core::toeplitz::{regularity_profile, residue_density, word_residues};
use sadic_core::words::{GeneratingSequence, Level};

fn rational_n2(h1: Option<u64>, levels: usize) -> RankConfig {
    let mut cfg = RankConfig::new(
        ParamBasis::unit(),
        2,
        vec![ParamScalar::rational(rat(2, 5))],
        levels,
    );
    cfg.first_length = h1.map(BigInt::from);
    cfg
}

#[test]
fn forced_first_length_towers() {
    let (gs, mv) = build_rank_subshift(&rational_n2(Some(20), 1)).unwrap();
    let kr = kr_from_level(&gs, &mv, 1).unwrap();
    let tower = (ParamScalar::rational(rat(1, 40)), BigInt::from(20));
    assert_eq!(kr.towers, vec![tower.clone(), tower]);
}

#[test]
fn letter_cylinder_recovers_y() {
    let basis = primes();
    let cfg = RankConfig::new(basis.clone(), 2, vec![basis.param(1)], 3);
    let (gs, mv) = build_rank_subshift(&cfg).unwrap();
    let w: Vec<StepTerm> = (0..2)
        .flat_map(|j| {
            let e = gs.expand_indices(1, j).unwrap();
            e.iter()
                .enumerate()
                .filter(|(_, &a)| a == 0)
                .map(|(p, _)| StepTerm {
                    level: 1,
                    word: j,
                    shift: BigInt::from(p),
                    weight: BigInt::from(1),
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mu = integrate_step_function(&gs, &mv, &w).unwrap();
    // y_1 = sqrt2 - 1 is the shift of sqrt2 into (0, 1/2].
    assert_eq!(mu, basis.parse_expr("sqrt2-1").unwrap());
}

#[test]
fn rank_regularity_profile_bounds() {
    let basis = primes();
    let cfg = RankConfig::new(basis.clone(), 2, vec![basis.param(1)], 5);
    let (gs, _) = build_rank_subshift(&cfg).unwrap();
    let profile = regularity_profile(&gs).unwrap();
    let floors = [rat(0, 1), rat(1, 2), rat(2, 3), rat(3, 4), rat(4, 5)];
    assert_eq!(profile.len(), floors.len());
    for (e, f) in profile.iter().zip(&floors) {
        assert!(&e.delta_lb >= f, "{e}");
    }
}

#[test]
fn residue_density_of_deep_word() {
    let basis = primes();
    let cfg = RankConfig::new(basis.clone(), 2, vec![basis.param(1)], 3);
    let (gs, _) = build_rank_subshift(&cfg).unwrap();
    for m in 1..3 {
        let p = gs.h(m).unwrap().clone();
        let res = word_residues(&gs, 3, 0, &p).unwrap();
        let pu: usize = p.try_into().unwrap();
        let d = residue_density(&res, pu);
        assert!(d >= rat(m as i64 - 1, m as i64), "m={m}: {d}");
    }
}

#[test]
fn identity_incidence_bound_is_word_count() {
    let gs = GeneratingSequence::new(
        vec!['a', 'b', 'c'],
        0,
        vec![
            Level {
                buildings: vec![vec![0], vec![1], vec![2]],
                ..Default::default()
            },
            Level {
                buildings: vec![vec![0], vec![1], vec![2]],
                ..Default::default()
            },
        ],
    )
    .unwrap();
    assert_eq!(ergodic_dim_bound(&gs, 0, 1).unwrap(), 3);
}

#[test]
fn rank_two_gamma_is_span_of_sqrt2() {
    let basis = ParamBasis::sqrt_primes(&[2]).unwrap();
    let cfg = RankConfig::new(basis.clone(), 2, vec![basis.param(1)], 2);
    let (gs, mv) = build_rank_subshift(&cfg).unwrap();
    let (g, stab) = gamma_from_system(&gs, &mv, 2, 2).unwrap();
    let want = GammaModule::new(1, 2, &[vec![ParamScalar::one()], vec![basis.param(1)]]).unwrap();
    assert_eq!(g, want);
    assert!(stab.stable());
}

#[test]
fn rational_system_degrades_certificate() {
    let cfg = rational_n2(None, 3);
    let (gs, mv) = build_rank_subshift(&cfg).unwrap();
    let (g, _) = gamma_from_system(&gs, &mv, 3, 1).unwrap();
    assert_eq!(g.dimension(), 1);
    let r = verify_rank_invariants(&gs, &mv, &cfg.basis, Some(&cfg.params), &prec()).unwrap();
    assert!(r.all_pass(), "{:?}", r.first_failure());
    assert!(
        r.certificates.iter().any(|c| c == "rank: at most 2"),
        "{:?}",
        r.certificates
    );
    assert!(!r
        .certificates
        .iter()
        .any(|c| c.starts_with("rank: exactly")));
}
