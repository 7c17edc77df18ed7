use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tri_core::fixtures::{self, figure_eight};
use tri_core::homology::homology;
use tri_core::isosig::isosig;
use tri_core::moves::{apply, apply_plain, candidate_sites, Move, MoveError, MoveKind};
use tri_core::surgery::Decorated;
use tri_core::Triangulation;

fn scramble(tri: &Triangulation, steps: usize, rng: &mut ChaCha8Rng) -> Triangulation {
    let mut dec = Decorated::plain(tri.clone());
    for _ in 0..steps {
        let kinds = [MoveKind::TwoThree, MoveKind::ThreeTwo, MoveKind::ZeroTwo, MoveKind::TwoZero];
        let kind = *kinds.choose(rng).unwrap();
        let sites = candidate_sites(&dec.tri, kind);
        if let Some(mv) = sites.choose(rng) {
            if let Ok(a) = apply(&dec, mv) {
                dec = a.result;
            }
        }
    }
    dec.tri
}

#[test]
fn every_kind_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut counts = [0usize; 9];
    for trial in 0..60 {
        let base = scramble(&figure_eight(), trial % 5, &mut rng);
        let dec = Decorated::plain(base.clone());
        let sig = isosig(&base);
        for (k, kind) in MoveKind::ALL.iter().enumerate() {
            if *kind == MoveKind::FoldFill {
                continue;
            }
            for mv in candidate_sites(&base, *kind) {
                let Ok(done) = apply(&dec, &mv) else { continue };
                assert_eq!(
                    done.result.tri.size() as i64 - base.size() as i64,
                    kind.delta(),
                    "{mv}"
                );
                let inv = done.inverse.unwrap_or_else(|| panic!("no inverse for {mv}"));
                let back = apply(&done.result, &inv).unwrap_or_else(|e| panic!("{mv} then {inv}: {e}"));
                assert_eq!(isosig(&back.result.tri), sig, "{mv} then {inv}");
                counts[k] += 1;
                if rng.gen_bool(0.2) {
                    assert_eq!(homology(&done.result.tri), homology(&base));
                }
            }
        }
    }
    eprintln!("{counts:?}");
}

#[test]
fn figure_eight_two_three() {
    let t = figure_eight();
    let out = apply_plain(&t, &Move::TwoThree { tet: 0, face: 0 }).unwrap();
    assert_eq!(out.size(), 3);
    assert_eq!(out.edges().len(), 3);
    let err = apply_plain(&t, &Move::ThreeTwo { edge: 0 }).unwrap_err();
    assert!(matches!(err, MoveError::WrongDegree { degree: 6, .. }));
}

fn mixed_scramble(base: usize, seed: u64) -> Decorated {
    let bases = [figure_eight(), fixtures::gieseking(), fixtures::two_cusp(), fixtures::fold_ready()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dec = Decorated::plain(bases[base].clone());
    let kinds = [MoveKind::TwoThree, MoveKind::ZeroTwo, MoveKind::OneFour, MoveKind::Bubble];
    for _ in 0..rng.gen_range(0..6) {
        if let Some(mv) = candidate_sites(&dec.tri, *kinds.choose(&mut rng).unwrap()).choose(&mut rng) {
            if let Ok(a) = apply(&dec, mv) {
                dec = a.result;
            }
        }
    }
    dec
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn two_zero_is_undone_by_its_inverse(base in 0usize..4, seed in any::<u64>()) {
        let dec = mixed_scramble(base, seed);
        let sig = isosig(&dec.tri);
        for mv in candidate_sites(&dec.tri, MoveKind::TwoZero) {
            match apply(&dec, &mv) {
                Ok(done) => {
                    let inv = done.inverse.expect("2-0 without inverse");
                    let back = apply(&done.result, &inv).map_err(|e| TestCaseError::fail(format!("{mv} then {inv}: {e}")))?;
                    prop_assert_eq!(isosig(&back.result.tri), sig.clone());
                }
                Err(e) => prop_assert!(matches!(
                    e,
                    MoveError::MergingFacesCoincide { .. } | MoveError::OppositeEdgesCoincide { .. } | MoveError::RepeatedTetrahedron { .. } | MoveError::TooFewTetrahedra(_)
                ), "{mv}: {e}"),
            }
        }
    }
}
