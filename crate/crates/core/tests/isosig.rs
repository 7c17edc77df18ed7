use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tri_core::fixtures;
use tri_core::isosig::isosig;
use tri_core::moves::{apply, candidate_sites, MoveKind};
use tri_core::surgery::Decorated;
use tri_core::{Gluing, Perm, Triangulation};

/// A random closed connected gluing table on `n` tetrahedra, if the draw is valid.
fn random_table(n: usize, rng: &mut ChaCha8Rng) -> Option<Triangulation> {
    let mut faces: Vec<(usize, u8)> = (0..n).flat_map(|t| (0..4u8).map(move |f| (t, f))).collect();
    faces.shuffle(rng);
    let mut tets = vec![[Gluing { tet: 0, perm: tri_core::perm::IDENTITY }; 4]; n];
    for pair in faces.chunks(2) {
        let ((t, f), (u, h)) = (pair[0], pair[1]);
        let fits: Vec<Perm> = Perm::all().into_iter().filter(|p| p.apply(f) == h).collect();
        let p = *fits.choose(rng)?;
        tets[t][f as usize] = Gluing { tet: u, perm: p };
        tets[u][h as usize] = Gluing { tet: t, perm: p.inverse() };
    }
    let tri = Triangulation::ideal(tets).ok()?;
    tri.is_connected().then_some(tri)
}

fn brute_isomorphic(a: &Triangulation, b: &Triangulation) -> bool {
    if a.size() != b.size() {
        return false;
    }
    let n = a.size();
    let mut orders: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for o in &orders {
            for x in (0..n).filter(|x| !o.contains(x)) {
                next.push([o.as_slice(), &[x]].concat());
            }
        }
        orders = next;
    }
    let mut sigmas = vec![vec![]];
    for _ in 0..n {
        sigmas = sigmas
            .into_iter()
            .flat_map(|s: Vec<Perm>| Perm::all().into_iter().map(move |p| [s.clone(), vec![p]].concat()).collect::<Vec<_>>())
            .collect();
    }
    orders.iter().any(|o| {
        sigmas.iter().any(|s| {
            let r = a.relabelled(o, s);
            r.gluings() == b.gluings() && r.corner_kinds() == b.corner_kinds()
        })
    })
}

fn scrambled(seed: u64, steps: usize) -> Triangulation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dec = Decorated::plain(fixtures::figure_eight());
    let kinds = [MoveKind::TwoThree, MoveKind::ThreeTwo, MoveKind::ZeroTwo, MoveKind::TwoZero, MoveKind::OneFour];
    for _ in 0..steps {
        let kind = *kinds.choose(&mut rng).unwrap();
        if let Some(mv) = candidate_sites(&dec.tri, kind).choose(&mut rng) {
            if let Ok(a) = apply(&dec, mv) {
                dec = a.result;
            }
        }
    }
    dec.tri
}

#[test]
fn signature_decides_isomorphism_on_small_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pool = Vec::new();
    while pool.len() < 60 {
        let n = rng.gen_range(1..=2);
        if let Some(t) = random_table(n, &mut rng) {
            pool.push(t);
        }
    }
    let (mut same, mut different) = (0, 0);
    for (i, a) in pool.iter().enumerate() {
        for b in &pool[i..] {
            let iso = brute_isomorphic(a, b);
            assert_eq!(isosig(a) == isosig(b), iso, "{} vs {}", isosig(a), isosig(b));
            if iso {
                same += 1;
            } else {
                different += 1;
            }
        }
    }
    assert!(same > pool.len() && different > 0);
}

#[test]
fn signature_decides_isomorphism_on_three_tetrahedra() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 4 {
        let (Some(a), Some(b)) = (random_table(3, &mut rng), random_table(3, &mut rng)) else { continue };
        assert_eq!(isosig(&a) == isosig(&b), brute_isomorphic(&a, &b));
        let order = [2, 0, 1];
        let sigma: Vec<Perm> = (0..3).map(|_| *Perm::all().choose(&mut rng).unwrap()).collect();
        let c = a.relabelled(&order, &sigma);
        assert!(brute_isomorphic(&a, &c));
        assert_eq!(isosig(&a), isosig(&c));
        checked += 1;
    }
}

#[test]
fn fixtures_have_distinct_signatures() {
    let sigs: std::collections::HashSet<_> = [
        fixtures::figure_eight(),
        fixtures::gieseking(),
        fixtures::two_cusp(),
        fixtures::fold_ready(),
        fixtures::sphere(),
        fixtures::degree_one(),
    ]
    .iter()
    .map(isosig)
    .collect();
    assert_eq!(sigs.len(), 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relabelling_keeps_the_signature(seed in any::<u64>(), steps in 0usize..8) {
        let tri = scrambled(seed, steps);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(17));
        let mut order: Vec<usize> = (0..tri.size()).collect();
        order.shuffle(&mut rng);
        let sigma: Vec<Perm> = (0..tri.size()).map(|_| *Perm::all().choose(&mut rng).unwrap()).collect();
        let other = tri.relabelled(&order, &sigma);
        prop_assert_eq!(isosig(&other), isosig(&tri));
    }
}
