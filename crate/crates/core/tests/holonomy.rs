use num_complex::Complex64 as C;

use tri_core::fixtures;
use tri_core::gluing::{gluing_system, holonomy_from_shapes, labels_from_shapes, solve, SolveOptions};
use tri_core::holonomy::{
    anchorability, develop_labels, infinitely_anchorable_certificate, l_essential_check, peripheral_images,
    verify_representation, Anchorability, Family, Representation, WordPresentation,
};
use tri_core::homology::{DualTree, Presentation};
use tri_core::mobius::{fixed_points, Cp1, FixedSet, Mat2};
use tri_core::surgery::Decorated;

fn m(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> Mat2 {
    Mat2::new(C::new(a.0, a.1), C::new(b.0, b.1), C::new(c.0, c.1), C::new(d.0, d.1))
}

fn figure_eight_geometric() -> (Representation, Vec<Mat2>, Vec<Mat2>) {
    let tri = fixtures::figure_eight();
    let z = solve(&gluing_system(&tri).unwrap(), &SolveOptions::default()).unwrap().shapes;
    let rep = holonomy_from_shapes(&tri, &z).unwrap();
    let tree = DualTree::standard(&tri);
    let images = rep.images_for(tree.generators.len()).unwrap();
    let periph = peripheral_images(&tri, &tree, &images, 0);
    (rep, images, periph)
}

/// A loxodromic product of two generator images that does not commute with `mu`.
fn auxiliary(images: &[Mat2], mu: &Mat2) -> Mat2 {
    let mut cands = images.to_vec();
    for a in images {
        for b in images {
            cands.push(*a * *b);
            cands.push(*a * b.inv());
        }
    }
    cands
        .into_iter()
        .find(|g| {
            let t = g.normalized().trace();
            (t * t - 4.0).norm() > 0.1 && !g.commutator(mu).is_identity(1e-6)
        })
        .expect("figure-eight group is not elementary")
}

#[test]
fn fixed_point_examples() {
    let par = m((1.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0, 0.0));
    assert_eq!(fixed_points(&par, 1e-9), FixedSet::Points(vec![Cp1::INFINITY]));
    let diag = m((0.0, 1.0), (0.0, 0.0), (0.0, 0.0), (0.0, -1.0));
    match fixed_points(&diag, 1e-9) {
        FixedSet::Points(p) => {
            assert_eq!(p.len(), 2);
            assert!(p.iter().any(|x| x.is_infinity(1e-12)));
            assert!(p.iter().any(|x| x.close(&Cp1::finite(C::new(0.0, 0.0)), 1e-12)));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(fixed_points(&Mat2::IDENTITY, 1e-9), FixedSet::All);
}

#[test]
fn k4_pair_is_not_anchorable() {
    let x = m((0.0, 1.0), (0.0, 0.0), (0.0, 0.0), (0.0, -1.0));
    let y = m((0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 0.0));
    match anchorability(&[x, y], 1e-9).unwrap() {
        Anchorability::NonAnchorable(w) => {
            for g in [w.a, w.b, w.ab] {
                assert!(g.trace().norm() < 1e-12);
                assert!((g * g).normalized().is_identity(1e-12));
            }
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn commuting_parabolics_fix_one_point() {
    let p = m((1.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0, 0.0));
    let q = m((1.0, 0.0), (0.3, 2.0), (0.0, 0.0), (1.0, 0.0));
    match anchorability(&[p, q], 1e-9).unwrap() {
        Anchorability::Anchorable(FixedSet::Points(pts)) => {
            assert_eq!(pts.len(), 1);
            assert!(pts[0].is_infinity(1e-9));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn non_commuting_images_are_an_error() {
    let p = m((1.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0, 0.0));
    let q = m((1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (1.0, 0.0));
    assert!(anchorability(&[p, q], 1e-9).is_err());
}

#[test]
fn m367_with_k4_images_is_flagged() {
    let pres = WordPresentation::from_json(fixtures::M367).unwrap();
    let rep = Representation::from_json(fixtures::K4_REP).unwrap();
    let ver = pres.verify(&rep).unwrap();
    assert!(ver.pass);
    assert!(ver.worst_residual < 1e-12);
    for cusp in 0..pres.cusps.len() {
        let ims = pres.peripheral_images(&rep, cusp).unwrap();
        assert!(matches!(anchorability(&ims, 1e-9).unwrap(), Anchorability::NonAnchorable(_)), "cusp {cusp}");
    }
}

#[test]
fn trivial_and_random_representations() {
    let tri = fixtures::figure_eight();
    let pres = Presentation::new(&tri);
    assert!(verify_representation(&pres, &Representation::trivial(pres.generators)).unwrap().pass);
    let mut rep = Representation::trivial(pres.generators);
    for (i, g) in rep.generators.values_mut().enumerate() {
        *g = m((1.0 + i as f64, 0.3), (0.7, -1.1), (0.2, 0.5), (2.0, 0.0 - i as f64));
    }
    assert!(!verify_representation(&pres, &rep).unwrap().pass);
}

#[test]
fn geometric_labels_are_essential() {
    let tri = fixtures::figure_eight();
    let (rep, _, periph) = figure_eight_geometric();
    for p in &periph {
        let t = p.normalized().trace();
        assert!((t * t - 4.0).norm() < 1e-9);
    }
    let labels = develop_labels(&tri, &rep).unwrap();
    for t in 0..tri.size() {
        for a in 0..4u8 {
            for b in a + 1..4 {
                let (la, lb) = (labels.dec.label(t, a).unwrap(), labels.dec.label(t, b).unwrap());
                assert!(la.chordal(&lb) > 1e-6);
            }
        }
    }
    let report = l_essential_check(&labels.dec, 1e-8).unwrap();
    assert!(report.is_essential());
    assert!(report.degenerate.is_empty());
}

#[test]
fn developed_frames_are_compatible() {
    for tri in [fixtures::figure_eight(), fixtures::fold_ready()] {
        let z = solve(&gluing_system(&tri).unwrap(), &SolveOptions::default()).unwrap().shapes;
        let dec = labels_from_shapes(&tri, &z).unwrap();
        assert!(dec.frames.as_ref().unwrap().compatibility_residual(&tri) < 1e-9);
        let rep = holonomy_from_shapes(&tri, &z).unwrap();
        let developed = develop_labels(&tri, &rep).unwrap();
        assert!(developed.dec.frames.as_ref().unwrap().compatibility_residual(&tri) < 1e-9);
    }
}

#[test]
fn constant_labels_across_cusps_make_an_edge_inessential() {
    let tri = fixtures::two_cusp();
    let pres = Presentation::new(&tri);
    let mut rep = Representation::trivial(pres.generators);
    rep.anchors.insert(0, Cp1::finite(C::new(0.0, 0.0)));
    rep.anchors.insert(1, Cp1::finite(C::new(0.0, 0.0)));
    let labels = develop_labels(&tri, &rep).unwrap();
    let report = l_essential_check(&labels.dec, 1e-8).unwrap();
    assert!(!report.is_essential());
    rep.anchors.insert(1, Cp1::INFINITY);
    let labels = develop_labels(&tri, &rep).unwrap();
    for v in tri.vertices() {
        let first = labels.dec.label(v.corners[0].0, v.corners[0].1).unwrap();
        for &(t, c) in &v.corners {
            assert!(labels.dec.label(t, c).unwrap().close(&first, 1e-12));
        }
    }
    let report = l_essential_check(&labels.dec, 1e-8).unwrap();
    let inter: Vec<usize> = tri.edges().iter().filter(|e| e.ends.0 != e.ends.1).map(|e| e.id).collect();
    for e in &report.edges {
        assert_eq!(e.essential, inter.contains(&e.edge), "edge {}", e.edge);
    }
}

#[test]
fn barycentric_is_essential_under_any_labels() {
    let tri = fixtures::figure_eight();
    let pres = Presentation::new(&tri);
    let dec = develop_labels(&tri, &Representation::trivial(pres.generators)).unwrap().dec;
    let bary = tri_core::snakes::barycentric(&dec).unwrap();
    assert!(l_essential_check(&bary, 1e-8).unwrap().is_essential());
    let plain = l_essential_check(&dec, 1e-8).unwrap();
    assert!(!plain.is_essential());
    assert!(l_essential_check(&Decorated::plain(tri), 1e-8).is_err());
}

#[test]
fn certificate_passes_on_geometric_data() {
    let (_, images, periph) = figure_eight_geometric();
    let (mu, lambda) = (periph[0], periph[1]);
    let gamma = auxiliary(&images, &mu);
    let cert = infinitely_anchorable_certificate(&mu, &lambda, &gamma, 1e-6);
    assert!(cert.passed(), "{:?}", cert.first_failure());
    let families: std::collections::HashSet<Family> = cert.checks.iter().map(|c| c.family).collect();
    assert_eq!(families.len(), 5);
}

#[test]
fn each_family_has_a_failing_example() {
    let (_, images, periph) = figure_eight_geometric();
    let (mu, lambda) = (periph[0], periph[1]);
    let gamma = auxiliary(&images, &mu);
    let fails = |mu: &Mat2, lambda: &Mat2, gamma: &Mat2| -> Vec<Family> {
        infinitely_anchorable_certificate(mu, lambda, gamma, 1e-6).checks.iter().filter(|c| !c.pass).map(|c| c.family).collect()
    };
    let involution = m((0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 0.0));
    assert!(fails(&involution, &lambda, &gamma).contains(&Family::NoInvolutions));
    let commuting = mu * mu;
    assert!(fails(&mu, &lambda, &commuting).contains(&Family::NoCommutation1));
    let parabolic = m((1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (1.0, 0.0));
    let f = fails(&mu, &lambda, &parabolic);
    assert!(f.contains(&Family::GammaNotParabolic));
    let dilation = m((2.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.5, 0.0));
    let par = m((1.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0, 0.0));
    assert!(fails(&par, &par, &dilation).contains(&Family::NoCommutation2));
    let order_three = m((0.0, 0.0), (-1.0, 0.0), (1.0, 0.0), (1.0, 0.0));
    let f = fails(&order_three, &lambda, &gamma);
    assert_eq!(f, vec![Family::NoTorsion]);
}
