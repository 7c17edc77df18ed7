//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use tri_core::fixtures;
use tri_core::gluing::{
    bloch_wigner, bloch_wigner_angles, gluing_system, holonomy_from_shapes, labels_from_shapes, shapes_from_labels, solve,
    volume, ShapeVector, SolveOptions,
};
use tri_core::holonomy::{
    anchorability, develop_labels, infinitely_anchorable_certificate, l_essential_check, peripheral_images, Anchorability,
    Family, Representation, WordPresentation,
};
use tri_core::homology::{abelianize, homology, homology_of_matrix, DualTree, Presentation};
use tri_core::isosig::isosig;
use tri_core::mobius::{c, FixedSet, Mat2, C};
use tri_core::moves::{apply, candidate_sites, Move, MoveKind};
use tri_core::search::{connect, scramble, Connection, Filter};
use tri_core::snakes::{build_essential, SearchLimits};
use tri_core::surgery::Decorated;
use tri_core::Triangulation;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn tri_json(args: &[&str]) -> Result<(Value, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_tri")).args(args).output().map_err(|e| e.to_string())?;
    let took = start.elapsed();
    if !out.status.success() {
        return Err(format!("tri {args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    let v = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    Ok((v, took))
}

fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = x * x;
    acc + 1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x) + 1.0 / (42.0 * x2.powi(3) * x)
        - 1.0 / (30.0 * x2.powi(4) * x)
}

/// Sum of sin(k pi/3)/k^2, grouped by residue mod 6 into trigamma values.
fn clausen_pi_3() -> f64 {
    3f64.sqrt() / 72.0 * (trigamma(1.0 / 6.0) + trigamma(2.0 / 6.0) - trigamma(4.0 / 6.0) - trigamma(5.0 / 6.0))
}

fn geometric(tri: &Triangulation) -> Decorated {
    let z = solve(&gluing_system(tri).unwrap(), &SolveOptions::default()).unwrap().shapes;
    labels_from_shapes(tri, &z).unwrap()
}

fn figure_eight_shapes() -> Outcome {
    let (report, took) = tri_json(&["solve", fixture("fig8.tri").to_str().unwrap()])?;
    let r = &report["result"];
    let edge = r["edge_residual"].as_f64().ok_or("no residual")?;
    let cusp = r["completeness_residual"].as_f64().ok_or("no residual")?;
    ensure!(edge < 1e-12 && cusp < 1e-12, "residuals {edge:e} {cusp:e}");
    let mut worst: f64 = 0.0;
    for s in r["shapes"].as_array().ok_or("no shapes")? {
        let z = c(s[0].as_f64().unwrap(), s[1].as_f64().unwrap());
        worst = worst.max((z * z - z + 1.0).norm());
        ensure!(z.im > 0.0, "shape {z} not positively oriented");
    }
    ensure!(worst < 1e-10, "z^2 - z + 1 = {worst:e}");
    let sys = gluing_system(&fixtures::figure_eight()).unwrap();
    let root = ShapeVector::uniform(2, C::from_polar(1.0, PI / 3.0));
    let exact = sys.product_residual(&root, true);
    ensure!(exact < 1e-12, "exact root leaves {exact:e}");
    ensure!(took < Duration::from_secs(1), "took {took:?}");
    Ok(format!("residual {edge:.1e}, |z^2-z+1| {worst:.1e}, {} ms", took.as_millis()))
}

fn volume_value() -> Outcome {
    let (report, _) = tri_json(&["solve", fixture("fig8.tri").to_str().unwrap()])?;
    let vol = report["result"]["volume"].as_f64().ok_or("no volume")?;
    let oracle = 2.0 * clausen_pi_3();
    ensure!((vol - oracle).abs() < 1e-9, "volume {vol} vs oracle {oracle}");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut points = 0;
    while points < 100 {
        let z = C::from_polar(rng.gen_range(0.05..5.0), rng.gen_range(-PI..PI));
        if z.im.abs() < 1e-3 {
            continue;
        }
        worst = worst.max((bloch_wigner(z) - bloch_wigner_angles(z)).abs());
        points += 1;
    }
    ensure!(worst < 1e-12, "dilog paths differ by {worst:e}");
    Ok(format!("volume {vol:.12} (oracle {oracle:.12}), dilog paths within {worst:.1e} at 100 points"))
}

const ROUND_TRIP_KINDS: [MoveKind; 8] = [
    MoveKind::TwoThree,
    MoveKind::ThreeTwo,
    MoveKind::ZeroTwo,
    MoveKind::TwoZero,
    MoveKind::Bubble,
    MoveKind::ReverseBubble,
    MoveKind::OneFour,
    MoveKind::FourOne,
];

fn random_move(dec: &Decorated, rng: &mut ChaCha8Rng) -> Option<(Move, tri_core::moves::Applied)> {
    let mut kinds = ROUND_TRIP_KINDS.to_vec();
    kinds.shuffle(rng);
    for kind in kinds {
        let mut sites = candidate_sites(&dec.tri, kind);
        sites.shuffle(rng);
        for mv in sites {
            if let Ok(a) = apply(dec, &mv) {
                return Some((mv, a));
            }
        }
    }
    None
}

fn move_round_trips() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bases = [fixtures::figure_eight(), fixtures::gieseking(), fixtures::two_cusp(), fixtures::fold_ready()];
    let mut pairs = 0;
    let mut per_kind = [0usize; 8];
    while pairs < 1000 {
        let mut dec = Decorated::plain(bases[pairs % bases.len()].clone());
        for _ in 0..rng.gen_range(0..6) {
            if let Some((_, a)) = random_move(&dec, &mut rng) {
                dec = a.result;
            }
        }
        let Some((mv, done)) = random_move(&dec, &mut rng) else { continue };
        let kind = mv.kind();
        let dn = done.result.tri.size() as i64 - dec.tri.size() as i64;
        ensure!(dn == kind.delta(), "{mv}: size changed by {dn}, table says {}", kind.delta());
        let inv = done.inverse.ok_or_else(|| format!("{mv} has no inverse"))?;
        let back = apply(&done.result, &inv).map_err(|e| format!("{mv} then {inv}: {e}"))?;
        let dn_back = back.result.tri.size() as i64 - done.result.tri.size() as i64;
        ensure!(dn_back == inv.kind().delta(), "{inv}: size changed by {dn_back}");
        ensure!(isosig(&back.result.tri) == isosig(&dec.tri), "{mv} then {inv} changed the signature");
        per_kind[ROUND_TRIP_KINDS.iter().position(|k| *k == kind).unwrap()] += 1;
        pairs += 1;
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(30), "took {took:?}");
    Ok(format!("{pairs} pairs, per kind {per_kind:?}, {:.1} s", took.as_secs_f64()))
}

fn recover_rho() -> Outcome {
    let base = geometric(&fixtures::figure_eight());
    let mut cases = vec![base.clone()];
    for seed in 0..10 {
        let (dec, moves) = scramble(&base, 4, &Filter::Labels { tol: 1e-6 }, 100 + seed).map_err(|e| e.to_string())?;
        ensure!(!moves.is_empty(), "scramble {seed} made no move");
        cases.push(dec);
    }
    let (mut worst_eq, mut worst_back): (f64, f64) = (0.0, 0.0);
    for (i, dec) in cases.iter().enumerate() {
        let tri = &dec.tri;
        let sys = gluing_system(tri).map_err(|e| e.to_string())?;
        let start = shapes_from_labels(dec).map_err(|e| e.to_string())?;
        let z = solve(&sys, &SolveOptions { start: Some(start), ..Default::default() })
            .map_err(|f| format!("case {i}: no solution ({f:?})"))?
            .shapes;
        let rep = holonomy_from_shapes(tri, &z).map_err(|e| e.to_string())?;
        let developed = develop_labels(tri, &rep).map_err(|e| e.to_string())?;
        let back = shapes_from_labels(&developed.dec).map_err(|e| e.to_string())?;
        worst_eq = worst_eq.max(sys.product_residual(&back, false));
        for (a, b) in back.z.iter().zip(&z.z) {
            worst_back = worst_back.max((a - b).norm());
        }
    }
    ensure!(worst_eq < 1e-9, "edge equations off by {worst_eq:e}");
    ensure!(worst_back < 1e-9, "shapes off by {worst_back:e}");
    Ok(format!("{} triangulations, edge residual {worst_eq:.1e}, shape drift {worst_back:.1e}", cases.len()))
}

fn pipeline() -> Outcome {
    let start = Instant::now();
    let tri = fixtures::figure_eight();
    let dec = geometric(&tri);
    let built = build_essential(&dec, &SearchLimits::default()).map_err(|e| e.to_string())?;
    let out = &built.dec.tri;
    ensure!(out.material_vertices().is_empty(), "material vertices left");
    let report = l_essential_check(&built.dec, 1e-6).map_err(|e| e.to_string())?;
    ensure!(report.is_essential(), "inessential edges {:?}", report.inessential());
    let (h0, h1) = (homology(&tri).unwrap(), homology(out).unwrap());
    ensure!(h0 == h1 && h1.to_string() == "Z", "H1 {h0} -> {h1}");
    let sys = gluing_system(out).map_err(|e| e.to_string())?;
    let seed = shapes_from_labels(&built.dec).map_err(|e| e.to_string())?;
    let sol = solve(&sys, &SolveOptions { start: Some(seed), ..Default::default() }).map_err(|f| format!("{f:?}"))?;
    let vol = volume(&sol.shapes).map_err(|e| e.to_string())?;
    let oracle = 2.0 * clausen_pi_3();
    ensure!((vol - oracle).abs() < 1e-8, "volume {vol} vs {oracle}");
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(300), "took {took:?}");
    Ok(format!(
        "{} inflations, {} tetrahedra, H1 {h1}, volume {vol:.10}, {:.1} s",
        built.log.len(),
        out.size(),
        took.as_secs_f64()
    ))
}

fn connectivity() -> Outcome {
    let filter = Filter::Labels { tol: 1e-6 };
    let base = geometric(&fixtures::figure_eight());
    let mut lengths = Vec::new();
    let mut nodes_used = Vec::new();
    for seed in 0..5 {
        let (target, moves) = scramble(&base, 6, &filter, seed).map_err(|e| e.to_string())?;
        ensure!(moves.len() == 6, "scramble {seed} stopped after {} moves", moves.len());
        match connect(&base, &target, &filter, 200_000).map_err(|e| e.to_string())? {
            Connection::Found { moves, nodes } => {
                let mut cur = base.clone();
                for mv in &moves {
                    cur = apply(&cur, mv).map_err(|e| format!("replay {mv}: {e}"))?.result;
                    ensure!(filter.accepts(&cur), "seed {seed}: intermediate after {mv} not essential");
                }
                ensure!(isosig(&cur.tri) == isosig(&target.tri), "seed {seed}: replay ends elsewhere");
                lengths.push(moves.len());
                nodes_used.push(nodes);
            }
            Connection::Exhausted { nodes, budget } => {
                return Err(format!("seed {seed}: exhausted after {nodes} of {budget} nodes"));
            }
        }
    }
    Ok(format!("path lengths {lengths:?}, nodes {nodes_used:?}"))
}

fn m(a: (f64, f64), b: (f64, f64), cc: (f64, f64), d: (f64, f64)) -> Mat2 {
    Mat2::new(c(a.0, a.1), c(b.0, b.1), c(cc.0, cc.1), c(d.0, d.1))
}

fn non_anchorable() -> Outcome {
    let x = m((0.0, 1.0), (0.0, 0.0), (0.0, 0.0), (0.0, -1.0));
    let y = m((0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 0.0));
    ensure!(
        matches!(anchorability(&[x, y], 1e-9), Ok(Anchorability::NonAnchorable(_))),
        "K4 pair not flagged"
    );
    let p = m((1.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0, 0.0));
    let q = m((1.0, 0.0), (-2.0, 0.5), (0.0, 0.0), (1.0, 0.0));
    match anchorability(&[p, q], 1e-9) {
        Ok(Anchorability::Anchorable(FixedSet::Points(pts))) if pts.len() == 1 && pts[0].is_infinity(1e-9) => {}
        other => return Err(format!("parabolics gave {other:?}")),
    }
    let pres = WordPresentation::from_json(fixtures::M367).map_err(|e| e.to_string())?;
    let rep = Representation::from_json(fixtures::K4_REP).map_err(|e| e.to_string())?;
    let ver = pres.verify(&rep).map_err(|e| e.to_string())?;
    ensure!(ver.pass, "relator residual {:e}", ver.worst_residual);
    for cusp in 0..pres.cusps.len() {
        let ims = pres.peripheral_images(&rep, cusp).map_err(|e| e.to_string())?;
        ensure!(
            matches!(anchorability(&ims, 1e-9), Ok(Anchorability::NonAnchorable(_))),
            "m367 cusp {cusp} not flagged"
        );
    }
    Ok(format!("K4 witness found, parabolics fix one point, m367 relator residual {:.1e}", ver.worst_residual))
}

fn certificate() -> Outcome {
    let tri = fixtures::figure_eight();
    let z = solve(&gluing_system(&tri).unwrap(), &SolveOptions::default()).unwrap().shapes;
    let rep = holonomy_from_shapes(&tri, &z).map_err(|e| e.to_string())?;
    let tree = DualTree::standard(&tri);
    let images = rep.images_for(tree.generators.len()).map_err(|e| e.to_string())?;
    let periph = peripheral_images(&tri, &tree, &images, 0);
    let (mu, lambda) = (periph[0], periph[1]);
    let mut cands = images.clone();
    for a in &images {
        for b in &images {
            cands.push(*a * *b);
        }
    }
    let gamma = cands
        .into_iter()
        .find(|g| {
            let t = g.normalized().trace();
            (t * t - 4.0).norm() > 0.1 && !g.commutator(&mu).is_identity(1e-6)
        })
        .ok_or("no loxodromic auxiliary element")?;
    let cert = infinitely_anchorable_certificate(&mu, &lambda, &gamma, 1e-6);
    ensure!(cert.passed(), "geometric data fails {:?}", cert.first_failure());
    let fails = |mu: &Mat2, lambda: &Mat2, gamma: &Mat2| -> Vec<Family> {
        infinitely_anchorable_certificate(mu, lambda, gamma, 1e-6).checks.iter().filter(|c| !c.pass).map(|c| c.family).collect()
    };
    let par = m((1.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0, 0.0));
    let examples = [
        (Family::NoInvolutions, fails(&m((0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 0.0)), &lambda, &gamma)),
        (Family::NoCommutation1, fails(&mu, &lambda, &(mu * mu))),
        (Family::GammaNotParabolic, fails(&mu, &lambda, &m((1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (1.0, 0.0)))),
        (Family::NoCommutation2, fails(&par, &par, &m((2.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.5, 0.0)))),
        (Family::NoTorsion, fails(&m((0.0, 0.0), (-1.0, 0.0), (1.0, 0.0), (1.0, 0.0)), &lambda, &gamma)),
    ];
    for (family, failed) in &examples {
        ensure!(failed.contains(family), "{family} example failed only {failed:?}");
    }
    Ok(format!("{} checks pass on geometric data, 5 targeted failures", cert.checks.len()))
}

fn fold_fill() -> Outcome {
    let tri = fixtures::fold_ready();
    let before = homology(&tri).map_err(|e| e.to_string())?;
    let pres = Presentation::new(&tri);
    let matrix = pres.relation_matrix();
    let cusp = 1;
    let (t1, c1) = tri.vertices()[cusp].corners[0];
    let ab = |f: u8| abelianize(&pres.tree.word_of_crossings(&[(t1, f)]), pres.generators);
    let mut seen = Vec::new();
    for diagonal in 0..3u8 {
        let out = apply(&Decorated::plain(tri.clone()), &Move::FoldFill { cusp, diagonal })
            .map_err(|e| format!("diagonal {diagonal}: {e}"))?
            .result
            .tri;
        ensure!(out.size() + 2 == tri.size(), "size {} -> {}", tri.size(), out.size());
        ensure!(
            out.ideal_vertices().len() + 1 == tri.ideal_vertices().len(),
            "ideal vertices {} -> {}",
            tri.ideal_vertices().len(),
            out.ideal_vertices().len()
        );
        ensure!(out.is_connected() && out.is_oriented(), "output not a connected oriented triangulation");
        let fold = tri_core::perm::face_corners(c1)[diagonal as usize];
        let others: Vec<u8> = (0..4u8).filter(|&f| f != c1 && f != fold).collect();
        let (e, g, h) = (ab(fold), ab(others[0]), ab(others[1]));
        let killed: Vec<i64> = (0..pres.generators).map(|i| 2 * e[i] - g[i] - h[i]).collect();
        let mut filled = matrix.clone();
        filled.push(killed);
        let expected = homology_of_matrix(&filled, pres.generators);
        let after = homology(&out).map_err(|e| e.to_string())?;
        ensure!(after == expected, "diagonal {diagonal}: H1 {after}, Smith oracle {expected}");
        seen.push(after.to_string());
    }
    Ok(format!("H1 {before} -> {}", seen.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("figure-eight shapes", figure_eight_shapes),
        ("volume", volume_value),
        ("move round trips", move_round_trips),
        ("labels and shapes both ways", recover_rho),
        ("essential triangulation pipeline", pipeline),
        ("connectivity with 0-2 moves", connectivity),
        ("non-anchorable peripheral images", non_anchorable),
        ("trace certificate", certificate),
        ("fold filling", fold_fill),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} [{secs:.1} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why} [{secs:.1} s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
