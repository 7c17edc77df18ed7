//! Representations into PSL(2, C), anchors, developed corner labels and essentiality.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cusp::link_loops;
use crate::homology::{DualTree, Letter, Presentation};
use crate::mobius::{c, fixed_points, Cp1, FixedSet, Mat2, C};
use crate::surgery::{Decorated, Frames};
use crate::triangulation::{Triangulation, VertexKind};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HolonomyError {
    #[error("representation json: {0}")]
    Json(String),
    #[error("no image given for generator {0}")]
    MissingGenerator(String),
    #[error("unknown letter {0:?} in word")]
    UnknownLetter(char),
    #[error("peripheral images do not commute")]
    NonAbelian,
    #[error("cusp {cusp} is not anchorable")]
    NonAnchorable { cusp: usize },
    #[error("anchor given for cusp {cusp} is not fixed by its peripheral images")]
    AnchorNotFixed { cusp: usize },
    #[error("corner {corner} of tetrahedron {tet} carries no label")]
    Unlabelled { tet: usize, corner: u8 },
    #[error("fixed set is empty but no Klein four witness was found")]
    NoWitness,
}

pub fn generator_name(i: usize) -> String {
    format!("g{i}")
}

/// A homomorphism to PSL(2, C), given on named generators, with optional cusp anchors.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    pub generators: BTreeMap<String, Mat2>,
    pub anchors: BTreeMap<usize, Cp1>,
    pub tolerance: f64,
}

type MatJson = [[[f64; 2]; 2]; 2];

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AnchorJson {
    Point([f64; 2]),
    Named(String),
}

#[derive(Serialize, Deserialize)]
struct RepJson {
    generators: BTreeMap<String, MatJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    anchors: BTreeMap<String, AnchorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
}

fn mat_from_json(m: &MatJson) -> Mat2 {
    let e = |p: [f64; 2]| c(p[0], p[1]);
    Mat2::new(e(m[0][0]), e(m[0][1]), e(m[1][0]), e(m[1][1]))
}

fn mat_to_json(m: &Mat2) -> MatJson {
    let e = |z: C| [z.re, z.im];
    [[e(m.a), e(m.b)], [e(m.c), e(m.d)]]
}

impl Representation {
    /// Every generator sent to the identity.
    pub fn trivial(generators: usize) -> Representation {
        Representation {
            generators: (0..generators).map(|i| (generator_name(i), Mat2::IDENTITY)).collect(),
            anchors: BTreeMap::new(),
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn from_json(text: &str) -> Result<Representation, HolonomyError> {
        let raw: RepJson = serde_json::from_str(text).map_err(|e| HolonomyError::Json(e.to_string()))?;
        let mut anchors = BTreeMap::new();
        for (k, v) in raw.anchors {
            let cusp: usize = k.parse().map_err(|_| HolonomyError::Json(format!("bad cusp key {k:?}")))?;
            let p = match v {
                AnchorJson::Point([re, im]) => Cp1::finite(c(re, im)),
                AnchorJson::Named(s) if s == "infinity" => Cp1::INFINITY,
                AnchorJson::Named(s) => return Err(HolonomyError::Json(format!("bad anchor {s:?}"))),
            };
            anchors.insert(cusp, p);
        }
        Ok(Representation {
            generators: raw.generators.iter().map(|(k, m)| (k.clone(), mat_from_json(m).normalized())).collect(),
            anchors,
            tolerance: raw.tolerance.unwrap_or(DEFAULT_TOLERANCE),
        })
    }

    pub fn to_json(&self) -> String {
        let raw = RepJson {
            generators: self.generators.iter().map(|(k, m)| (k.clone(), mat_to_json(m))).collect(),
            anchors: self
                .anchors
                .iter()
                .map(|(k, p)| {
                    let a = match p.to_complex(1e-300) {
                        Some(z) => AnchorJson::Point([z.re, z.im]),
                        None => AnchorJson::Named("infinity".into()),
                    };
                    (k.to_string(), a)
                })
                .collect(),
            tolerance: Some(self.tolerance),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }

    pub fn image(&self, name: &str) -> Result<Mat2, HolonomyError> {
        self.generators.get(name).copied().ok_or_else(|| HolonomyError::MissingGenerator(name.to_string()))
    }

    /// Images of a triangulation presentation's generators `g0, g1, ...`.
    pub fn images_for(&self, generators: usize) -> Result<Vec<Mat2>, HolonomyError> {
        (0..generators).map(|i| self.image(&generator_name(i))).collect()
    }

    /// Word in single-letter generators; upper case is the inverse.
    pub fn eval_letters(&self, word: &str) -> Result<Mat2, HolonomyError> {
        let mut m = Mat2::IDENTITY;
        for ch in word.chars() {
            let lower = ch.to_ascii_lowercase().to_string();
            let g = self.generators.get(&lower).ok_or(HolonomyError::UnknownLetter(ch))?;
            m = m * if ch.is_ascii_uppercase() { g.inv() } else { *g };
        }
        Ok(m)
    }
}

pub fn eval_word(word: &[Letter], images: &[Mat2]) -> Mat2 {
    word.iter().fold(Mat2::IDENTITY, |m, l| m * letter_image(*l, images))
}

fn letter_image(l: Letter, images: &[Mat2]) -> Mat2 {
    if l.inverse {
        images[l.gen].inv()
    } else {
        images[l.gen]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verification {
    pub pass: bool,
    pub worst_residual: f64,
}

fn verify_matrices(products: impl Iterator<Item = Mat2>, tol: f64) -> Verification {
    let worst = products.map(|m| m.normalized().psl_distance(&Mat2::IDENTITY)).fold(0.0, f64::max);
    Verification { pass: worst <= tol, worst_residual: worst }
}

/// Checks that every relator of the triangulation presentation maps to ±I.
pub fn verify_representation(p: &Presentation, rep: &Representation) -> Result<Verification, HolonomyError> {
    let images = rep.images_for(p.generators)?;
    Ok(verify_matrices(p.relators.iter().map(|w| eval_word(w, &images)), rep.tolerance))
}

/// A presentation written with letter words, as in the shipped `m367.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WordPresentation {
    pub generators: Vec<String>,
    pub relators: Vec<String>,
    #[serde(default)]
    pub cusps: Vec<CuspWords>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CuspWords {
    pub meridian: String,
    pub longitude: String,
}

impl WordPresentation {
    pub fn from_json(text: &str) -> Result<WordPresentation, HolonomyError> {
        serde_json::from_str(text).map_err(|e| HolonomyError::Json(e.to_string()))
    }

    pub fn verify(&self, rep: &Representation) -> Result<Verification, HolonomyError> {
        let ms = self.relators.iter().map(|w| rep.eval_letters(w)).collect::<Result<Vec<_>, _>>()?;
        Ok(verify_matrices(ms.into_iter(), rep.tolerance))
    }

    pub fn peripheral_images(&self, rep: &Representation, cusp: usize) -> Result<Vec<Mat2>, HolonomyError> {
        let cw = &self.cusps[cusp];
        Ok(vec![rep.eval_letters(&cw.meridian)?, rep.eval_letters(&cw.longitude)?])
    }
}

/// Three commuting involutions `a`, `b`, `ab`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct K4Witness {
    pub a: Mat2,
    pub b: Mat2,
    pub ab: Mat2,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Anchorability {
    Anchorable(FixedSet),
    NonAnchorable(K4Witness),
}

fn fixes(m: &Mat2, p: &Cp1, tol: f64) -> bool {
    m.apply(p).chordal(p) <= tol.sqrt()
}

/// Common fixed points of commuting peripheral images.
pub fn anchorability(images: &[Mat2], tol: f64) -> Result<Anchorability, HolonomyError> {
    let ms: Vec<Mat2> = images.iter().map(|m| m.normalized()).collect();
    for (i, a) in ms.iter().enumerate() {
        for b in &ms[i + 1..] {
            if !a.commutator(b).is_identity(tol.sqrt()) {
                return Err(HolonomyError::NonAbelian);
            }
        }
    }
    let nontrivial: Vec<Mat2> = ms.iter().filter(|m| !m.is_identity(tol)).copied().collect();
    let Some(first) = nontrivial.first() else {
        return Ok(Anchorability::Anchorable(FixedSet::All));
    };
    let FixedSet::Points(cands) = fixed_points(first, tol) else {
        unreachable!("non-identity element fixes a finite set")
    };
    let common: Vec<Cp1> = cands.into_iter().filter(|p| nontrivial.iter().all(|m| fixes(m, p, tol))).collect();
    if !common.is_empty() {
        return Ok(Anchorability::Anchorable(FixedSet::Points(common)));
    }
    let zero_trace = |m: &Mat2| m.trace().norm() <= tol.sqrt();
    for (i, a) in nontrivial.iter().enumerate() {
        for b in &nontrivial[i + 1..] {
            let ab = *a * *b;
            if zero_trace(a) && zero_trace(b) && zero_trace(&ab) && !ab.is_identity(tol.sqrt()) {
                return Ok(Anchorability::NonAnchorable(K4Witness { a: *a, b: *b, ab }));
            }
        }
    }
    Err(HolonomyError::NoWitness)
}

/// Images of the link loops of `vertex`, read through `tree`.
pub fn peripheral_images(tri: &Triangulation, tree: &DualTree, images: &[Mat2], vertex: usize) -> Vec<Mat2> {
    link_loops(tri, vertex)
        .iter()
        .map(|lp| {
            let cr: Vec<(usize, u8)> = lp.iter().map(|x| (x.tet, x.face)).collect();
            eval_word(&tree.word_of_crossings(&cr), images)
        })
        .collect()
}

/// Developed labels on every ideal corner with the frames used to develop them.
#[derive(Clone, Debug)]
pub struct CornerLabels {
    pub dec: Decorated,
    pub tree: DualTree,
    /// Label of each vertex class's first corner; `None` for material vertices.
    pub anchors: Vec<Option<Cp1>>,
}

/// Face matrices in the tree gauge: identity on tree faces, the inverse image of the
/// generator read when leaving through a face otherwise.
pub fn tree_frames(tri: &Triangulation, tree: &DualTree, images: &[Mat2]) -> Vec<[Mat2; 4]> {
    (0..tri.size())
        .map(|t| {
            let mut g = [Mat2::IDENTITY; 4];
            for f in 0..4u8 {
                if let Some(l) = tree.crossing(t, f) {
                    g[f as usize] = letter_image(l, images).inv();
                }
            }
            g
        })
        .collect()
}

pub fn develop_labels(tri: &Triangulation, rep: &Representation) -> Result<CornerLabels, HolonomyError> {
    develop_labels_with_tree(tri, rep, DualTree::standard(tri))
}

/// Anchors each cusp (user anchor, else first fixed point, else the cusp index) and
/// transports it to every corner of the cusp.
pub fn develop_labels_with_tree(
    tri: &Triangulation,
    rep: &Representation,
    tree: DualTree,
) -> Result<CornerLabels, HolonomyError> {
    let images = rep.images_for(tree.generators.len())?;
    let tol = rep.tolerance;
    let g = tree_frames(tri, &tree, &images);
    let mut labels = vec![[None; 4]; tri.size()];
    let mut anchors = Vec::new();
    for v in tri.vertices() {
        if v.kind == VertexKind::Material {
            anchors.push(None);
            continue;
        }
        let per = peripheral_images(tri, &tree, &images, v.id);
        let anchor = match rep.anchors.get(&v.id) {
            Some(p) => {
                if !per.iter().all(|m| fixes(&m.normalized(), p, tol)) {
                    return Err(HolonomyError::AnchorNotFixed { cusp: v.id });
                }
                *p
            }
            None => match anchorability(&per, tol)? {
                Anchorability::Anchorable(FixedSet::All) => Cp1::finite(c(v.id as f64, 0.0)),
                Anchorability::Anchorable(FixedSet::Points(p)) => p[0],
                Anchorability::NonAnchorable(_) => return Err(HolonomyError::NonAnchorable { cusp: v.id }),
            },
        };
        let anchor = anchor.normalized();
        anchors.push(Some(anchor));
        let base = v.corners[0];
        labels[base.0][base.1 as usize] = Some(anchor);
        let mut queue = VecDeque::from([base]);
        while let Some((t, w)) = queue.pop_front() {
            let l = labels[t][w as usize].unwrap();
            for f in (0..4u8).filter(|&f| f != w) {
                let gl = tri.gluing(t, f);
                let u = gl.perm.apply(w);
                if labels[gl.tet][u as usize].is_none() {
                    labels[gl.tet][u as usize] = Some(g[t][f as usize].apply(&l).normalized());
                    queue.push_back((gl.tet, u));
                }
            }
        }
    }
    let dec = Decorated { tri: tri.clone(), frames: Some(Frames { g, labels }) };
    Ok(CornerLabels { dec, tree, anchors })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeVerdict {
    pub edge: usize,
    pub essential: bool,
    /// Every incidence gave the same answer.
    pub consistent: bool,
    pub material_loop: bool,
    /// Smallest chordal distance between the end labels over incidences.
    pub separation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssentialReport {
    pub edges: Vec<EdgeVerdict>,
    /// Tetrahedra with two equal corner labels.
    pub degenerate: Vec<usize>,
}

impl EssentialReport {
    pub fn is_essential(&self) -> bool {
        self.edges.iter().all(|e| e.essential)
    }

    pub fn inessential(&self) -> Vec<usize> {
        self.edges.iter().filter(|e| !e.essential).map(|e| e.edge).collect()
    }
}

/// Compares the labels at the two ends of every edge incidence.
pub fn l_essential_check(dec: &Decorated, tol: f64) -> Result<EssentialReport, HolonomyError> {
    let tri = &dec.tri;
    let mut degenerate = Vec::new();
    let mut edges = Vec::new();
    for e in tri.edges() {
        let material_loop = e.is_loop() && tri.vertices()[e.ends.0].kind == VertexKind::Material;
        let mut verdicts = Vec::new();
        let mut separation: Option<f64> = None;
        for s in &e.steps {
            let ka = tri.corner_kind(s.tet, s.a);
            let kb = tri.corner_kind(s.tet, s.b);
            if ka == VertexKind::Ideal && kb == VertexKind::Ideal {
                let la = dec.label(s.tet, s.a).ok_or(HolonomyError::Unlabelled { tet: s.tet, corner: s.a })?;
                let lb = dec.label(s.tet, s.b).ok_or(HolonomyError::Unlabelled { tet: s.tet, corner: s.b })?;
                let d = la.chordal(&lb);
                separation = Some(separation.map_or(d, |x: f64| x.min(d)));
                let same = d <= tol;
                if same && !degenerate.contains(&s.tet) {
                    degenerate.push(s.tet);
                }
                verdicts.push(!same);
            } else {
                verdicts.push(true);
            }
        }
        let consistent = verdicts.iter().all(|&v| v == verdicts[0]);
        let essential = !material_loop && verdicts.iter().all(|&v| v);
        edges.push(EdgeVerdict { edge: e.id, essential, consistent, material_loop, separation });
    }
    degenerate.sort_unstable();
    Ok(EssentialReport { edges, degenerate })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    NoInvolutions,
    NoCommutation1,
    GammaNotParabolic,
    NoCommutation2,
    NoTorsion,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub family: Family,
    pub element: &'static str,
    /// Squared trace, as `[re, im]`.
    pub value: [f64; 2],
    pub forbidden: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub margin: f64,
    pub checks: Vec<Check>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

fn tr2(m: &Mat2) -> C {
    let t = m.normalized().trace();
    t * t
}

/// Squared-trace inequalities which together guarantee infinitely many anchor choices.
pub fn infinitely_anchorable_certificate(mu: &Mat2, lambda: &Mat2, gamma: &Mat2, margin: f64) -> Certificate {
    let (mu, lambda, gamma) = (mu.normalized(), lambda.normalized(), gamma.normalized());
    let mut checks = Vec::new();
    let mut push = |family, element, m: Mat2, forbidden: f64| {
        let v = tr2(&m);
        checks.push(Check { family, element, value: [v.re, v.im], forbidden, pass: (v - forbidden).norm() > margin });
    };
    push(Family::NoInvolutions, "mu", mu, 0.0);
    push(Family::NoInvolutions, "lambda", lambda, 0.0);
    push(Family::NoInvolutions, "gamma", gamma, 0.0);
    push(Family::NoCommutation1, "[mu, gamma]", mu.commutator(&gamma), 4.0);
    push(Family::NoCommutation1, "[lambda, gamma]", lambda.commutator(&gamma), 4.0);
    push(Family::GammaNotParabolic, "gamma", gamma, 4.0);
    let conj = |x: &Mat2| gamma * *x * gamma.inv();
    push(Family::NoCommutation2, "[mu, gamma mu gamma^-1]", mu.commutator(&conj(&mu)), 4.0);
    push(Family::NoCommutation2, "[lambda, gamma lambda gamma^-1]", lambda.commutator(&conj(&lambda)), 4.0);
    for n in [3u32, 4, 5] {
        let r = 4.0 * (std::f64::consts::PI / n as f64).cos().powi(2);
        push(Family::NoTorsion, "mu", mu, r);
        push(Family::NoTorsion, "lambda", lambda, r);
        push(Family::NoTorsion, "gamma", gamma, r);
    }
    Certificate { margin, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn k4_pair_has_no_common_fixed_point() {
        let rep = Representation::from_json(fixtures::K4_REP).unwrap();
        let ims = [rep.image("a").unwrap(), rep.image("b").unwrap()];
        match anchorability(&ims, 1e-9).unwrap() {
            Anchorability::NonAnchorable(w) => {
                assert!(w.ab.trace().norm() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rep = Representation::from_json(fixtures::K4_REP).unwrap();
        rep.anchors.insert(0, Cp1::INFINITY);
        rep.anchors.insert(1, Cp1::finite(c(0.5, -2.0)));
        let back = Representation::from_json(&rep.to_json()).unwrap();
        assert_eq!(back.generators, rep.generators);
        assert!(back.anchors[&0].is_infinity(1e-12));
        assert!(back.anchors[&1].close(&rep.anchors[&1], 1e-15));
    }
}
