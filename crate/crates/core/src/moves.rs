//! Elementary moves: 2-3, 3-2, 0-2, 2-0, bubble, reverse bubble, 1-4, 4-1 and fold filling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::TriError;
use crate::mobius::Mat2;
use crate::perm::{face_corners, Perm};
use crate::surgery::{Decorated, End, Outcome, Source, Surgery, SurgeryFailure};
use crate::triangulation::{EdgeStep, Triangulation, VertexKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    TwoThree,
    ThreeTwo,
    ZeroTwo,
    TwoZero,
    Bubble,
    ReverseBubble,
    OneFour,
    FourOne,
    FoldFill,
}

impl MoveKind {
    pub const ALL: [MoveKind; 9] = [
        MoveKind::TwoThree,
        MoveKind::ThreeTwo,
        MoveKind::ZeroTwo,
        MoveKind::TwoZero,
        MoveKind::Bubble,
        MoveKind::ReverseBubble,
        MoveKind::OneFour,
        MoveKind::FourOne,
        MoveKind::FoldFill,
    ];

    /// Change in the number of tetrahedra.
    pub fn delta(self) -> i64 {
        match self {
            MoveKind::TwoThree => 1,
            MoveKind::ThreeTwo => -1,
            MoveKind::ZeroTwo => 2,
            MoveKind::TwoZero => -2,
            MoveKind::Bubble => 2,
            MoveKind::ReverseBubble => -2,
            MoveKind::OneFour => 3,
            MoveKind::FourOne => -3,
            MoveKind::FoldFill => -2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::TwoThree => "two_three",
            MoveKind::ThreeTwo => "three_two",
            MoveKind::ZeroTwo => "zero_two",
            MoveKind::TwoZero => "two_zero",
            MoveKind::Bubble => "bubble",
            MoveKind::ReverseBubble => "reverse_bubble",
            MoveKind::OneFour => "one_four",
            MoveKind::FourOne => "four_one",
            MoveKind::FoldFill => "fold_fill",
        }
    }
}

impl FromStr for MoveKind {
    type Err = MoveError;

    fn from_str(s: &str) -> Result<MoveKind, MoveError> {
        let norm = s.replace('-', "_");
        MoveKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| MoveError::BadSite(format!("unknown move kind `{s}`")))
    }
}

/// A move together with its site in a particular triangulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Move {
    TwoThree { tet: usize, face: u8 },
    ThreeTwo { edge: usize },
    /// Positions `i`, `j` index the triangles around `edge`.
    ZeroTwo { edge: usize, i: usize, j: usize },
    TwoZero { edge: usize },
    Bubble { tet: usize, face: u8 },
    ReverseBubble { vertex: usize },
    OneFour { tet: usize },
    FourOne { vertex: usize },
    /// `diagonal` picks which corner of the first boundary triangle leaves the fold line.
    FoldFill { cusp: usize, diagonal: u8 },
}

impl Move {
    pub fn kind(&self) -> MoveKind {
        match self {
            Move::TwoThree { .. } => MoveKind::TwoThree,
            Move::ThreeTwo { .. } => MoveKind::ThreeTwo,
            Move::ZeroTwo { .. } => MoveKind::ZeroTwo,
            Move::TwoZero { .. } => MoveKind::TwoZero,
            Move::Bubble { .. } => MoveKind::Bubble,
            Move::ReverseBubble { .. } => MoveKind::ReverseBubble,
            Move::OneFour { .. } => MoveKind::OneFour,
            Move::FourOne { .. } => MoveKind::FourOne,
            Move::FoldFill { .. } => MoveKind::FoldFill,
        }
    }

    /// Site in the compact form accepted by [`Move::parse`].
    pub fn site(&self) -> String {
        match *self {
            Move::TwoThree { tet, face } | Move::Bubble { tet, face } => format!("t{tet}f{face}"),
            Move::ThreeTwo { edge } | Move::TwoZero { edge } => format!("e{edge}"),
            Move::ZeroTwo { edge, i, j } => format!("e{edge}:{i}:{j}"),
            Move::ReverseBubble { vertex } | Move::FourOne { vertex } => format!("v{vertex}"),
            Move::OneFour { tet } => format!("t{tet}"),
            Move::FoldFill { cusp, diagonal } => format!("v{cusp}:{diagonal}"),
        }
    }

    /// Parses a site such as `t0f1`, `e3`, `e3:0:2`, `v1`, `t2` or `v0:1`.
    pub fn parse(kind: MoveKind, site: &str) -> Result<Move, MoveError> {
        let bad = || MoveError::BadSite(format!("bad site `{site}` for {}", kind.name()));
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
        let tet_face = || -> Result<(usize, u8), MoveError> {
            let rest = site.strip_prefix('t').ok_or_else(bad)?;
            let (t, f) = rest.split_once('f').ok_or_else(bad)?;
            let f = num(f)?;
            if f > 3 {
                return Err(bad());
            }
            Ok((num(t)?, f as u8))
        };
        let parts: Vec<&str> = site.split(':').collect();
        let head = |prefix: char| -> Result<usize, MoveError> {
            num(parts[0].strip_prefix(prefix).ok_or_else(bad)?)
        };
        Ok(match kind {
            MoveKind::TwoThree => {
                let (tet, face) = tet_face()?;
                Move::TwoThree { tet, face }
            }
            MoveKind::Bubble => {
                let (tet, face) = tet_face()?;
                Move::Bubble { tet, face }
            }
            MoveKind::ThreeTwo if parts.len() == 1 => Move::ThreeTwo { edge: head('e')? },
            MoveKind::TwoZero if parts.len() == 1 => Move::TwoZero { edge: head('e')? },
            MoveKind::ZeroTwo if parts.len() == 3 => {
                Move::ZeroTwo { edge: head('e')?, i: num(parts[1])?, j: num(parts[2])? }
            }
            MoveKind::ReverseBubble if parts.len() == 1 => Move::ReverseBubble { vertex: head('v')? },
            MoveKind::FourOne if parts.len() == 1 => Move::FourOne { vertex: head('v')? },
            MoveKind::OneFour if parts.len() == 1 => Move::OneFour { tet: head('t')? },
            MoveKind::FoldFill if parts.len() <= 2 => {
                let diagonal = if parts.len() == 2 { num(parts[1])? } else { 0 };
                if diagonal > 2 {
                    return Err(bad());
                }
                Move::FoldFill { cusp: head('v')?, diagonal: diagonal as u8 }
            }
            _ => return Err(bad()),
        })
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind().name(), self.site())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoveError {
    #[error("{0}")]
    BadSite(String),
    #[error("tetrahedron {0} does not exist")]
    NoSuchTet(usize),
    #[error("edge class {0} does not exist")]
    NoSuchEdge(usize),
    #[error("vertex class {0} does not exist")]
    NoSuchVertex(usize),
    #[error("both sides of face {face} of tetrahedron {tet} lie in one tetrahedron (dual edge loop)")]
    SelfAdjacent { tet: usize, face: u8 },
    #[error("edge {edge} has degree {degree}, expected {expected}")]
    WrongDegree { edge: usize, degree: usize, expected: usize },
    #[error("edge {edge} meets some tetrahedron more than once")]
    RepeatedTetrahedron { edge: usize },
    #[error("edge {edge}: surrounding configuration is not embedded")]
    NotEmbedded { edge: usize },
    #[error("positions {i} and {j} around edge {edge} are invalid (degree {degree})")]
    BadPositions { edge: usize, i: usize, j: usize, degree: usize },
    #[error("positions {i} and {j} around edge {edge} are the same triangle")]
    SameTriangle { edge: usize, i: usize, j: usize },
    #[error("only {0} tetrahedra; 2-0 needs more than two")]
    TooFewTetrahedra(usize),
    #[error("the faces that would merge around edge {edge} are already the same face")]
    MergingFacesCoincide { edge: usize },
    #[error("the two edges opposite edge {edge} are already the same edge")]
    OppositeEdgesCoincide { edge: usize },
    #[error("vertex {vertex} is {found}, expected {expected}")]
    WrongVertexKind { vertex: usize, found: &'static str, expected: &'static str },
    #[error("vertex {vertex}: {reason}")]
    PatternMismatch { vertex: usize, reason: String },
    #[error("result is degenerate: {0}")]
    Degenerate(TriError),
}

impl From<SurgeryFailure> for MoveError {
    fn from(f: SurgeryFailure) -> MoveError {
        match f {
            SurgeryFailure::Invalid(e) => MoveError::Degenerate(e),
            SurgeryFailure::Unresolved(t, face) => MoveError::Degenerate(TriError::Dangling { tet: t, face }),
            SurgeryFailure::NoTetrahedra => MoveError::Degenerate(TriError::Empty),
        }
    }
}

/// Result of a move, with the descriptor that undoes it when one exists.
#[derive(Clone, Debug)]
pub struct Applied {
    pub result: Decorated,
    pub inverse: Option<Move>,
}

fn old(tet: usize, corner: u8, frame: Mat2) -> Source {
    Source::Old { tet, corner, frame }
}

fn perm(images: [u8; 4]) -> Perm {
    Perm::new(images).expect("valid permutation")
}

fn check_tet(tri: &Triangulation, tet: usize, face: u8) -> Result<(), MoveError> {
    if tet >= tri.size() {
        return Err(MoveError::NoSuchTet(tet));
    }
    if face > 3 {
        return Err(MoveError::BadSite(format!("face {face} out of range")));
    }
    Ok(())
}

fn check_edge(tri: &Triangulation, edge: usize) -> Result<(), MoveError> {
    if edge >= tri.edges().len() {
        return Err(MoveError::NoSuchEdge(edge));
    }
    Ok(())
}

fn check_vertex(tri: &Triangulation, vertex: usize) -> Result<(), MoveError> {
    if vertex >= tri.vertices().len() {
        return Err(MoveError::NoSuchVertex(vertex));
    }
    Ok(())
}

/// Cheap precondition check, without building the result.
pub fn check(tri: &Triangulation, mv: &Move) -> Result<(), MoveError> {
    match *mv {
        Move::TwoThree { tet, face } => {
            check_tet(tri, tet, face)?;
            if tri.gluing(tet, face).tet == tet {
                return Err(MoveError::SelfAdjacent { tet, face });
            }
        }
        Move::ThreeTwo { edge } => {
            check_edge(tri, edge)?;
            let e = &tri.edges()[edge];
            if e.degree() != 3 {
                return Err(MoveError::WrongDegree { edge, degree: e.degree(), expected: 3 });
            }
            if !e.embedded {
                return Err(MoveError::RepeatedTetrahedron { edge });
            }
        }
        Move::ZeroTwo { edge, i, j } => {
            check_edge(tri, edge)?;
            let e = &tri.edges()[edge];
            let d = e.degree();
            if i >= d || j >= d || i == j {
                return Err(MoveError::BadPositions { edge, i, j, degree: d });
            }
            let tri_at = |k: usize| {
                let s = e.steps[k];
                let a = (s.tet, s.y);
                std::cmp::min(a, tri.partner(a.0, a.1))
            };
            if tri_at(i) == tri_at(j) {
                return Err(MoveError::SameTriangle { edge, i, j });
            }
        }
        Move::TwoZero { edge } => {
            check_edge(tri, edge)?;
            let e = &tri.edges()[edge];
            if e.degree() != 2 {
                return Err(MoveError::WrongDegree { edge, degree: e.degree(), expected: 2 });
            }
            if !e.embedded {
                return Err(MoveError::RepeatedTetrahedron { edge });
            }
            if tri.size() <= 2 {
                return Err(MoveError::TooFewTetrahedra(tri.size()));
            }
            let (s0, s1) = (e.steps[0], e.steps[1]);
            let outer = [(s0.tet, s0.a), (s0.tet, s0.b), (s1.tet, s1.a), (s1.tet, s1.b)];
            if outer.iter().any(|&(t, f)| outer.contains(&tri.partner(t, f))) {
                return Err(MoveError::MergingFacesCoincide { edge });
            }
            if tri.edge_of(s0.tet, s0.x, s0.y) == tri.edge_of(s1.tet, s1.x, s1.y) {
                return Err(MoveError::OppositeEdgesCoincide { edge });
            }
        }
        Move::Bubble { tet, face } => check_tet(tri, tet, face)?,
        Move::OneFour { tet } => check_tet(tri, tet, 0)?,
        Move::ReverseBubble { vertex } => {
            bubble_pattern(tri, vertex)?;
        }
        Move::FourOne { vertex } => {
            four_one_edge(tri, vertex)?;
        }
        Move::FoldFill { cusp, diagonal } => {
            fold_pattern(tri, cusp, diagonal)?;
        }
    }
    Ok(())
}

pub fn apply(dec: &Decorated, mv: &Move) -> Result<Applied, MoveError> {
    check(&dec.tri, mv)?;
    match *mv {
        Move::TwoThree { tet, face } => two_three(dec, tet, face),
        Move::ThreeTwo { edge } => three_two(dec, edge),
        Move::ZeroTwo { edge, i, j } => zero_two(dec, edge, i, j),
        Move::TwoZero { edge } => two_zero(dec, edge),
        Move::Bubble { tet, face } => bubble(dec, tet, face),
        Move::ReverseBubble { vertex } => reverse_bubble(dec, vertex),
        Move::OneFour { tet } => one_four(dec, tet),
        Move::FourOne { vertex } => four_one(dec, vertex),
        Move::FoldFill { cusp, diagonal } => fold_fill(dec, cusp, diagonal),
    }
}

/// Applies a move to an undecorated triangulation.
pub fn apply_plain(tri: &Triangulation, mv: &Move) -> Result<Triangulation, MoveError> {
    let dec = Decorated { tri: tri.clone(), frames: None };
    Ok(apply(&dec, mv)?.result.tri)
}

fn two_three(dec: &Decorated, a: usize, fa: u8) -> Result<Applied, MoveError> {
    let (out, inverse) = two_three_out(dec, a, fa)?;
    Ok(Applied { result: out.dec, inverse: Some(inverse) })
}

fn two_three_out(dec: &Decorated, a: usize, fa: u8) -> Result<(Outcome, Move), MoveError> {
    let tri = &dec.tri;
    let gl = tri.gluing(a, fa);
    let (b, p) = (gl.tet, gl.perm);
    let tb = dec.g(a, fa);
    let c = face_corners(fa);
    let mut s = Surgery { removed: vec![(a, Mat2::IDENTITY), (b, tb)], ..Default::default() };
    for i in 0..3 {
        let (c0, c1, c2) = (c[i], c[(i + 1) % 3], c[(i + 2) % 3]);
        s.new_tets.push([
            old(a, fa, Mat2::IDENTITY),
            old(b, p.apply(fa), tb),
            old(a, c1, Mat2::IDENTITY),
            old(a, c2, Mat2::IDENTITY),
        ]);
        s.replace.push(((i, 0), (b, p.apply(c0)), perm([p.apply(c0), p.apply(fa), p.apply(c1), p.apply(c2)])));
        s.replace.push(((i, 1), (a, c0), perm([fa, c0, c1, c2])));
        s.direct.push(((i, 2), (End::New((i + 1) % 3), 3), perm([0, 1, 3, 2]), Mat2::IDENTITY));
    }
    let out = s.apply(dec)?;
    let (t, x) = out.new_corner(0, 0);
    let (_, y) = out.new_corner(0, 1);
    let edge = out.dec.tri.edge_of(t, x, y);
    Ok((out, Move::ThreeTwo { edge }))
}

fn three_two(dec: &Decorated, edge: usize) -> Result<Applied, MoveError> {
    let (out, inverse) = three_two_out(dec, edge)?;
    Ok(Applied { result: out.dec, inverse: Some(inverse) })
}

fn three_two_out(dec: &Decorated, edge: usize) -> Result<(Outcome, Move), MoveError> {
    let tri = &dec.tri;
    let steps = tri.edges()[edge].steps.clone();
    let mut frames = [Mat2::IDENTITY; 3];
    for i in 0..2 {
        frames[i + 1] = dec.g(steps[i].tet, steps[i].y) * frames[i];
    }
    let mut s = Surgery {
        removed: (0..3).map(|i| (steps[i].tet, frames[i])).collect(),
        ..Default::default()
    };
    let s0 = steps[0];
    let mut u = [old(s0.tet, s0.a, frames[0]); 4];
    let mut w = [old(s0.tet, s0.b, frames[0]); 4];
    for i in 0..3 {
        u[1 + i] = old(steps[i].tet, steps[i].x, frames[i]);
        w[1 + i] = old(steps[i].tet, steps[i].x, frames[i]);
    }
    s.new_tets = vec![u, w];
    for i in 0..3 {
        let st = steps[i];
        let prev = 1 + ((i + 2) % 3);
        let here = 1 + i;
        let opp = 1 + ((i + 1) % 3);
        let mut pu = [0u8; 4];
        pu[0] = st.a;
        pu[prev] = st.y;
        pu[here] = st.x;
        pu[opp] = st.b;
        s.replace.push(((0, opp as u8), (st.tet, st.b), perm(pu)));
        let mut pw = pu;
        pw[0] = st.b;
        pw[opp] = st.a;
        s.replace.push(((1, opp as u8), (st.tet, st.a), perm(pw)));
    }
    s.direct.push(((0, 0), (End::New(1), 0), perm([0, 1, 2, 3]), Mat2::IDENTITY));
    let out = s.apply(dec).map_err(|e| match e {
        SurgeryFailure::Invalid(_) => MoveError::NotEmbedded { edge },
        other => other.into(),
    })?;
    let (t, f) = out.new_corner(0, 0);
    Ok((out, Move::TwoThree { tet: t, face: f }))
}

fn zero_two(dec: &Decorated, edge: usize, i: usize, j: usize) -> Result<Applied, MoveError> {
    let out = zero_two_outcome(dec, edge, i, j)?;
    let (t, x) = out.new_corner(0, 0);
    let (_, y) = out.new_corner(0, 1);
    let edge = out.dec.tri.edge_of(t, x, y);
    Ok(Applied { result: out.dec, inverse: Some(Move::TwoZero { edge }) })
}

/// 0-2 move keeping the surgery bookkeeping. New tetrahedra have corners
/// `[apex i, apex j, a, b]` and are glued to each other along faces 2 and 3.
pub(crate) fn zero_two_outcome(dec: &Decorated, edge: usize, i: usize, j: usize) -> Result<Outcome, MoveError> {
    check(&dec.tri, &Move::ZeroTwo { edge, i, j })?;
    let tri = &dec.tri;
    let steps = tri.edges()[edge].steps.clone();
    let d = steps.len();
    // frames along the walk starting at position i
    let mut frame = vec![Mat2::IDENTITY; d];
    let mut k = i;
    for _ in 0..d - 1 {
        let next = (k + 1) % d;
        frame[next] = dec.g(steps[k].tet, steps[k].y) * frame[k];
        k = next;
    }
    let (si, sj) = (steps[i], steps[j]);
    let (i1, j1) = ((i + 1) % d, (j + 1) % d);
    let (si1, sj1) = (steps[i1], steps[j1]);
    let corners = [
        old(si.tet, si.x, frame[i]),
        old(sj.tet, sj.x, frame[j]),
        old(si.tet, si.a, frame[i]),
        old(si.tet, si.b, frame[i]),
    ];
    let mut s = Surgery { new_tets: vec![corners, corners], ..Default::default() };
    let id = perm([0, 1, 2, 3]);
    s.direct.push(((0, 2), (End::New(1), 2), id, Mat2::IDENTITY));
    s.direct.push(((0, 3), (End::New(1), 3), id, Mat2::IDENTITY));
    s.direct.push(((0, 1), (End::Old(si.tet), si.y), perm([si.x, si.y, si.a, si.b]), frame[i]));
    s.direct.push(((0, 0), (End::Old(sj1.tet), sj1.x), perm([sj1.x, sj1.y, sj1.a, sj1.b]), frame[j1]));
    s.direct.push(((1, 1), (End::Old(si1.tet), si1.x), perm([si1.y, si1.x, si1.a, si1.b]), frame[i1]));
    s.direct.push(((1, 0), (End::Old(sj.tet), sj.y), perm([sj.y, sj.x, sj.a, sj.b]), frame[j]));
    Ok(s.apply(dec)?)
}

/// Position around the edge of `tet` with corners `a b` of the triangle on face `face`.
pub fn triangle_position(tri: &Triangulation, tet: usize, a: u8, b: u8, face: u8) -> Option<usize> {
    let edge = tri.edge_of(tet, a, b);
    let steps = &tri.edges()[edge].steps;
    let d = steps.len();
    let here = |s: &EdgeStep| s.tet == tet && ((s.a, s.b) == (a, b) || (s.b, s.a) == (a, b));
    (0..d).find(|&k| {
        let s = steps[k];
        let n = steps[(k + 1) % d];
        (here(&s) && s.y == face) || (here(&n) && n.x == face)
    })
}

fn two_zero(dec: &Decorated, edge: usize) -> Result<Applied, MoveError> {
    let tri = &dec.tri;
    let e = &tri.edges()[edge];
    let (s0, s1) = (e.steps[0], e.steps[1]);
    let p = tri.gluing(s0.tet, s0.y).perm;
    let s = Surgery {
        removed: vec![(s0.tet, Mat2::IDENTITY), (s1.tet, dec.g(s0.tet, s0.y))],
        bridge: vec![((s0.tet, s0.a), (s1.tet, s1.a), p), ((s0.tet, s0.b), (s1.tet, s1.b), p)],
        ..Default::default()
    };
    let out = s.apply(dec).map_err(|e| match e {
        SurgeryFailure::Unresolved(..) => MoveError::MergingFacesCoincide { edge },
        other => other.into(),
    })?;
    // the two reglued triangles sit around the merged edge
    let outside = |t: usize, f: u8| -> Option<(usize, u8)> {
        let (u, h) = tri.partner(t, f);
        out.old_corner(u, h)
    };
    let inverse = (|| {
        // the edge x y of s0 seen from each outer tetrahedron
        let locate = |f: u8| -> Option<usize> {
            let (u, h) = outside(s0.tet, f)?;
            let gl = tri.gluing(s0.tet, f);
            let (_, x) = out.old_corner(gl.tet, gl.perm.apply(s0.x))?;
            let (_, y) = out.old_corner(gl.tet, gl.perm.apply(s0.y))?;
            triangle_position(&out.dec.tri, u, x, y, h)
        };
        let gl = tri.gluing(s0.tet, s0.a);
        let (u, x) = out.old_corner(gl.tet, gl.perm.apply(s0.x))?;
        let (_, y) = out.old_corner(gl.tet, gl.perm.apply(s0.y))?;
        let merged = out.dec.tri.edge_of(u, x, y);
        let i = locate(s0.a)?;
        let j = locate(s0.b)?;
        Some(Move::ZeroTwo { edge: merged, i: i.min(j), j: i.max(j) })
    })();
    Ok(Applied { result: out.dec, inverse })
}

fn bubble_on(dec: &Decorated, a: usize, fa: u8) -> Result<Outcome, MoveError> {
    let tri = &dec.tri;
    let gl = tri.gluing(a, fa);
    let (b, p) = (gl.tet, gl.perm);
    let ga = dec.g(a, fa);
    let c = face_corners(fa);
    let n0 = [
        Source::Fresh,
        old(a, c[0], Mat2::IDENTITY),
        old(a, c[1], Mat2::IDENTITY),
        old(a, c[2], Mat2::IDENTITY),
    ];
    let n1 = [Source::Fresh, old(b, p.apply(c[0]), ga), old(b, p.apply(c[1]), ga), old(b, p.apply(c[2]), ga)];
    let mut s = Surgery { new_tets: vec![n0, n1], ..Default::default() };
    s.direct.push(((0, 0), (End::Old(a), fa), perm([fa, c[0], c[1], c[2]]), Mat2::IDENTITY));
    s.direct.push((
        (1, 0),
        (End::Old(b), p.apply(fa)),
        perm([p.apply(fa), p.apply(c[0]), p.apply(c[1]), p.apply(c[2])]),
        ga,
    ));
    for f in 1..4u8 {
        s.direct.push(((0, f), (End::New(1), f), perm([0, 1, 2, 3]), Mat2::IDENTITY));
    }
    Ok(s.apply(dec)?)
}

fn bubble(dec: &Decorated, a: usize, fa: u8) -> Result<Applied, MoveError> {
    let out = bubble_on(dec, a, fa)?;
    let (t, v) = out.new_corner(0, 0);
    let vertex = out.dec.tri.vertex_of(t, v);
    Ok(Applied { result: out.dec, inverse: Some(Move::ReverseBubble { vertex }) })
}

/// The two tetrahedra and corners of a removable bubble, plus the side permutation.
fn bubble_pattern(tri: &Triangulation, vertex: usize) -> Result<((usize, u8), (usize, u8), Perm), MoveError> {
    check_vertex(tri, vertex)?;
    let v = &tri.vertices()[vertex];
    if v.kind != VertexKind::Material {
        return Err(MoveError::WrongVertexKind { vertex, found: "ideal", expected: "material" });
    }
    let mismatch = |reason: &str| MoveError::PatternMismatch { vertex, reason: reason.to_string() };
    if v.corners.len() != 2 {
        return Err(mismatch("not met by exactly two tetrahedron corners"));
    }
    let (n0, c0) = v.corners[0];
    let (n1, c1) = v.corners[1];
    if n0 == n1 {
        return Err(mismatch("both corners lie in one tetrahedron"));
    }
    let sides: Vec<u8> = (0..4u8).filter(|&f| f != c0).collect();
    let first = tri.gluing(n0, sides[0]);
    for &f in &sides {
        let g = tri.gluing(n0, f);
        if g.tet != n1 || g.perm != first.perm {
            return Err(mismatch("side faces do not form a double cone"));
        }
    }
    if first.perm.apply(c0) != c1 {
        return Err(mismatch("side faces do not form a double cone"));
    }
    if tri.partner(n0, c0) == (n1, c1) {
        return Err(mismatch("base faces are glued to each other"));
    }
    Ok(((n0, c0), (n1, c1), first.perm))
}

fn reverse_bubble(dec: &Decorated, vertex: usize) -> Result<Applied, MoveError> {
    let tri = &dec.tri;
    let ((n0, c0), (n1, c1), psi) = bubble_pattern(tri, vertex)?;
    let side = (0..4u8).find(|&f| f != c0).unwrap();
    let s = Surgery {
        removed: vec![(n0, Mat2::IDENTITY), (n1, dec.g(n0, side))],
        bridge: vec![((n0, c0), (n1, c1), psi)],
        ..Default::default()
    };
    let out = s.apply(dec)?;
    let (u, h) = tri.partner(n0, c0);
    let inverse = out.old_corner(u, h).map(|(tet, face)| Move::Bubble { tet, face });
    Ok(Applied { result: out.dec, inverse })
}

fn one_four(dec: &Decorated, tet: usize) -> Result<Applied, MoveError> {
    let first = bubble_on(dec, tet, 0)?;
    let (t, f) = first.old_corner(tet, 0).expect("tetrahedron kept");
    let (n1, apex) = first.new_corner(1, 0);
    let (second, _) = two_three_out(&first.dec, t, f)?;
    let (u, c) = second.old_corner(n1, apex).expect("far bubble tetrahedron kept");
    let vertex = second.dec.tri.vertex_of(u, c);
    Ok(Applied { result: second.dec, inverse: Some(Move::FourOne { vertex }) })
}

/// An edge of degree three at `vertex` whose 3-2 move starts a 4-1 move.
fn four_one_edge(tri: &Triangulation, vertex: usize) -> Result<usize, MoveError> {
    check_vertex(tri, vertex)?;
    let v = &tri.vertices()[vertex];
    if v.kind != VertexKind::Material {
        return Err(MoveError::WrongVertexKind { vertex, found: "ideal", expected: "material" });
    }
    let mismatch = |reason: &str| MoveError::PatternMismatch { vertex, reason: reason.to_string() };
    if v.corners.len() != 4 {
        return Err(mismatch("not met by exactly four tetrahedron corners"));
    }
    let mut tets: Vec<usize> = v.corners.iter().map(|c| c.0).collect();
    tets.sort_unstable();
    tets.dedup();
    if tets.len() != 4 {
        return Err(mismatch("corners not in four distinct tetrahedra"));
    }
    let (t, c) = v.corners[0];
    let mut first = None;
    for w in (0..4u8).filter(|&w| w != c) {
        let e = tri.edge_of(t, c, w);
        let class = &tri.edges()[e];
        if class.degree() != 3 || !class.embedded || class.is_loop() {
            return Err(mismatch("incident edges are not all of degree three"));
        }
        first.get_or_insert(e);
    }
    Ok(first.unwrap())
}

fn four_one(dec: &Decorated, vertex: usize) -> Result<Applied, MoveError> {
    let edge = four_one_edge(&dec.tri, vertex)?;
    let (step, _) = three_two_out(dec, edge).map_err(|e| MoveError::PatternMismatch {
        vertex,
        reason: format!("3-2 step failed: {e}"),
    })?;
    let s0 = dec.tri.edges()[edge].steps[0];
    // new tetrahedron 0 has corner a of the edge, new tetrahedron 1 has corner b
    let holder = if dec.tri.vertex_of(s0.tet, s0.a) == vertex { 0 } else { 1 };
    let (vt, vc) = step.new_corner(holder, 0);
    let (survivor, _) = step.new_corner(1 - holder, 0);
    let remaining = step.dec.tri.vertex_of(vt, vc);
    let ((n0, c0), (n1, c1), psi) = bubble_pattern(&step.dec.tri, remaining)?;
    let side = (0..4u8).find(|&f| f != c0).unwrap();
    let s = Surgery {
        removed: vec![(n0, Mat2::IDENTITY), (n1, step.dec.g(n0, side))],
        bridge: vec![((n0, c0), (n1, c1), psi)],
        ..Default::default()
    };
    let back = s.apply(&step.dec)?;
    let tet = back.old_to_new[survivor].expect("survivor kept");
    Ok(Applied { result: back.dec, inverse: Some(Move::OneFour { tet }) })
}

/// Cusp corners, the chosen diagonal corner, and the fold permutation.
#[allow(clippy::type_complexity)]
fn fold_pattern(
    tri: &Triangulation,
    cusp: usize,
    diagonal: u8,
) -> Result<((usize, u8), (usize, u8), u8, Perm), MoveError> {
    check_vertex(tri, cusp)?;
    let v = &tri.vertices()[cusp];
    if v.kind != VertexKind::Ideal {
        return Err(MoveError::WrongVertexKind { vertex: cusp, found: "material", expected: "ideal" });
    }
    let mismatch = |reason: &str| MoveError::PatternMismatch { vertex: cusp, reason: reason.to_string() };
    if diagonal > 2 {
        return Err(MoveError::BadSite(format!("diagonal {diagonal} out of range")));
    }
    if v.corners.len() != 2 {
        return Err(mismatch("cusp does not meet exactly two tetrahedron corners"));
    }
    let (t1, c1) = v.corners[0];
    let (t2, c2) = v.corners[1];
    if t1 == t2 {
        return Err(mismatch("cusp meets one tetrahedron twice"));
    }
    for f in (0..4u8).filter(|&f| f != c1) {
        if tri.gluing(t1, f).tet != t2 {
            return Err(mismatch("cusp tetrahedra do not form a parallelogram pattern"));
        }
    }
    let (o1, _) = tri.partner(t1, c1);
    let (o2, _) = tri.partner(t2, c2);
    if o1 == t1 || o1 == t2 || o2 == t1 || o2 == t2 {
        return Err(mismatch("boundary triangles are glued to the cusp tetrahedra"));
    }
    if tri.size() <= 2 {
        return Err(MoveError::TooFewTetrahedra(tri.size()));
    }
    let e1 = face_corners(c1)[diagonal as usize];
    let psi = tri.gluing(t1, e1).perm;
    Ok(((t1, c1), (t2, c2), e1, psi))
}

fn fold_fill(dec: &Decorated, cusp: usize, diagonal: u8) -> Result<Applied, MoveError> {
    let ((t1, c1), (t2, c2), e1, psi) = fold_pattern(&dec.tri, cusp, diagonal)?;
    let s = Surgery {
        removed: vec![(t1, Mat2::IDENTITY), (t2, dec.g(t1, e1))],
        bridge: vec![((t1, c1), (t2, c2), psi)],
        ..Default::default()
    };
    let out = s.apply(dec)?;
    Ok(Applied { result: out.dec, inverse: None })
}

/// All sites of one kind where the cheap preconditions hold, in a fixed order.
pub fn candidate_sites(tri: &Triangulation, kind: MoveKind) -> Vec<Move> {
    let mut out = Vec::new();
    match kind {
        MoveKind::TwoThree | MoveKind::Bubble => {
            for ((t, f), (u, _)) in tri.face_pairs() {
                if kind == MoveKind::Bubble || u != t {
                    out.push(if kind == MoveKind::Bubble {
                        Move::Bubble { tet: t, face: f }
                    } else {
                        Move::TwoThree { tet: t, face: f }
                    });
                }
            }
        }
        MoveKind::ThreeTwo | MoveKind::TwoZero => {
            for e in tri.edges() {
                let mv = if kind == MoveKind::ThreeTwo {
                    Move::ThreeTwo { edge: e.id }
                } else {
                    Move::TwoZero { edge: e.id }
                };
                if check(tri, &mv).is_ok() {
                    out.push(mv);
                }
            }
        }
        MoveKind::ZeroTwo => {
            for e in tri.edges() {
                let d = e.degree();
                for i in 0..d {
                    for j in (i + 1)..d {
                        let mv = Move::ZeroTwo { edge: e.id, i, j };
                        if check(tri, &mv).is_ok() {
                            out.push(mv);
                        }
                    }
                }
            }
        }
        MoveKind::OneFour => out.extend((0..tri.size()).map(|tet| Move::OneFour { tet })),
        MoveKind::ReverseBubble | MoveKind::FourOne => {
            for v in tri.material_vertices() {
                let mv = if kind == MoveKind::ReverseBubble {
                    Move::ReverseBubble { vertex: v }
                } else {
                    Move::FourOne { vertex: v }
                };
                if check(tri, &mv).is_ok() {
                    out.push(mv);
                }
            }
        }
        MoveKind::FoldFill => {
            for v in tri.ideal_vertices() {
                for diagonal in 0..3 {
                    let mv = Move::FoldFill { cusp: v, diagonal };
                    if check(tri, &mv).is_ok() {
                        out.push(mv);
                    }
                }
            }
        }
    }
    out
}

/// Sites of one kind whose move actually succeeds.
pub fn legal_moves(dec: &Decorated, kind: MoveKind) -> Vec<(Move, Applied)> {
    candidate_sites(&dec.tri, kind)
        .into_iter()
        .filter_map(|mv| apply(dec, &mv).ok().map(|a| (mv, a)))
        .collect()
}
