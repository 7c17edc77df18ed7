//! Snakes: chains of 0-2 moves that drag a cusp region across the triangulation
//! until it swallows a material vertex.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::holonomy::{l_essential_check, EssentialReport, HolonomyError};
use crate::mobius::{c, Cp1, Mat2};
use crate::moves::{triangle_position, zero_two_outcome, MoveError};
use crate::perm::Perm;
use crate::surgery::{Decorated, Frames, Surgery, SurgeryFailure};
use crate::triangulation::{Gluing, Triangulation, VertexKind};

pub const DEFAULT_MAX_DEPTH: usize = 8;
pub const DEFAULT_MAX_NODES: usize = 200_000;

#[derive(Debug, Error)]
pub enum SnakeError {
    #[error("vertex {0} is not a material vertex")]
    NotMaterial(usize),
    #[error("ideal corner {corner} of tetrahedron {tet} has no label")]
    Unlabelled { tet: usize, corner: u8 },
    #[error("triangulation carries no labels")]
    NoFrames,
    #[error("snake path is empty")]
    Empty,
    #[error("snake path breaks at step {0}")]
    Broken(usize),
    #[error("no self-avoiding snake reaches vertex {vertex} after {explored} states")]
    NotFound { vertex: usize, explored: usize },
    #[error("contracting the snake tip failed: {0}")]
    Contract(String),
    #[error("step {step}: {source}")]
    Move {
        step: usize,
        #[source]
        source: MoveError,
    },
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error("gave up after {0} inflations with material vertices left")]
    Stalled(usize),
}

/// One step: cross the foam face dual to `edge` from the triangle at position `entry`
/// around the edge to the one at position `exit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SnakeStep {
    pub edge: usize,
    pub entry: usize,
    pub exit: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SnakePath {
    pub steps: Vec<SnakeStep>,
    /// Ideal vertex whose region the snake starts from.
    pub source: usize,
    /// Material vertex the snake ends at.
    pub target: usize,
    /// Label of the source lift, in the frame of the target's first corner.
    pub label: Cp1,
}

/// Foam faces (edge classes) and foam edges (face pair indices) a path must stay clear of.
#[derive(Clone, Debug, Default)]
pub struct Avoid {
    pub edges: HashSet<usize>,
    pub triangles: HashSet<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Clash {
    /// The source label equals the label of a region next to the target.
    Neighbour { vertex: usize },
    /// The source label equals the label of a region the path runs along.
    Interior { step: usize, vertex: usize },
    /// The path runs along the target region before reaching it.
    TouchesTarget { step: usize },
    /// An edge loop at the target.
    MaterialLoop { edge: usize },
    /// The path crosses a foam edge or face it was told to avoid.
    Avoided { step: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    SelfAvoiding,
    Clash(Clash),
}

fn labels_of(dec: &Decorated) -> Result<&Frames, SnakeError> {
    dec.frames.as_ref().ok_or(SnakeError::NoFrames)
}

fn label_at(dec: &Decorated, tet: usize, corner: u8) -> Result<Cp1, SnakeError> {
    dec.label(tet, corner).ok_or(SnakeError::Unlabelled { tet, corner })
}

/// Frames of the tetrahedra around a vertex, relative to its first corner.
fn star(tri: &Triangulation, dec: &Decorated, vertex: usize) -> BTreeMap<(usize, u8), Mat2> {
    let base = tri.vertices()[vertex].corners[0];
    let mut out = BTreeMap::from([(base, Mat2::IDENTITY)]);
    let mut queue = VecDeque::from([base]);
    while let Some((t, v)) = queue.pop_front() {
        let m = out[&(t, v)];
        for f in (0..4u8).filter(|&f| f != v) {
            let gl = tri.gluing(t, f);
            let next = (gl.tet, gl.perm.apply(v));
            if let std::collections::btree_map::Entry::Vacant(e) = out.entry(next) {
                e.insert(m * dec.g(t, f).inv());
                queue.push_back(next);
            }
        }
    }
    out
}

/// Labels of the ideal regions meeting a vertex, in the frame of its first corner.
fn neighbour_labels(dec: &Decorated, vertex: usize) -> Result<Vec<(usize, Cp1)>, SnakeError> {
    let tri = &dec.tri;
    let mut out = Vec::new();
    for (&(t, v), m) in &star(tri, dec, vertex) {
        for w in (0..4u8).filter(|&w| w != v) {
            if tri.corner_kind(t, w) == VertexKind::Ideal {
                out.push((tri.vertex_of(t, w), m.apply(&label_at(dec, t, w)?).normalized()));
            }
        }
    }
    Ok(out)
}

/// What a path touches, with labels in the frame of the source tetrahedron.
struct Walk {
    source: (usize, u8),
    /// Interior regions: step, vertex, label when ideal.
    interior: Vec<(usize, usize, Option<Cp1>)>,
    /// Tetrahedron and corner of the target at the end, and its frame.
    end: (usize, u8),
    end_frame: Mat2,
    triangles: Vec<usize>,
}

fn walk(dec: &Decorated, path: &SnakePath) -> Result<Walk, SnakeError> {
    let tri = &dec.tri;
    let first = path.steps.first().ok_or(SnakeError::Empty)?;
    let edge_steps = |k: usize, e: usize| tri.edges().get(e).map(|x| &x.steps).ok_or(SnakeError::Broken(k));
    let s0 = *edge_steps(0, first.edge)?.get(first.entry).ok_or(SnakeError::Broken(0))?;
    let source = (s0.tet, s0.x);
    let mut side = (s0.tet, s0.y);
    let mut frame = Mat2::IDENTITY;
    let mut interior = Vec::new();
    let mut triangles = vec![tri.face_pair_index(s0.tet, s0.y)];
    let mut end = source;
    let touch = |k: usize, t: usize, v: u8, frame: &Mat2, out: &mut Vec<(usize, usize, Option<Cp1>)>| {
        let l = match tri.corner_kind(t, v) {
            VertexKind::Ideal => Some(frame.apply(&label_at(dec, t, v)?).normalized()),
            VertexKind::Material => None,
        };
        out.push((k, tri.vertex_of(t, v), l));
        Ok::<(), SnakeError>(())
    };
    for (k, st) in path.steps.iter().enumerate() {
        let steps = edge_steps(k, st.edge)?;
        let d = steps.len();
        if st.entry >= d || st.exit >= d || st.entry == st.exit {
            return Err(SnakeError::Broken(k));
        }
        let si = steps[st.entry];
        let si1 = steps[(st.entry + 1) % d];
        if side == (si.tet, si.y) {
            frame = frame * dec.g(si.tet, si.y).inv();
        } else if side != (si1.tet, si1.x) {
            return Err(SnakeError::Broken(k));
        }
        let mut p = (st.entry + 1) % d;
        loop {
            let s = steps[p];
            touch(k, s.tet, s.a, &frame, &mut interior)?;
            touch(k, s.tet, s.b, &frame, &mut interior)?;
            if p == st.exit {
                break;
            }
            frame = frame * dec.g(s.tet, s.y).inv();
            p = (p + 1) % d;
        }
        let sj = steps[st.exit];
        side = (sj.tet, sj.y);
        triangles.push(tri.face_pair_index(sj.tet, sj.y));
        if k + 1 < path.steps.len() {
            touch(k, sj.tet, sj.x, &frame, &mut interior)?;
        } else {
            end = (sj.tet, sj.x);
        }
    }
    Ok(Walk { source, interior, end, end_frame: frame, triangles })
}

/// Checks that a path is well formed and that its source label is new near the path and the target.
pub fn is_l_self_avoiding(dec: &Decorated, path: &SnakePath, tol: f64) -> Result<Verdict, SnakeError> {
    check_avoiding(dec, path, &Avoid::default(), tol).map(|(v, _)| v)
}

fn check_avoiding(dec: &Decorated, path: &SnakePath, avoid: &Avoid, tol: f64) -> Result<(Verdict, Cp1), SnakeError> {
    labels_of(dec)?;
    let tri = &dec.tri;
    let w = walk(dec, path)?;
    let target = tri.vertex_of(w.end.0, w.end.1);
    if target != path.target || tri.vertices()[target].kind != VertexKind::Material {
        return Err(SnakeError::NotMaterial(target));
    }
    let source_label = label_at(dec, w.source.0, w.source.1)?;
    let stars = star(tri, dec, target);
    // frame of the end tetrahedron relative to the target's first corner
    let to_base = stars[&w.end];
    let to_base = to_base * w.end_frame.inv();
    let ell = to_base.apply(&source_label).normalized();
    let clash = |c: Clash| Ok((Verdict::Clash(c), ell));
    for e in tri.edges() {
        if e.is_loop() && e.ends.0 == target {
            return clash(Clash::MaterialLoop { edge: e.id });
        }
    }
    for (k, st) in path.steps.iter().enumerate() {
        if avoid.edges.contains(&st.edge) || avoid.triangles.contains(&w.triangles[k + 1]) {
            return clash(Clash::Avoided { step: k });
        }
    }
    if avoid.triangles.contains(&w.triangles[0]) {
        return clash(Clash::Avoided { step: 0 });
    }
    for &(k, v, l) in &w.interior {
        if v == target {
            return clash(Clash::TouchesTarget { step: k });
        }
        if let Some(l) = l {
            if to_base.apply(&l).chordal(&ell) <= tol {
                return clash(Clash::Interior { step: k, vertex: v });
            }
        }
    }
    for (v, l) in neighbour_labels(dec, target)? {
        if l.chordal(&ell) <= tol {
            return clash(Clash::Neighbour { vertex: v });
        }
    }
    Ok((Verdict::SelfAvoiding, ell))
}

#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    pub max_depth: usize,
    pub max_nodes: usize,
    pub tol: f64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_depth: DEFAULT_MAX_DEPTH, max_nodes: DEFAULT_MAX_NODES, tol: 1e-6 }
    }
}

struct Node {
    side: (usize, u8),
    edge: (u8, u8),
    frame: Mat2,
    parent: Option<usize>,
    step: Option<SnakeStep>,
    depth: usize,
}

fn point_key(p: Cp1) -> (i64, i64, i64) {
    match p.to_complex(1e-12) {
        Some(z) if z.norm() < 1e9 => (0, (z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64),
        _ => (1, 0, 0),
    }
}

fn frame_key(m: &Mat2) -> [(i64, i64, i64); 2] {
    [point_key(m.apply(&Cp1::finite(c(0.137, 0.291)))), point_key(m.apply(&Cp1::finite(c(-0.613, 0.444))))]
}

fn path_of(nodes: &[Node], mut at: usize) -> Vec<SnakeStep> {
    let mut steps = Vec::new();
    while let Some(p) = nodes[at].parent {
        steps.push(nodes[at].step.expect("child nodes carry a step"));
        at = p;
    }
    steps
}

/// Breadth-first search in the universal cover, outwards from the target, for the
/// shortest snake whose source lift has label `wanted` (or any new label when `None`).
pub fn create_snake_path(
    dec: &Decorated,
    target: usize,
    wanted: Option<Cp1>,
    avoid: &Avoid,
    limits: &SearchLimits,
) -> Result<SnakePath, SnakeError> {
    let tri = &dec.tri;
    labels_of(dec)?;
    if target >= tri.vertices().len() || tri.vertices()[target].kind != VertexKind::Material {
        return Err(SnakeError::NotMaterial(target));
    }
    let source_of = |side: (usize, u8), edge: (u8, u8)| -> u8 {
        (0..4u8).find(|&x| x != side.1 && x != edge.0 && x != edge.1).expect("apex")
    };
    let mut nodes: Vec<Node> = Vec::new();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    for (&(t, v), m) in &star(tri, dec, target) {
        for y in (0..4u8).filter(|&y| y != v) {
            let mut rest = (0..4u8).filter(|&x| x != v && x != y);
            let edge = (rest.next().unwrap(), rest.next().unwrap());
            let key = (tri.face_pair_index(t, y), tri.edge_of(t, edge.0, edge.1), frame_key(m));
            if seen.insert(key) {
                nodes.push(Node { side: (t, y), edge, frame: *m, parent: None, step: None, depth: 0 });
                queue.push_back(nodes.len() - 1);
            }
        }
    }
    while let Some(at) = queue.pop_front() {
        if nodes.len() > limits.max_nodes {
            break;
        }
        let (side, (a, b), frame, depth) = (nodes[at].side, nodes[at].edge, nodes[at].frame, nodes[at].depth);
        let e = tri.edge_of(side.0, a, b);
        let steps = &tri.edges()[e].steps;
        let d = steps.len();
        let Some(p0) = triangle_position(tri, side.0, a, b, side.1) else { continue };
        let here = tri.face_pair_index(side.0, side.1);
        let on_branch: HashSet<usize> = {
            let mut s = HashSet::from([here]);
            let mut k = at;
            while let Some(p) = nodes[k].parent {
                s.insert(tri.face_pair_index(nodes[p].side.0, nodes[p].side.1));
                k = p;
            }
            s
        };
        let s_p0 = steps[p0];
        let mut f = if side == (s_p0.tet, s_p0.y) { frame } else { frame * dec.g(s_p0.tet, s_p0.y) };
        for back in 1..d {
            let q = (p0 + d - back) % d;
            let sq = steps[q];
            f = f * dec.g(sq.tet, sq.y);
            let tq = tri.face_pair_index(sq.tet, sq.y);
            if on_branch.contains(&tq) || avoid.triangles.contains(&tq) || avoid.edges.contains(&e) {
                continue;
            }
            let apex = sq.x;
            if tri.vertex_of(sq.tet, apex) == target {
                continue;
            }
            let step = SnakeStep { edge: e, entry: q, exit: p0 };
            let child = Node { side: (sq.tet, sq.y), edge: (sq.a, sq.b), frame: f, parent: Some(at), step: Some(step), depth: depth + 1 };
            nodes.push(child);
            let id = nodes.len() - 1;
            if tri.corner_kind(sq.tet, apex) == VertexKind::Ideal {
                let ell = f.apply(&label_at(dec, sq.tet, apex)?).normalized();
                let matches = wanted.map_or(true, |w| w.chordal(&ell) <= limits.tol);
                if matches {
                    let mut path = SnakePath {
                        steps: path_of(&nodes, id),
                        source: tri.vertex_of(sq.tet, apex),
                        target,
                        label: ell,
                    };
                    if let (Verdict::SelfAvoiding, l) = check_avoiding(dec, &path, avoid, limits.tol)? {
                        path.label = l;
                        return Ok(path);
                    }
                }
            }
            if depth + 1 >= limits.max_depth {
                continue;
            }
            for other in [sq.a, sq.b] {
                let edge = (other, apex);
                let key = (tq, tri.edge_of(sq.tet, other, apex), frame_key(&f));
                if seen.insert(key) {
                    nodes.push(Node {
                        side: (sq.tet, sq.y),
                        edge,
                        frame: f,
                        parent: Some(at),
                        step: Some(step),
                        depth: depth + 1,
                    });
                    queue.push_back(nodes.len() - 1);
                }
            }
            debug_assert_eq!(source_of((sq.tet, sq.y), (sq.a, sq.b)), apex);
        }
    }
    Err(SnakeError::NotFound { vertex: target, explored: nodes.len() })
}

/// Where the last 0-2 of a snake left its two new tetrahedra, with the current corners
/// playing `[source, target, a, b]` in each.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tip {
    pub tets: [usize; 2],
    pub corners: [[u8; 4]; 2],
}

#[derive(Clone, Debug)]
pub struct Snake {
    /// The triangulation after each 0-2 move.
    pub stages: Vec<Decorated>,
    pub tip: Tip,
}

/// Performs the 0-2 moves of a snake path one after another.
pub fn build_snake(dec: &Decorated, path: &SnakePath) -> Result<Snake, SnakeError> {
    let orig = &dec.tri;
    if path.steps.is_empty() {
        return Err(SnakeError::Empty);
    }
    walk(dec, path)?;
    // original tetrahedron -> current tetrahedron and corner images
    let mut track: Vec<(usize, [u8; 4])> = (0..orig.size()).map(|t| (t, [0, 1, 2, 3])).collect();
    let mut cur = dec.clone();
    let mut stages = Vec::with_capacity(path.steps.len());
    let mut entry: Option<(usize, usize)> = None;
    let mut tip = None;
    let locate = |track: &[(usize, [u8; 4])], tri: &Triangulation, t: usize, a: u8, b: u8, y: u8| {
        let (nt, m) = track[t];
        let (na, nb, ny) = (m[a as usize], m[b as usize], m[y as usize]);
        (nt, na, nb, ny, tri.edge_of(nt, na, nb), triangle_position(tri, nt, na, nb, ny))
    };
    for (k, st) in path.steps.iter().enumerate() {
        let osteps = &orig.edges()[st.edge].steps;
        let sj = osteps[st.exit];
        let (_, _, _, _, edge, exit) = locate(&track, &cur.tri, sj.tet, sj.a, sj.b, sj.y);
        let exit = exit.ok_or(SnakeError::Broken(k))?;
        let (e_in, i) = match entry {
            Some(x) => x,
            None => {
                let si = osteps[st.entry];
                let (_, _, _, _, e0, p) = locate(&track, &cur.tri, si.tet, si.a, si.b, si.y);
                (e0, p.ok_or(SnakeError::Broken(k))?)
            }
        };
        if e_in != edge {
            return Err(SnakeError::Broken(k));
        }
        let uses_a = match path.steps.get(k + 1) {
            Some(next) => Some(next_uses_a(&cur.tri, &track, orig, edge, exit, next).ok_or(SnakeError::Broken(k + 1))?),
            None => None,
        };
        let out = zero_two_outcome(&cur, edge, i, exit).map_err(|source| SnakeError::Move { step: k, source })?;
        for tr in track.iter_mut() {
            let mut m = [0u8; 4];
            let mut nt = tr.0;
            for c in 0..4 {
                let (t2, c2) = out.old_corner(tr.0, tr.1[c]).expect("0-2 keeps every tetrahedron");
                nt = t2;
                m[c] = c2;
            }
            *tr = (nt, m);
        }
        let nc = |i: usize, c: u8| out.new_corner(i, c);
        let pillow = |i: usize| {
            let t = nc(i, 0).0;
            (t, [nc(i, 0).1, nc(i, 1).1, nc(i, 2).1, nc(i, 3).1])
        };
        if let Some(uses_a) = uses_a {
            let (pt, pc) = pillow(0);
            // face 3 of the first new tetrahedron is (source, apex, a), face 2 is (source, apex, b)
            let (other, face) = if uses_a { (pc[2], pc[3]) } else { (pc[3], pc[2]) };
            let tri = &out.dec.tri;
            let e_next = tri.edge_of(pt, pc[1], other);
            let pos = triangle_position(tri, pt, pc[1], other, face).ok_or(SnakeError::Broken(k + 1))?;
            entry = Some((e_next, pos));
        } else {
            let (t0, c0) = pillow(0);
            let (t1, c1) = pillow(1);
            tip = Some(Tip { tets: [t0, t1], corners: [c0, c1] });
        }
        cur = out.dec;
        stages.push(cur.clone());
    }
    Ok(Snake { stages, tip: tip.expect("nonempty path") })
}

/// Whether the next edge of the path joins the far apex of the exit triangle to its `a` end.
fn next_uses_a(
    tri: &Triangulation,
    track: &[(usize, [u8; 4])],
    orig: &Triangulation,
    edge: usize,
    exit: usize,
    next: &SnakeStep,
) -> Option<bool> {
    let sj = tri.edges()[edge].steps[exit];
    let ni = orig.edges()[next.edge].steps[next.entry];
    let (t, m) = track[ni.tet];
    let (a, b, y) = (m[ni.a as usize], m[ni.b as usize], m[ni.y as usize]);
    let (u, w) = if (t, y) == (sj.tet, sj.y) {
        (a, b)
    } else {
        let gl = tri.gluing(t, y);
        if gl.tet != sj.tet || gl.perm.apply(y) != sj.y {
            return None;
        }
        (gl.perm.apply(a), gl.perm.apply(b))
    };
    let ends = [u, w];
    if !ends.contains(&sj.x) {
        return None;
    }
    if ends.contains(&sj.a) {
        Some(true)
    } else if ends.contains(&sj.b) {
        Some(false)
    } else {
        None
    }
}

/// Collapses the degree-two edge at the tip of a snake, merging the target into the source.
pub fn contract_tip(dec: &Decorated, tip: &Tip) -> Result<Decorated, SnakeError> {
    let tri = &dec.tri;
    let [t0, t1] = tip.tets;
    let target = tri.vertex_of(t0, tip.corners[0][1]);
    let mut kinds = tri.corner_kinds().to_vec();
    for &(t, c) in &tri.vertices()[target].corners {
        kinds[t][c as usize] = VertexKind::Ideal;
    }
    let merged = Triangulation::new(tri.gluings().to_vec(), kinds).map_err(|e| SnakeError::Contract(e.to_string()))?;
    let staged = Decorated { tri: merged, frames: dec.frames.clone() };
    // the two tip tetrahedra share a face containing source, target and a
    let shared = tip.corners[0][3];
    let into = tri.gluing(t0, shared);
    if into.tet != t1 {
        return Err(SnakeError::Contract("tip tetrahedra are not adjacent".into()));
    }
    let swap = |cs: [u8; 4]| {
        let mut img = [0, 1, 2, 3];
        img[cs[0] as usize] = cs[1];
        img[cs[1] as usize] = cs[0];
        Perm::new(img).expect("transposition")
    };
    let s = Surgery {
        removed: vec![(t0, Mat2::IDENTITY), (t1, dec.g(t0, shared))],
        bridge: tip
            .tets
            .iter()
            .zip(tip.corners.iter())
            .map(|(&t, cs)| ((t, cs[0]), (t, cs[1]), swap(*cs)))
            .collect(),
        ..Default::default()
    };
    let mut out = s
        .apply(&staged)
        .map_err(|e| SnakeError::Contract(match e {
            SurgeryFailure::Invalid(e) => e.to_string(),
            SurgeryFailure::Unresolved(t, f) => format!("face {f} of tetrahedron {t} does not resolve"),
            SurgeryFailure::NoTetrahedra => "nothing left".into(),
        }))?
        .dec;
    out.propagate_labels();
    Ok(out)
}

/// Builds the snake and collapses its tip: the target material vertex disappears.
pub fn inflate(dec: &Decorated, path: &SnakePath) -> Result<Decorated, SnakeError> {
    let snake = build_snake(dec, path)?;
    let last = snake.stages.last().expect("nonempty path");
    contract_tip(last, &snake.tip)
}

/// Which tetrahedron corner plays the vertex, edge, face and centre of a flag.
fn corner_of_role(odd: bool, role: u8) -> u8 {
    if odd && role >= 2 {
        5 - role
    } else {
        role
    }
}

/// Barycentric subdivision: 24 tetrahedra per tetrahedron, one per flag, with the
/// original corners kept (and labelled) and every new vertex material.
pub fn barycentric(dec: &Decorated) -> Result<Decorated, SnakeError> {
    let tri = &dec.tri;
    let perms = Perm::all();
    let index: HashMap<[u8; 4], usize> = perms.iter().enumerate().map(|(i, p)| (p.0, i)).collect();
    let n = tri.size();
    let mut tets = Vec::with_capacity(24 * n);
    let mut kinds = Vec::with_capacity(24 * n);
    let mut g = Vec::with_capacity(24 * n);
    let mut labels = Vec::with_capacity(24 * n);
    for t in 0..n {
        for pi in perms.iter() {
            let odd = pi.is_odd();
            let mut row = [Gluing { tet: 0, perm: Perm([0, 1, 2, 3]) }; 4];
            let mut grow = [Mat2::IDENTITY; 4];
            for role in 0..4u8 {
                let (nt, npi) = if role < 3 {
                    (t, pi.compose(Perm::transposition(role, role + 1)))
                } else {
                    let gl = tri.gluing(t, pi.apply(3));
                    grow[corner_of_role(odd, 3) as usize] = dec.g(t, pi.apply(3));
                    (gl.tet, gl.perm.compose(*pi))
                };
                let nodd = npi.is_odd();
                let mut img = [0u8; 4];
                for r in 0..4u8 {
                    img[corner_of_role(odd, r) as usize] = corner_of_role(nodd, r);
                }
                row[corner_of_role(odd, role) as usize] =
                    Gluing { tet: 24 * nt + index[&npi.0], perm: Perm::new(img).expect("bijection") };
            }
            tets.push(row);
            g.push(grow);
            let mut k = [VertexKind::Material; 4];
            k[0] = tri.corner_kind(t, pi.apply(0));
            kinds.push(k);
            let mut l = [None; 4];
            l[0] = dec.label(t, pi.apply(0));
            labels.push(l);
        }
    }
    let out = Triangulation::new(tets, kinds).map_err(|e| SnakeError::Contract(e.to_string()))?;
    let frames = dec.frames.as_ref().map(|_| Frames { g, labels });
    Ok(Decorated { tri: out, frames })
}

#[derive(Clone, Debug, Serialize)]
pub struct InflationRecord {
    pub vertex: usize,
    pub steps: Vec<SnakeStep>,
    pub source: usize,
    pub tets_before: usize,
    pub tets_after: usize,
}

#[derive(Clone, Debug)]
pub struct BuildResult {
    pub dec: Decorated,
    pub log: Vec<InflationRecord>,
    pub report: EssentialReport,
}

/// Subdivides, then inflates snakes until no material vertex is left. The result is an
/// ideal triangulation whose edges all join differently labelled cusp lifts.
pub fn build_essential(dec: &Decorated, limits: &SearchLimits) -> Result<BuildResult, SnakeError> {
    labels_of(dec)?;
    let mut cur = barycentric(dec)?;
    let budget = cur.tri.material_vertices().len();
    let mut log = Vec::new();
    for _ in 0..budget {
        let Some(&v) = cur.tri.material_vertices().first() else { break };
        let path = create_snake_path(&cur, v, None, &Avoid::default(), limits)?;
        let next = inflate(&cur, &path)?;
        log.push(InflationRecord {
            vertex: v,
            steps: path.steps.clone(),
            source: path.source,
            tets_before: cur.tri.size(),
            tets_after: next.tri.size(),
        });
        cur = next;
    }
    if !cur.tri.material_vertices().is_empty() {
        return Err(SnakeError::Stalled(log.len()));
    }
    let report = l_essential_check(&cur, limits.tol)?;
    Ok(BuildResult { dec: cur, log, report })
}
