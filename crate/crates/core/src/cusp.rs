//! Vertex links: loops in the link's dual graph, peripheral curves and turning data.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::triangulation::Triangulation;

/// One crossing of a link loop: leave the link triangle at corner `corner` of `tet`
/// through face `face`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Crossing {
    pub tet: usize,
    pub corner: u8,
    pub face: u8,
}

impl Crossing {
    pub fn reverse(&self, tri: &Triangulation) -> Crossing {
        let gl = tri.gluing(self.tet, self.face);
        Crossing { tet: gl.tet, corner: gl.perm.apply(self.corner), face: gl.perm.apply(self.face) }
    }

    /// Corner reached after crossing.
    pub fn target(&self, tri: &Triangulation) -> (usize, u8) {
        let gl = tri.gluing(self.tet, self.face);
        (gl.tet, gl.perm.apply(self.corner))
    }
}

/// A closed loop in the link of a vertex, based at the vertex's first corner.
pub type LinkLoop = Vec<Crossing>;

/// Spanning tree of the link dual graph with paths from the base corner.
struct LinkTree {
    path: HashMap<(usize, u8), Vec<Crossing>>,
    tree: HashSet<(usize, u8, u8)>,
}

fn link_tree(tri: &Triangulation, vertex: usize) -> LinkTree {
    let base = tri.vertices()[vertex].corners[0];
    let mut path: HashMap<(usize, u8), Vec<Crossing>> = HashMap::new();
    let mut tree = HashSet::new();
    path.insert(base, Vec::new());
    let mut queue = VecDeque::from([base]);
    while let Some((t, v)) = queue.pop_front() {
        for f in (0..4u8).filter(|&f| f != v) {
            let c = Crossing { tet: t, corner: v, face: f };
            let next = c.target(tri);
            if !path.contains_key(&next) {
                let mut p = path[&(t, v)].clone();
                p.push(c);
                path.insert(next, p);
                let r = c.reverse(tri);
                tree.insert((t, v, f));
                tree.insert((r.tet, r.corner, r.face));
                queue.push_back(next);
            }
        }
    }
    LinkTree { path, tree }
}

fn reverse_path(tri: &Triangulation, p: &[Crossing]) -> Vec<Crossing> {
    p.iter().rev().map(|c| c.reverse(tri)).collect()
}

/// Fundamental cycles of the link dual graph; together they generate the image of the
/// link's fundamental group.
pub fn link_loops(tri: &Triangulation, vertex: usize) -> Vec<LinkLoop> {
    let lt = link_tree(tri, vertex);
    let mut out = Vec::new();
    for &(t, v) in &tri.vertices()[vertex].corners {
        for f in (0..4u8).filter(|&f| f != v) {
            let c = Crossing { tet: t, corner: v, face: f };
            let r = c.reverse(tri);
            if lt.tree.contains(&(t, v, f)) || (r.tet, r.corner, r.face) < (t, v, f) {
                continue;
            }
            let mut lp = lt.path[&(t, v)].clone();
            lp.push(c);
            lp.extend(reverse_path(tri, &lt.path[&c.target(tri)]));
            out.push(lp);
        }
    }
    out
}

/// Index of each undirected link edge, with +1 when crossed in its canonical direction.
fn edge_coordinates(tri: &Triangulation, vertex: usize) -> HashMap<(usize, u8, u8), (usize, f64)> {
    let mut idx = HashMap::new();
    let mut next = 0;
    for &(t, v) in &tri.vertices()[vertex].corners {
        for f in (0..4u8).filter(|&f| f != v) {
            let c = Crossing { tet: t, corner: v, face: f };
            let r = c.reverse(tri);
            let key = (t, v, f);
            let rkey = (r.tet, r.corner, r.face);
            if idx.contains_key(&key) {
                continue;
            }
            idx.insert(key, (next, 1.0));
            idx.insert(rkey, (next, -1.0));
            next += 1;
        }
    }
    idx
}

fn vector_of(coords: &HashMap<(usize, u8, u8), (usize, f64)>, lp: &[Crossing], len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    for c in lp {
        let (i, s) = coords[&(c.tet, c.corner, c.face)];
        v[i] += s;
    }
    v
}

/// Loops around the link vertices (one per edge end at `vertex`).
pub fn vertex_cycles(tri: &Triangulation, vertex: usize) -> Vec<LinkLoop> {
    let mut out = Vec::new();
    for e in tri.edges() {
        for end in 0..2 {
            let at = if end == 0 { e.ends.0 } else { e.ends.1 };
            if at != vertex {
                continue;
            }
            out.push(
                e.steps
                    .iter()
                    .map(|s| Crossing { tet: s.tet, corner: if end == 0 { s.a } else { s.b }, face: s.y })
                    .collect(),
            );
        }
    }
    out
}

fn rank(rows: &[Vec<f64>]) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap()) else {
            break;
        };
        if m[p][c].abs() < 1e-9 {
            continue;
        }
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r {
                let k = m[i][c] / m[r][c];
                if k != 0.0 {
                    for j in c..cols {
                        m[i][j] -= k * m[r][j];
                    }
                }
            }
        }
        r += 1;
    }
    r
}

/// Link loops independent in rational homology of the link (two for a torus cusp).
pub fn peripheral_loops(tri: &Triangulation, vertex: usize) -> Vec<LinkLoop> {
    let coords = edge_coordinates(tri, vertex);
    let len = coords.len() / 2;
    let mut rows: Vec<Vec<f64>> =
        vertex_cycles(tri, vertex).iter().map(|lp| vector_of(&coords, lp, len)).collect();
    let mut current = rank(&rows);
    let mut out = Vec::new();
    for lp in link_loops(tri, vertex) {
        rows.push(vector_of(&coords, &lp, len));
        let r = rank(&rows);
        if r > current {
            current = r;
            out.push(lp);
        } else {
            rows.pop();
        }
    }
    out
}

/// Removes back-and-forth crossings, including across the ends of the loop.
pub fn cyclically_reduce(tri: &Triangulation, lp: &[Crossing]) -> LinkLoop {
    let mut out: Vec<Crossing> = Vec::with_capacity(lp.len());
    for &c in lp {
        if out.last().is_some_and(|l| l.reverse(tri) == c) {
            out.pop();
        } else {
            out.push(c);
        }
    }
    while out.len() >= 2 && out.last().unwrap().reverse(tri) == out[0] {
        out.pop();
        out.remove(0);
    }
    out
}

/// For each triangle visited by a reduced loop: tetrahedron, corner, entry face, exit face.
pub fn turns(tri: &Triangulation, lp: &[Crossing]) -> Vec<(usize, u8, u8, u8)> {
    let m = lp.len();
    (0..m)
        .map(|k| {
            let prev = lp[(k + m - 1) % m];
            let entry = prev.reverse(tri).face;
            let c = lp[k];
            (c.tet, c.corner, entry, c.face)
        })
        .collect()
}
