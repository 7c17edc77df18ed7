//! Dual-spanning-tree presentations of the fundamental group and first homology.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::error::TriError;
use crate::triangulation::Triangulation;

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn inv(self) -> Letter {
        Letter { gen: self.gen, inverse: !self.inverse }
    }
}

pub type Word = Vec<Letter>;

pub fn free_reduce(word: &[Letter]) -> Word {
    let mut out: Word = Vec::with_capacity(word.len());
    for &l in word {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn invert_word(word: &[Letter]) -> Word {
    word.iter().rev().map(|l| l.inv()).collect()
}

/// Spanning tree of the dual graph plus the generator attached to each non-tree face.
#[derive(Clone, Debug)]
pub struct DualTree {
    pub root: usize,
    /// For each tetrahedron except the root, the face through which the tree reaches it.
    pub parent_face: Vec<Option<(usize, u8)>>,
    /// Generator index per (tet, face) end, `None` on tree faces.
    gen_of: Vec<[Option<Letter>; 4]>,
    /// Canonical end of each generator's face pair.
    pub generators: Vec<(usize, u8)>,
}

impl DualTree {
    /// Breadth-first tree, visiting tetrahedra in the given priority order.
    pub fn new(tri: &Triangulation, order: &[usize]) -> DualTree {
        let n = tri.size();
        let root = order.first().copied().unwrap_or(0);
        let mut rank = vec![0; n];
        for (i, &t) in order.iter().enumerate() {
            rank[t] = i;
        }
        let mut parent_face = vec![None; n];
        let mut in_tree = vec![[false; 4]; n];
        let mut seen = vec![false; n];
        if n > 0 {
            seen[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(t) = queue.pop_front() {
                let mut faces: Vec<u8> = (0..4).collect();
                faces.sort_by_key(|&f| rank[tri.gluing(t, f).tet]);
                for f in faces {
                    let g = tri.gluing(t, f);
                    if !seen[g.tet] {
                        seen[g.tet] = true;
                        parent_face[g.tet] = Some((t, f));
                        in_tree[t][f as usize] = true;
                        in_tree[g.tet][g.perm.apply(f) as usize] = true;
                        queue.push_back(g.tet);
                    }
                }
            }
        }
        let mut gen_of = vec![[None; 4]; n];
        let mut generators = Vec::new();
        for ((t, f), (u, h)) in tri.face_pairs() {
            if in_tree[t][f as usize] {
                continue;
            }
            let gen = generators.len();
            generators.push((t, f));
            gen_of[t][f as usize] = Some(Letter { gen, inverse: false });
            gen_of[u][h as usize] = Some(Letter { gen, inverse: true });
        }
        DualTree { root, parent_face, gen_of, generators }
    }

    pub fn standard(tri: &Triangulation) -> DualTree {
        let order: Vec<usize> = (0..tri.size()).collect();
        DualTree::new(tri, &order)
    }

    /// Letter read when leaving `tet` through `face`.
    pub fn crossing(&self, tet: usize, face: u8) -> Option<Letter> {
        self.gen_of[tet][face as usize]
    }

    pub fn is_tree_face(&self, tet: usize, face: u8) -> bool {
        self.gen_of[tet][face as usize].is_none()
    }

    pub fn word_of_crossings(&self, crossings: &[(usize, u8)]) -> Word {
        let w: Word = crossings.iter().filter_map(|&(t, f)| self.crossing(t, f)).collect();
        free_reduce(&w)
    }
}

#[derive(Clone, Debug)]
pub struct Presentation {
    pub generators: usize,
    /// One relator per edge class, read walking around the edge.
    pub relators: Vec<Word>,
    pub tree: DualTree,
}

impl Presentation {
    pub fn new(tri: &Triangulation) -> Presentation {
        Presentation::with_tree(tri, DualTree::standard(tri))
    }

    pub fn with_tree(tri: &Triangulation, tree: DualTree) -> Presentation {
        let relators = tri
            .edges()
            .iter()
            .map(|e| {
                let crossings: Vec<(usize, u8)> = e.steps.iter().map(|s| (s.tet, s.y)).collect();
                tree.word_of_crossings(&crossings)
            })
            .collect();
        Presentation { generators: tree.generators.len(), relators, tree }
    }

    /// Abelianized relator matrix, one row per relator.
    pub fn relation_matrix(&self) -> Vec<Vec<i64>> {
        self.relators.iter().map(|w| abelianize(w, self.generators)).collect()
    }
}

pub fn abelianize(word: &[Letter], generators: usize) -> Vec<i64> {
    let mut row = vec![0i64; generators];
    for l in word {
        row[l.gen] += if l.inverse { -1 } else { 1 };
    }
    row
}

/// Finitely generated abelian group in invariant-factor form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbelianGroup {
    pub rank: usize,
    /// Invariant factors greater than one, each dividing the next.
    pub torsion: Vec<u64>,
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = vec!["Z".to_string(); self.rank];
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Smith normal form data: diagonal entries and the column transform `Q` with `P A Q = D`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub diagonal: Vec<i64>,
    pub cols: usize,
    pub q: Vec<Vec<i64>>,
}

impl Smith {
    pub fn group(&self) -> AbelianGroup {
        let nonzero: Vec<i64> = self.diagonal.iter().copied().filter(|&d| d != 0).collect();
        AbelianGroup {
            rank: self.cols - nonzero.len(),
            torsion: nonzero.iter().map(|d| d.unsigned_abs()).filter(|&d| d > 1).collect(),
        }
    }

    /// Integer basis of the kernel of the original matrix (columns of `Q` past the pivots).
    pub fn kernel(&self) -> Vec<Vec<i64>> {
        let pivots = self.diagonal.iter().filter(|&&d| d != 0).count();
        (pivots..self.cols).map(|j| (0..self.cols).map(|i| self.q[i][j]).collect()).collect()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn smith(matrix: &[Vec<i64>], cols: usize) -> Smith {
    let mut a: Vec<Vec<i64>> = matrix.to_vec();
    let rows = a.len();
    let mut q: Vec<Vec<i64>> = (0..cols).map(|i| (0..cols).map(|j| (i == j) as i64).collect()).collect();
    let mut diagonal = Vec::new();
    let mut k = 0;
    while k < rows.min(cols) {
        // smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        for row in q.iter_mut() {
            row.swap(k, pj);
        }
        loop {
            let mut clean = true;
            let p = a[k][k];
            for i in (k + 1)..rows {
                let m = a[i][k] / p;
                if m != 0 {
                    for j in k..cols {
                        a[i][j] -= m * a[k][j];
                    }
                }
                if a[i][k] != 0 {
                    clean = false;
                }
            }
            for j in (k + 1)..cols {
                let m = a[k][j] / p;
                if m != 0 {
                    for row in a.iter_mut() {
                        row[j] -= m * row[k];
                    }
                    for row in q.iter_mut() {
                        row[j] -= m * row[k];
                    }
                }
                if a[k][j] != 0 {
                    clean = false;
                }
            }
            if clean {
                // pivot must divide the rest of the block
                let bad = ((k + 1)..rows)
                    .flat_map(|i| ((k + 1)..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| a[i][j] % p != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in k..cols {
                            a[k][j] += a[i][j];
                        }
                    }
                }
            }
            // move the smallest entry of row/column k to the pivot
            let mut best = (k, k);
            for i in k..rows {
                if a[i][k] != 0 && a[i][k].abs() < a[best.0][best.1].abs() {
                    best = (i, k);
                }
            }
            for j in k..cols {
                if a[k][j] != 0 && a[k][j].abs() < a[best.0][best.1].abs() {
                    best = (k, j);
                }
            }
            if best.0 != k {
                a.swap(k, best.0);
            }
            if best.1 != k {
                for row in a.iter_mut() {
                    row.swap(k, best.1);
                }
                for row in q.iter_mut() {
                    row.swap(k, best.1);
                }
            }
        }
        diagonal.push(a[k][k].abs());
        k += 1;
    }
    // enforce the divisibility chain
    let n = diagonal.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let (x, y) = (diagonal[i], diagonal[j]);
            if x != 0 && y % x != 0 {
                let g = gcd(x, y);
                diagonal[i] = g;
                diagonal[j] = x / g * y;
            }
        }
    }
    Smith { diagonal, cols, q }
}

pub fn homology_of_matrix(matrix: &[Vec<i64>], cols: usize) -> AbelianGroup {
    smith(matrix, cols).group()
}

pub fn homology(tri: &Triangulation) -> Result<AbelianGroup, TriError> {
    if tri.is_empty() {
        return Err(TriError::Empty);
    }
    if !tri.is_connected() {
        return Err(TriError::Disconnected);
    }
    let p = Presentation::new(tri);
    Ok(homology_of_matrix(&p.relation_matrix(), p.generators))
}

/// Homology recomputed with the tetrahedron order rotated by `shift`.
pub fn homology_rotated(tri: &Triangulation, shift: usize) -> Result<AbelianGroup, TriError> {
    if tri.is_empty() {
        return Err(TriError::Empty);
    }
    if !tri.is_connected() {
        return Err(TriError::Disconnected);
    }
    let n = tri.size();
    let order: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
    let p = Presentation::with_tree(tri, DualTree::new(tri, &order));
    Ok(homology_of_matrix(&p.relation_matrix(), p.generators))
}
