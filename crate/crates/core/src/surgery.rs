//! Cut-and-reglue engine shared by all moves, carrying corner labels and face cocycles along.

use std::collections::HashMap;

use crate::error::TriError;
use crate::mobius::{Cp1, Mat2};
use crate::perm::{Perm, IDENTITY};
use crate::triangulation::{orientation_flips, Gluing, Triangulation, VertexKind};

/// Per-face transition matrices and per-corner labels.
///
/// Across face `f` of `t`, glued to `t'` by `p`, labels satisfy
/// `L[t'][p(v)] = g[t][f] · L[t][v]`. Material corners carry no label.
#[derive(Clone, Debug)]
pub struct Frames {
    pub g: Vec<[Mat2; 4]>,
    pub labels: Vec<[Option<Cp1>; 4]>,
}

impl Frames {
    pub fn trivial(n: usize) -> Frames {
        Frames { g: vec![[Mat2::IDENTITY; 4]; n], labels: vec![[None; 4]; n] }
    }

    /// Largest chordal mismatch of shared corner labels across faces.
    pub fn compatibility_residual(&self, tri: &Triangulation) -> f64 {
        let mut worst: f64 = 0.0;
        for t in 0..tri.size() {
            for f in 0..4u8 {
                let gl = tri.gluing(t, f);
                for v in (0..4u8).filter(|&v| v != f) {
                    if let (Some(a), Some(b)) =
                        (self.labels[t][v as usize], self.labels[gl.tet][gl.perm.apply(v) as usize])
                    {
                        let moved = self.g[t][f as usize].apply(&a);
                        worst = worst.max(moved.chordal(&b));
                    }
                }
            }
        }
        worst
    }

    fn relabel(&mut self, sigma: &[Perm]) {
        for (t, s) in sigma.iter().enumerate() {
            let g = self.g[t];
            let l = self.labels[t];
            for c in 0..4u8 {
                self.g[t][c as usize] = g[s.apply(c) as usize];
                self.labels[t][c as usize] = l[s.apply(c) as usize];
            }
        }
    }
}

/// A triangulation with optional label data.
#[derive(Clone, Debug)]
pub struct Decorated {
    pub tri: Triangulation,
    pub frames: Option<Frames>,
}

impl Decorated {
    pub fn plain(tri: Triangulation) -> Decorated {
        Decorated { tri, frames: None }
    }

    pub fn label(&self, tet: usize, corner: u8) -> Option<Cp1> {
        self.frames.as_ref().and_then(|f| f.labels[tet][corner as usize])
    }

    pub fn g(&self, tet: usize, face: u8) -> Mat2 {
        self.frames.as_ref().map_or(Mat2::IDENTITY, |f| f.g[tet][face as usize])
    }

    /// Tetrahedra renumbered by `order` with corners relabelled by `sigma`, frames following.
    pub fn relabelled(&self, order: &[usize], sigma: &[Perm]) -> Decorated {
        let tri = self.tri.relabelled(order, sigma);
        let frames = self.frames.as_ref().map(|f| {
            let mut out = Frames {
                g: order.iter().map(|&o| f.g[o]).collect(),
                labels: order.iter().map(|&o| f.labels[o]).collect(),
            };
            out.relabel(sigma);
            out
        });
        Decorated { tri, frames }
    }

    /// Fills missing labels on ideal corners by transporting known ones across faces.
    pub fn propagate_labels(&mut self) {
        let Some(frames) = self.frames.as_mut() else { return };
        let tri = &self.tri;
        let mut stack: Vec<(usize, u8)> = Vec::new();
        for t in 0..tri.size() {
            for v in 0..4u8 {
                if frames.labels[t][v as usize].is_some() {
                    stack.push((t, v));
                }
            }
        }
        while let Some((t, v)) = stack.pop() {
            let l = frames.labels[t][v as usize].unwrap();
            for f in (0..4u8).filter(|&f| f != v) {
                let gl = tri.gluing(t, f);
                let w = gl.perm.apply(v);
                if frames.labels[gl.tet][w as usize].is_none()
                    && tri.corner_kind(gl.tet, w) == VertexKind::Ideal
                {
                    frames.labels[gl.tet][w as usize] = Some(frames.g[t][f as usize].apply(&l).normalized());
                    stack.push((gl.tet, w));
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Source {
    /// Copy of an existing corner, whose tetrahedron sits at `frame` relative to the new ones.
    Old { tet: usize, corner: u8, frame: Mat2 },
    /// A new material corner.
    Fresh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum End {
    New(usize),
    Old(usize),
}

/// A local rewrite. New tetrahedra live in a common reference frame; `removed` gives,
/// per deleted tetrahedron, the matrix taking reference labels to its own.
#[derive(Clone, Debug, Default)]
pub(crate) struct Surgery {
    pub removed: Vec<(usize, Mat2)>,
    pub new_tets: Vec<[Source; 4]>,
    /// New face takes over a removed face; the perm maps new corners to old corners.
    pub replace: Vec<((usize, u8), (usize, u8), Perm)>,
    /// Two removed faces whose outer neighbours are glued together; perm maps first to second.
    pub bridge: Vec<((usize, u8), (usize, u8), Perm)>,
    /// Explicit gluing from a new face to a face (new or kept), with perm and matrix.
    pub direct: Vec<((usize, u8), (End, u8), Perm, Mat2)>,
}

#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub dec: Decorated,
    pub old_to_new: Vec<Option<usize>>,
    /// Output index of each new tetrahedron.
    pub new_index: Vec<usize>,
    /// Output relabelling: new corner `c` of tet `i` was corner `sigma[i][c]` before orientation repair.
    pub sigma: Vec<Perm>,
}

#[derive(Debug)]
pub(crate) enum SurgeryFailure {
    Invalid(TriError),
    Unresolved(usize, u8),
    NoTetrahedra,
}

impl Surgery {
    pub fn apply(&self, dec: &Decorated) -> Result<Outcome, SurgeryFailure> {
        let tri = &dec.tri;
        let n = tri.size();
        let with_frames = dec.frames.is_some();
        let mut frame_of: HashMap<usize, Mat2> = HashMap::new();
        for &(r, m) in &self.removed {
            frame_of.insert(r, m);
        }
        let is_removed = |t: usize| frame_of.contains_key(&t);
        let mut old_to_new = vec![None; n];
        let mut kept = Vec::new();
        for t in 0..n {
            if !is_removed(t) {
                old_to_new[t] = Some(kept.len());
                kept.push(t);
            }
        }
        let base = kept.len();
        let total = base + self.new_tets.len();
        if total == 0 {
            return Err(SurgeryFailure::NoTetrahedra);
        }
        let new_index: Vec<usize> = (0..self.new_tets.len()).map(|i| base + i).collect();
        let placeholder = Gluing { tet: usize::MAX, perm: IDENTITY };
        let mut tets = vec![[placeholder; 4]; total];
        let mut gs = vec![[Mat2::IDENTITY; 4]; total];
        let mut labels: Vec<[Option<Cp1>; 4]> = vec![[None; 4]; total];
        let mut kinds = vec![[VertexKind::Ideal; 4]; total];

        for (i, &t) in kept.iter().enumerate() {
            kinds[i] = tri.corner_kinds()[t];
            if let Some(fr) = &dec.frames {
                labels[i] = fr.labels[t];
            }
        }
        for (i, src) in self.new_tets.iter().enumerate() {
            for c in 0..4 {
                match src[c] {
                    Source::Old { tet, corner, frame } => {
                        kinds[base + i][c] = tri.corner_kind(tet, corner);
                        if let Some(l) = dec.label(tet, corner) {
                            labels[base + i][c] = Some(frame.inv().apply(&l).normalized());
                        }
                    }
                    Source::Fresh => kinds[base + i][c] = VertexKind::Material,
                }
            }
        }

        let mut replace_of: HashMap<(usize, u8), ((usize, u8), Perm)> = HashMap::new();
        for &(nf, rf, phi) in &self.replace {
            replace_of.insert(rf, (nf, phi));
        }
        let mut bridge_of: HashMap<(usize, u8), ((usize, u8), Perm)> = HashMap::new();
        for &(a, b, psi) in &self.bridge {
            bridge_of.insert(a, (b, psi));
            bridge_of.insert(b, (a, psi.inverse()));
        }
        let mut overridden: HashMap<(usize, u8), ()> = HashMap::new();

        let out_of = |e: End| match e {
            End::New(i) => base + i,
            End::Old(t) => old_to_new[t].expect("kept tetrahedron"),
        };

        // Follows removed faces until reaching a kept face or a new face.
        let resolve = |mut perm: Perm, mut mat: Mat2, mut at: (usize, u8)| {
            for _ in 0..=(4 * n) {
                let (r, f) = at;
                let t_r = frame_of[&r];
                if let Some(&((m, _), phi)) = replace_of.get(&(r, f)) {
                    return Ok((End::New(m), phi.inverse().compose(perm), t_r.inv() * mat));
                }
                if let Some(&((r2, f2), psi)) = bridge_of.get(&(r, f)) {
                    perm = psi.compose(perm);
                    if with_frames {
                        mat = frame_of[&r2] * t_r.inv() * mat;
                    }
                    let gl = tri.gluing(r2, f2);
                    perm = gl.perm.compose(perm);
                    if with_frames {
                        mat = dec.g(r2, f2) * mat;
                    }
                    at = (gl.tet, gl.perm.apply(f2));
                    if !is_removed(gl.tet) {
                        return Ok((End::Old(gl.tet), perm, mat));
                    }
                    continue;
                }
                return Err(SurgeryFailure::Unresolved(r, f));
            }
            Err(SurgeryFailure::Unresolved(at.0, at.1))
        };

        for &((i, h), (target, k), perm, g) in &self.direct {
            let a = base + i;
            let b = out_of(target);
            tets[a][h as usize] = Gluing { tet: b, perm };
            gs[a][h as usize] = g;
            tets[b][k as usize] = Gluing { tet: a, perm: perm.inverse() };
            gs[b][k as usize] = g.inv();
            if let End::Old(t) = target {
                overridden.insert((t, k), ());
            }
        }

        for &((i, h), (r, f), phi) in &self.replace {
            let gl = tri.gluing(r, f);
            let perm = gl.perm.compose(phi);
            let mat = dec.g(r, f) * frame_of[&r];
            let at = (gl.tet, gl.perm.apply(f));
            let (end, perm, mat) =
                if is_removed(gl.tet) { resolve(perm, mat, at)? } else { (End::Old(gl.tet), perm, mat) };
            let a = base + i;
            tets[a][h as usize] = Gluing { tet: out_of(end), perm };
            gs[a][h as usize] = mat;
        }

        for &t in &kept {
            let a = old_to_new[t].unwrap();
            for f in 0..4u8 {
                if overridden.contains_key(&(t, f)) {
                    continue;
                }
                let gl = tri.gluing(t, f);
                let g0 = dec.g(t, f);
                let (end, perm, mat) = if is_removed(gl.tet) {
                    resolve(gl.perm, g0, (gl.tet, gl.perm.apply(f)))?
                } else {
                    (End::Old(gl.tet), gl.perm, g0)
                };
                tets[a][f as usize] = Gluing { tet: out_of(end), perm };
                gs[a][f as usize] = mat;
            }
        }

        for (t, row) in tets.iter().enumerate() {
            for (f, gl) in row.iter().enumerate() {
                if gl.tet == usize::MAX {
                    return Err(SurgeryFailure::Invalid(TriError::Dangling { tet: t, face: f as u8 }));
                }
            }
        }

        let mut sigma = vec![IDENTITY; total];
        if tri.is_oriented() {
            if let Some(s) = orientation_flips(&tets) {
                sigma = s;
                let (t2, k2) = crate::triangulation::relabel(&tets, &kinds, &sigma);
                tets = t2;
                kinds = k2;
            }
        }
        let out = Triangulation::new(tets, kinds).map_err(SurgeryFailure::Invalid)?;
        let frames = if with_frames {
            let mut fr = Frames { g: gs, labels };
            fr.relabel(&sigma);
            Some(fr)
        } else {
            None
        };
        Ok(Outcome { dec: Decorated { tri: out, frames }, old_to_new, new_index, sigma })
    }
}

impl Outcome {
    /// Output corner of new tetrahedron `i` that was corner `c` in the surgery's description.
    pub fn new_corner(&self, i: usize, c: u8) -> (usize, u8) {
        let t = self.new_index[i];
        (t, self.sigma[t].inverse().apply(c))
    }

    pub fn old_corner(&self, tet: usize, c: u8) -> Option<(usize, u8)> {
        self.old_to_new[tet].map(|t| (t, self.sigma[t].inverse().apply(c)))
    }
}
