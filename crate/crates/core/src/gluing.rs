//! Gluing equations, a log-coordinate Newton solver, shapes from labels, holonomy from
//! shapes and volume.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cusp::{cyclically_reduce, peripheral_loops, turns};
use crate::homology::DualTree;
use crate::holonomy::{generator_name, Representation, DEFAULT_TOLERANCE};
use crate::mobius::{c, cross_ratio, Cp1, Mat2, C};
use crate::perm::{edge_index, Perm};
use crate::surgery::{Decorated, Frames};
use crate::triangulation::{Triangulation, VertexKind};

pub const DEGENERACY: f64 = 1e-8;
pub const CONVERGED: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GluingError {
    #[error("triangulation is not oriented")]
    NotOriented,
    #[error("triangulation has material vertices")]
    NotIdeal,
    #[error("tetrahedron {0} has a degenerate shape")]
    Degenerate(usize),
    #[error("tetrahedron {0} has two equal corner labels")]
    RepeatedLabel(usize),
    #[error("corner {corner} of tetrahedron {tet} carries no label")]
    Unlabelled { tet: usize, corner: u8 },
    #[error("shape vector has {got} entries, expected {want}")]
    WrongLength { got: usize, want: usize },
}

/// Which shape parameter lives on the tetrahedron edge `{a, b}`: 0 for `z`, 1 for `z'`, 2 for `z''`.
pub fn parameter_of(a: u8, b: u8) -> usize {
    [0, 1, 2, 2, 1, 0][edge_index(a, b)]
}

/// Exponents of `(z, z', z'')` per tetrahedron.
pub type Row = Vec<[i64; 3]>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CuspRow {
    pub cusp: usize,
    pub row: Row,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GluingSystem {
    pub tets: usize,
    pub edges: Vec<Row>,
    pub completeness: Vec<CuspRow>,
}

pub fn gluing_system(tri: &Triangulation) -> Result<GluingSystem, GluingError> {
    if !tri.is_oriented() {
        return Err(GluingError::NotOriented);
    }
    if !tri.is_ideal() {
        return Err(GluingError::NotIdeal);
    }
    let n = tri.size();
    let edges = tri
        .edges()
        .iter()
        .map(|e| {
            let mut row = vec![[0i64; 3]; n];
            for s in &e.steps {
                row[s.tet][parameter_of(s.a, s.b)] += 1;
            }
            row
        })
        .collect();
    let mut completeness = Vec::new();
    for v in tri.vertices() {
        for lp in peripheral_loops(tri, v.id) {
            let lp = cyclically_reduce(tri, &lp);
            let mut row = vec![[0i64; 3]; n];
            for (t, corner, entry, exit) in turns(tri, &lp) {
                let other = (0..4u8).find(|&x| x != corner && x != entry && x != exit).unwrap();
                let sign = if Perm([corner, other, exit, entry]).is_odd() { -1 } else { 1 };
                row[t][parameter_of(corner, other)] += sign;
            }
            completeness.push(CuspRow { cusp: v.id, row });
        }
    }
    Ok(GluingSystem { tets: n, edges, completeness })
}

/// One shape per tetrahedron, the cross-ratio at edges 01 and 23.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapeVector {
    pub z: Vec<C>,
}

impl ShapeVector {
    pub fn uniform(n: usize, z: C) -> ShapeVector {
        ShapeVector { z: vec![z; n] }
    }

    /// `[z, z', z'']` of tetrahedron `t`.
    pub fn params(&self, t: usize) -> [C; 3] {
        let z = self.z[t];
        let one = c(1.0, 0.0);
        [z, one / (one - z), one - one / z]
    }

    /// Tetrahedra whose shape is within the degeneracy threshold of 0, 1 or infinity.
    pub fn degenerate(&self) -> Vec<usize> {
        (0..self.z.len())
            .filter(|&t| {
                let z = self.z[t];
                !z.is_finite() || z.norm() < DEGENERACY || (z - 1.0).norm() < DEGENERACY || z.norm() > 1.0 / DEGENERACY
            })
            .collect()
    }

    pub fn conj(&self) -> ShapeVector {
        ShapeVector { z: self.z.iter().map(|z| z.conj()).collect() }
    }
}

fn row_log(row: &Row, logs: &[[C; 3]]) -> C {
    let mut s = c(0.0, 0.0);
    for (t, e) in row.iter().enumerate() {
        for k in 0..3 {
            if e[k] != 0 {
                s += logs[t][k] * e[k] as f64;
            }
        }
    }
    s
}

fn logs_of(z: &[C]) -> Vec<[C; 3]> {
    let one = c(1.0, 0.0);
    z.iter().map(|&z| [z.ln(), -(one - z).ln(), (one - one / z).ln()]).collect()
}

impl GluingSystem {
    fn rows(&self, complete: bool) -> Vec<&Row> {
        let mut rows: Vec<&Row> = self.edges.iter().collect();
        if complete {
            rows.extend(self.completeness.iter().map(|r| &r.row));
        }
        rows
    }

    /// Sums of principal logarithms per row.
    pub fn log_sums(&self, z: &ShapeVector, complete: bool) -> Vec<C> {
        let logs = logs_of(&z.z);
        self.rows(complete).into_iter().map(|r| row_log(r, &logs)).collect()
    }

    /// Default right-hand sides: `2 pi i` for edges, 0 for completeness.
    pub fn default_targets(&self, complete: bool) -> Vec<C> {
        let mut t = vec![c(0.0, 2.0 * PI); self.edges.len()];
        if complete {
            t.extend(std::iter::repeat(c(0.0, 0.0)).take(self.completeness.len()));
        }
        t
    }

    /// Right-hand sides matching the branches of `seed`.
    pub fn targets_from(&self, seed: &ShapeVector, complete: bool) -> Vec<C> {
        self.log_sums(seed, complete)
            .into_iter()
            .map(|s| c(0.0, 2.0 * PI * (s.im / (2.0 * PI)).round()))
            .collect()
    }

    pub fn residuals(&self, z: &ShapeVector, targets: &[C], complete: bool) -> Vec<C> {
        self.log_sums(z, complete).into_iter().zip(targets).map(|(s, t)| s - t).collect()
    }

    /// Derivatives of the row sums with respect to `log z` per tetrahedron.
    pub fn jacobian(&self, z: &ShapeVector, complete: bool) -> DMatrix<C> {
        let rows = self.rows(complete);
        let one = c(1.0, 0.0);
        let d: Vec<[C; 3]> = z.z.iter().map(|&z| [one, z / (one - z), one / (z - one)]).collect();
        DMatrix::from_fn(rows.len(), self.tets, |i, t| {
            let e = rows[i][t];
            d[t][0] * e[0] as f64 + d[t][1] * e[1] as f64 + d[t][2] * e[2] as f64
        })
    }

    pub fn completeness_residual(&self, z: &ShapeVector) -> f64 {
        let logs = logs_of(&z.z);
        self.completeness.iter().map(|r| (row_log(&r.row, &logs).exp() - 1.0).norm()).fold(0.0, f64::max)
    }

    /// Multiplicative residual: largest `|prod - 1|` over rows.
    pub fn product_residual(&self, z: &ShapeVector, complete: bool) -> f64 {
        self.log_sums(z, complete).iter().map(|s| (s.exp() - 1.0).norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub complete: bool,
    pub start: Option<ShapeVector>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { restarts: 64, seed: 0, max_iterations: 100, complete: true, start: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    pub shapes: ShapeVector,
    pub edge_residual: f64,
    pub completeness_residual: f64,
    pub iterations: usize,
    pub attempt: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveFailure {
    pub attempts: usize,
    pub last_residual: f64,
    /// Tetrahedra that collapsed in the best attempt.
    pub degenerate: Vec<usize>,
    pub singular_jacobian: bool,
}

enum RunEnd {
    Converged(ShapeVector, usize),
    Failed { residual: f64, z: ShapeVector, singular: bool },
}

fn norm(r: &[C]) -> f64 {
    r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// With `targets` unset the branch of every equation is re-read from the current iterate,
/// so only the products are driven to 1.
fn newton(sys: &GluingSystem, start: ShapeVector, targets: Option<&[C]>, complete: bool, max_it: usize) -> RunEnd {
    let residuals = |z: &ShapeVector| match targets {
        Some(t) => sys.residuals(z, t, complete),
        None => sys.residuals(z, &sys.targets_from(z, complete), complete),
    };
    let mut z = start;
    let mut r = residuals(&z);
    let mut rn = norm(&r);
    for it in 0..=max_it {
        if !z.degenerate().is_empty() {
            return RunEnd::Failed { residual: rn, z, singular: false };
        }
        if r.iter().all(|x| x.norm() < CONVERGED) {
            return RunEnd::Converged(z, it);
        }
        if it == max_it {
            break;
        }
        let j = sys.jacobian(&z, complete);
        let svd = j.svd(true, true);
        if svd.singular_values.iter().all(|&s| s < 1e-14) {
            return RunEnd::Failed { residual: rn, z, singular: true };
        }
        let rhs = DVector::from_iterator(r.len(), r.iter().map(|x| -x));
        let Ok(step) = svd.solve(&rhs, 1e-10) else {
            return RunEnd::Failed { residual: rn, z, singular: true };
        };
        let mut t = 1.0;
        loop {
            let cand = ShapeVector { z: z.z.iter().zip(step.iter()).map(|(zi, s)| zi * (s * t).exp()).collect() };
            let cr = residuals(&cand);
            let cn = norm(&cr);
            if cn.is_finite() && (cn < rn || t < 1e-3) {
                z = cand;
                r = cr;
                rn = cn;
                break;
            }
            t *= 0.5;
        }
    }
    RunEnd::Failed { residual: rn, z, singular: false }
}

fn seed_vector(n: usize, attempt: usize, seed: u64) -> ShapeVector {
    let base = C::from_polar(1.0, PI / 3.0);
    if attempt == 0 {
        return ShapeVector::uniform(n, base);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (attempt as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    ShapeVector { z: (0..n).map(|_| c(rng.gen_range(-1.0..2.0), rng.gen_range(0.1..2.0))).collect() }
}

/// Newton iteration in log-shape coordinates with restarts. With a start vector the
/// branch of every equation is taken from it.
pub fn solve(sys: &GluingSystem, opts: &SolveOptions) -> Result<Solution, SolveFailure> {
    let complete = opts.complete;
    let n = sys.tets;
    let finish = |z: ShapeVector, iterations: usize, attempt: usize| {
        let edge_residual = sys.product_residual(&z, false);
        let completeness_residual = sys.completeness_residual(&z);
        Solution { shapes: z, edge_residual, completeness_residual, iterations, attempt }
    };
    if let Some(start) = &opts.start {
        let targets = sys.targets_from(start, complete);
        return match newton(sys, start.clone(), Some(&targets), complete, opts.max_iterations) {
            RunEnd::Converged(z, it) => Ok(finish(z, it, 0)),
            RunEnd::Failed { residual, z, singular } => Err(SolveFailure {
                attempts: 1,
                last_residual: residual,
                degenerate: z.degenerate(),
                singular_jacobian: singular,
            }),
        };
    }
    let targets = sys.default_targets(complete);
    let runs = opts.restarts.max(1);
    let found = (0..runs).into_par_iter().find_map_first(|a| {
        match newton(sys, seed_vector(n, a, opts.seed), Some(&targets), complete, opts.max_iterations) {
            RunEnd::Converged(z, it) => Some(finish(z, it, a)),
            RunEnd::Failed { .. } => None,
        }
    });
    if let Some(s) = found {
        return Ok(s);
    }
    let mut best: Option<SolveFailure> = None;
    for a in 0..runs.min(8) {
        for floating in [false, true] {
            let t = (!floating).then_some(targets.as_slice());
            if let RunEnd::Failed { residual, z, singular } =
                newton(sys, seed_vector(n, a, opts.seed), t, complete, opts.max_iterations)
            {
                let degenerate = z.degenerate();
                let better = best.as_ref().is_none_or(|b| {
                    (!degenerate.is_empty() && b.degenerate.is_empty())
                        || (degenerate.is_empty() == b.degenerate.is_empty() && residual < b.last_residual)
                });
                if better {
                    best = Some(SolveFailure { attempts: runs, last_residual: residual, degenerate, singular_jacobian: singular });
                }
            }
        }
    }
    Err(best.unwrap_or(SolveFailure { attempts: runs, last_residual: f64::NAN, degenerate: vec![], singular_jacobian: false }))
}

/// Cross-ratio of the four corner labels of every tetrahedron.
pub fn shapes_from_labels(dec: &Decorated) -> Result<ShapeVector, GluingError> {
    let mut z = Vec::with_capacity(dec.tri.size());
    for t in 0..dec.tri.size() {
        let mut p = [Cp1::INFINITY; 4];
        for v in 0..4u8 {
            p[v as usize] = dec.label(t, v).ok_or(GluingError::Unlabelled { tet: t, corner: v })?;
        }
        for a in 0..4 {
            for b in a + 1..4 {
                if p[a].chordal(&p[b]) <= DEGENERACY {
                    return Err(GluingError::RepeatedLabel(t));
                }
            }
        }
        z.push(cross_ratio(&p));
    }
    Ok(ShapeVector { z })
}

fn standard_position(z: C) -> [Cp1; 4] {
    [Cp1::INFINITY, Cp1::finite(c(0.0, 0.0)), Cp1::finite(c(1.0, 0.0)), Cp1::finite(z)]
}

/// Places the tetrahedra one at a time along the dual spanning tree.
pub fn develop_shapes(tri: &Triangulation, z: &ShapeVector, tree: &DualTree) -> Result<Vec<[Cp1; 4]>, GluingError> {
    if !tri.is_ideal() {
        return Err(GluingError::NotIdeal);
    }
    let n = tri.size();
    if z.z.len() != n {
        return Err(GluingError::WrongLength { got: z.z.len(), want: n });
    }
    if let Some(&t) = z.degenerate().first() {
        return Err(GluingError::Degenerate(t));
    }
    let mut labels: Vec<Option<[Cp1; 4]>> = vec![None; n];
    if n == 0 {
        return Ok(Vec::new());
    }
    labels[tree.root] = Some(standard_position(z.z[tree.root]));
    let mut queue = VecDeque::from([tree.root]);
    while let Some(t) = queue.pop_front() {
        let lt = labels[t].unwrap();
        for f in 0..4u8 {
            let gl = tri.gluing(t, f);
            if !tree.is_tree_face(t, f) || labels[gl.tet].is_some() {
                continue;
            }
            let std = standard_position(z.z[gl.tet]);
            let known: Vec<u8> = (0..4u8).filter(|&v| v != f).collect();
            let src = [0, 1, 2].map(|i| std[gl.perm.apply(known[i]) as usize]);
            let dst = [0, 1, 2].map(|i| lt[known[i] as usize]);
            let m = Mat2::from_triples(src, dst);
            labels[gl.tet] = Some(std.map(|p| m.apply(&p).normalized()));
            queue.push_back(gl.tet);
        }
    }
    Ok(labels.into_iter().map(|l| l.expect("connected")).collect())
}

/// The holonomy of a shape vector, with anchors at the developed base corners.
pub fn holonomy_from_shapes(tri: &Triangulation, z: &ShapeVector) -> Result<Representation, GluingError> {
    let tree = DualTree::standard(tri);
    let labels = develop_shapes(tri, z, &tree)?;
    let mut generators = BTreeMap::new();
    for (i, &(t, f)) in tree.generators.iter().enumerate() {
        let gl = tri.gluing(t, f);
        let known: Vec<u8> = (0..4u8).filter(|&v| v != f).collect();
        let src = [0, 1, 2].map(|k| labels[t][known[k] as usize]);
        let dst = [0, 1, 2].map(|k| labels[gl.tet][gl.perm.apply(known[k]) as usize]);
        generators.insert(generator_name(i), Mat2::from_triples(src, dst).inv());
    }
    let anchors = tri
        .vertices()
        .iter()
        .filter(|v| v.kind == VertexKind::Ideal)
        .map(|v| (v.id, labels[v.corners[0].0][v.corners[0].1 as usize]))
        .collect();
    Ok(Representation { generators, anchors, tolerance: DEFAULT_TOLERANCE })
}

/// Developed placements as decorated labels, with frames in the tree gauge.
pub fn labels_from_shapes(tri: &Triangulation, z: &ShapeVector) -> Result<Decorated, GluingError> {
    let tree = DualTree::standard(tri);
    let placed = develop_shapes(tri, z, &tree)?;
    let rep = holonomy_from_shapes(tri, z)?;
    let images = rep.images_for(tree.generators.len()).expect("all generators present");
    let g = crate::holonomy::tree_frames(tri, &tree, &images);
    let labels = placed.iter().map(|p| p.map(Some)).collect();
    Ok(Decorated { tri: tri.clone(), frames: Some(Frames { g, labels }) })
}

fn zeta_even(k: usize) -> f64 {
    match k {
        1 => PI * PI / 6.0,
        2 => PI.powi(4) / 90.0,
        _ => {
            let s = 2 * k as i32;
            let mut sum = 0.0;
            for n in (1..=2000).rev() {
                sum += (n as f64).powi(-s);
            }
            sum
        }
    }
}

/// `B_{2k}` from the zeta values.
fn bernoulli_even(k: usize) -> f64 {
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    let mut fact = 1.0;
    for i in 1..=2 * k {
        fact *= i as f64;
    }
    sign * 2.0 * fact * zeta_even(k) / (2.0 * PI).powi(2 * k as i32)
}

fn li2_bernoulli(z: C) -> C {
    let u = -(c(1.0, 0.0) - z).ln();
    let mut sum = u - u * u / 4.0;
    let mut power = u;
    let mut fact = 1.0;
    for k in 1..=30 {
        let n = 2 * k;
        power *= u * u;
        fact *= (n as f64) * (n as f64 + 1.0);
        let term = power * (bernoulli_even(k) / fact);
        sum += term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    sum
}

/// Bloch-Wigner dilogarithm, by reduction to `|z| <= 1`, `Re z <= 1/2` and a Bernoulli series.
pub fn bloch_wigner(z: C) -> f64 {
    if z.im == 0.0 || (z - 1.0).norm() == 0.0 || z.norm() == 0.0 {
        return 0.0;
    }
    if z.norm() > 1.0 {
        return -bloch_wigner(c(1.0, 0.0) / z);
    }
    if z.re > 0.5 {
        return -bloch_wigner(c(1.0, 0.0) - z);
    }
    li2_bernoulli(z).im + (c(1.0, 0.0) - z).arg() * z.norm().ln()
}

/// Lobachevsky function.
pub fn lobachevsky(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(PI);
    if t > PI / 2.0 {
        t -= PI;
    }
    if t == 0.0 {
        return 0.0;
    }
    let mut sum = t * (1.0 - (2.0 * t.abs()).ln());
    let mut fact = 1.0;
    for n in 1..=30usize {
        fact *= ((2 * n - 1) * 2 * n) as f64;
        let term = (-1f64).powi(n as i32) * 2f64.powi(2 * n as i32 - 1) * bernoulli_even(n) * t.powi(2 * n as i32 + 1)
            / (n as f64 * fact * (2 * n + 1) as f64);
        sum -= term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// Bloch-Wigner dilogarithm as the sum of Lobachevsky values of the three dihedral angles.
pub fn bloch_wigner_angles(z: C) -> f64 {
    if z.im == 0.0 {
        return 0.0;
    }
    let (w, sign) = if z.im < 0.0 { (z.conj(), -1.0) } else { (z, 1.0) };
    let one = c(1.0, 0.0);
    sign * (lobachevsky(w.arg()) + lobachevsky((one / (one - w)).arg()) + lobachevsky((one - one / w).arg()))
}

/// Sum of Bloch-Wigner values.
pub fn volume(z: &ShapeVector) -> Result<f64, GluingError> {
    if let Some(&t) = z.degenerate().first() {
        return Err(GluingError::Degenerate(t));
    }
    Ok(z.z.iter().map(|&w| bloch_wigner(w)).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SolutionVerdict {
    Essential { solution: Solution },
    NotCertified { failure: SolveFailure },
}

/// Looks for a nondegenerate solution of the edge equations; failure is never read as
/// inessential.
pub fn essential_via_solution(tri: &Triangulation, opts: &SolveOptions) -> Result<SolutionVerdict, GluingError> {
    let sys = gluing_system(tri)?;
    let opts = SolveOptions { complete: false, ..opts.clone() };
    Ok(match solve(&sys, &opts) {
        Ok(solution) => SolutionVerdict::Essential { solution },
        Err(failure) => SolutionVerdict::NotCertified { failure },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_values() {
        assert!((bernoulli_even(1) - 1.0 / 6.0).abs() < 1e-15);
        assert!((bernoulli_even(2) + 1.0 / 30.0).abs() < 1e-15);
        assert!((bernoulli_even(3) - 1.0 / 42.0).abs() < 1e-15);
        assert!((bernoulli_even(6) - 691.0 / 2730.0 * -1.0).abs() < 1e-13);
    }

    #[test]
    fn dilog_paths_agree_near_the_unit_circle() {
        for k in 1..40 {
            let z = C::from_polar(0.3 + 0.05 * k as f64, 0.15 * k as f64);
            assert!((bloch_wigner(z) - bloch_wigner_angles(z)).abs() < 1e-12, "{z}");
        }
    }
}
