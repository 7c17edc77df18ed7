//! Möbius transformations and points of the Riemann sphere as projective pairs.

use std::ops::Mul;

use num_complex::Complex64;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// A point `[x : y]` of CP¹; infinity is `[1 : 0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cp1 {
    pub x: C,
    pub y: C,
}

impl Cp1 {
    pub const INFINITY: Cp1 = Cp1 { x: C::new(1.0, 0.0), y: C::new(0.0, 0.0) };

    pub fn finite(z: C) -> Cp1 {
        Cp1 { x: z, y: C::new(1.0, 0.0) }
    }

    pub fn norm(&self) -> f64 {
        (self.x.norm_sqr() + self.y.norm_sqr()).sqrt()
    }

    pub fn normalized(&self) -> Cp1 {
        let n = self.norm();
        // make the larger coordinate real and positive so output is reproducible
        let phase = if self.x.norm() >= self.y.norm() { self.x / self.x.norm() } else { self.y / self.y.norm() };
        Cp1 { x: self.x / (n * phase), y: self.y / (n * phase) }
    }

    /// Affine coordinate, `None` at infinity (relative to `tol`).
    pub fn to_complex(&self, tol: f64) -> Option<C> {
        if self.y.norm() <= tol * self.norm() {
            None
        } else {
            Some(self.x / self.y)
        }
    }

    pub fn is_infinity(&self, tol: f64) -> bool {
        self.to_complex(tol).is_none()
    }

    /// `x1 y2 - y1 x2`.
    pub fn det(&self, other: &Cp1) -> C {
        self.x * other.y - self.y * other.x
    }

    pub fn close(&self, other: &Cp1, tol: f64) -> bool {
        self.det(other).norm() <= tol * self.norm() * other.norm()
    }

    /// Spherical (chordal) distance, in [0, 1].
    pub fn chordal(&self, other: &Cp1) -> f64 {
        self.det(other).norm() / (self.norm() * other.norm())
    }

    /// Lexicographic key: finite points by (re, im), infinity last.
    pub fn lex_key(&self, tol: f64) -> (u8, f64, f64) {
        match self.to_complex(tol) {
            Some(z) => (0, z.re, z.im),
            None => (1, 0.0, 0.0),
        }
    }
}

/// `[[a, b], [c, d]]`, acting by `z -> (a z + b) / (c z + d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: C::new(1.0, 0.0),
        b: C::new(0.0, 0.0),
        c: C::new(0.0, 0.0),
        d: C::new(1.0, 0.0),
    };

    pub fn new(a: C, b: C, c: C, d: C) -> Mat2 {
        Mat2 { a, b, c, d }
    }

    pub fn det(&self) -> C {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C {
        self.a + self.d
    }

    /// Scaled to determinant one.
    pub fn normalized(&self) -> Mat2 {
        let s = self.det().sqrt();
        Mat2 { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s }
    }

    /// Inverse of a determinant-one matrix (adjugate).
    pub fn inv(&self) -> Mat2 {
        let det = self.det();
        Mat2 { a: self.d / det, b: -self.b / det, c: -self.c / det, d: self.a / det }
    }

    pub fn apply(&self, p: &Cp1) -> Cp1 {
        Cp1 { x: self.a * p.x + self.b * p.y, y: self.c * p.x + self.d * p.y }
    }

    pub fn max_norm(&self) -> f64 {
        [self.a, self.b, self.c, self.d].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Distance to `other` in PSL(2, C): the smaller of the distances to `±other`.
    pub fn psl_distance(&self, other: &Mat2) -> f64 {
        let plus = (*self - *other).max_norm();
        let minus = (*self + *other).max_norm();
        plus.min(minus)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.psl_distance(&Mat2::IDENTITY) <= tol
    }

    /// Sends 0, 1, infinity to `p0`, `p1`, `pinf`.
    pub fn from_standard(p0: Cp1, p1: Cp1, pinf: Cp1) -> Mat2 {
        Mat2::to_standard(p0, p1, pinf).inv()
    }

    /// Sends `p0`, `p1`, `pinf` to 0, 1, infinity.
    pub fn to_standard(p0: Cp1, p1: Cp1, pinf: Cp1) -> Mat2 {
        let k1 = p1.det(&pinf);
        let k2 = p1.det(&p0);
        Mat2 { a: k1 * p0.y, b: -k1 * p0.x, c: k2 * pinf.y, d: -k2 * pinf.x }.normalized()
    }

    /// The Möbius map taking three points to three points.
    pub fn from_triples(src: [Cp1; 3], dst: [Cp1; 3]) -> Mat2 {
        Mat2::from_standard(dst[0], dst[1], dst[2]) * Mat2::to_standard(src[0], src[1], src[2])
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other * self.inv() * other.inv()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, o: Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

impl std::ops::Add for Mat2 {
    type Output = Mat2;

    fn add(self, o: Mat2) -> Mat2 {
        Mat2 { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c, d: self.d + o.d }
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, o: Mat2) -> Mat2 {
        Mat2 { a: self.a - o.a, b: self.b - o.b, c: self.c - o.c, d: self.d - o.d }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FixedSet {
    All,
    Points(Vec<Cp1>),
}

/// Fixed points on the sphere: one for parabolics, two otherwise, everything for ±I.
pub fn fixed_points(m: &Mat2, tol: f64) -> FixedSet {
    let m = m.normalized();
    if m.is_identity(tol) {
        return FixedSet::All;
    }
    let tr = m.trace();
    let disc = (tr * tr - 4.0).sqrt();
    let eigvec = |lambda: C| -> Cp1 {
        let v1 = Cp1 { x: m.b, y: lambda - m.a };
        let v2 = Cp1 { x: lambda - m.d, y: m.c };
        if v1.norm() >= v2.norm() { v1.normalized() } else { v2.normalized() }
    };
    if disc.norm() <= tol.sqrt() {
        return FixedSet::Points(vec![eigvec(tr / 2.0)]);
    }
    let p = eigvec((tr + disc) / 2.0);
    let q = eigvec((tr - disc) / 2.0);
    let mut pts = vec![p, q];
    pts.sort_by(|u, v| u.lex_key(tol).partial_cmp(&v.lex_key(tol)).unwrap());
    FixedSet::Points(pts)
}

/// Cross-ratio of four labels in the tetrahedron convention: corners at
/// infinity, 0, 1 give the fourth corner's coordinate.
pub fn cross_ratio(p: &[Cp1; 4]) -> C {
    (p[3].det(&p[1]) * p[2].det(&p[0])) / (p[3].det(&p[0]) * p[2].det(&p[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_positions() {
        let w = c(0.3, 0.8);
        let p = [Cp1::INFINITY, Cp1::finite(c(0.0, 0.0)), Cp1::finite(c(1.0, 0.0)), Cp1::finite(w)];
        assert!((cross_ratio(&p) - w).norm() < 1e-14);
        let src = [Cp1::finite(c(2.0, 1.0)), Cp1::finite(c(-1.0, 0.5)), Cp1::INFINITY];
        let dst = [Cp1::finite(c(0.0, 3.0)), Cp1::INFINITY, Cp1::finite(c(4.0, 0.0))];
        let m = Mat2::from_triples(src, dst);
        for i in 0..3 {
            assert!(m.apply(&src[i]).close(&dst[i], 1e-12));
        }
        assert!((m.det() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn fixed_point_cases() {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let par = Mat2::new(one, one, zero, one);
        assert_eq!(fixed_points(&par, 1e-9), FixedSet::Points(vec![Cp1::INFINITY]));
        let i = c(0.0, 1.0);
        let diag = Mat2::new(i, zero, zero, -i);
        match fixed_points(&diag, 1e-9) {
            FixedSet::Points(p) => {
                assert_eq!(p.len(), 2);
                assert!(p[0].close(&Cp1::finite(zero), 1e-12));
                assert!(p[1].close(&Cp1::INFINITY, 1e-12));
            }
            FixedSet::All => panic!(),
        }
        assert_eq!(fixed_points(&Mat2::IDENTITY, 1e-9), FixedSet::All);
    }
}
