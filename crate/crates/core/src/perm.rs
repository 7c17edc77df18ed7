use std::fmt;
use std::str::FromStr;

use serde_with::{DeserializeFromStr, SerializeDisplay};

use crate::error::TriError;

/// Permutation of the four corners of a tetrahedron, stored as images of 0..4.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, SerializeDisplay, DeserializeFromStr)]
pub struct Perm(pub [u8; 4]);

pub const IDENTITY: Perm = Perm([0, 1, 2, 3]);

impl Perm {
    pub fn new(images: [u8; 4]) -> Option<Perm> {
        let mut seen = [false; 4];
        for &i in &images {
            if i > 3 || seen[i as usize] {
                return None;
            }
            seen[i as usize] = true;
        }
        Some(Perm(images))
    }

    #[inline]
    pub fn apply(self, i: u8) -> u8 {
        self.0[i as usize]
    }

    /// `self ∘ other`: apply `other` first.
    #[inline]
    pub fn compose(self, other: Perm) -> Perm {
        Perm([
            self.0[other.0[0] as usize],
            self.0[other.0[1] as usize],
            self.0[other.0[2] as usize],
            self.0[other.0[3] as usize],
        ])
    }

    #[inline]
    pub fn inverse(self) -> Perm {
        let mut out = [0u8; 4];
        for i in 0..4u8 {
            out[self.0[i as usize] as usize] = i;
        }
        Perm(out)
    }

    pub fn is_odd(self) -> bool {
        let mut inversions = 0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                if self.0[i] > self.0[j] {
                    inversions += 1;
                }
            }
        }
        inversions % 2 == 1
    }

    pub fn transposition(a: u8, b: u8) -> Perm {
        let mut p = [0, 1, 2, 3];
        p.swap(a as usize, b as usize);
        Perm(p)
    }

    /// All 24 permutations in lexicographic order.
    pub fn all() -> [Perm; 24] {
        let mut out = [IDENTITY; 24];
        let mut k = 0;
        for a in 0..4u8 {
            for b in 0..4u8 {
                for c in 0..4u8 {
                    for d in 0..4u8 {
                        if let Some(p) = Perm::new([a, b, c, d]) {
                            out[k] = p;
                            k += 1;
                        }
                    }
                }
            }
        }
        out
    }

    /// Position in lexicographic order (Lehmer code).
    pub fn index(self) -> usize {
        const FACT: [usize; 4] = [6, 2, 1, 0];
        let mut idx = 0;
        for i in 0..3 {
            let smaller = (i + 1..4).filter(|&j| self.0[j] < self.0[i]).count();
            idx += smaller * FACT[i];
        }
        idx
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}{}", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

impl FromStr for Perm {
    type Err = TriError;

    fn from_str(s: &str) -> Result<Perm, TriError> {
        let bad = || TriError::Parse(format!("bad permutation `{s}`"));
        let digits: Vec<u8> = s
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as u8))
            .collect::<Option<_>>()
            .ok_or_else(bad)?;
        if digits.len() != 4 {
            return Err(bad());
        }
        Perm::new([digits[0], digits[1], digits[2], digits[3]]).ok_or_else(bad)
    }
}

/// Index of the edge {a, b} among the six edges 01 02 03 12 13 23.
#[inline]
pub fn edge_index(a: u8, b: u8) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("not an edge: {a}{b}"),
    }
}

pub const EDGE_ENDS: [(u8, u8); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// The two corners not in `{a, b}`, in increasing order.
#[inline]
pub fn complement(a: u8, b: u8) -> (u8, u8) {
    let mut rest = (0..4u8).filter(|&c| c != a && c != b);
    (rest.next().unwrap(), rest.next().unwrap())
}

/// Corners of face `f` in increasing order.
#[inline]
pub fn face_corners(f: u8) -> [u8; 3] {
    let mut out = [0u8; 3];
    let mut k = 0;
    for c in 0..4u8 {
        if c != f {
            out[k] = c;
            k += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_and_inverse() {
        for p in Perm::all() {
            assert_eq!(p.compose(p.inverse()), IDENTITY);
            assert_eq!(p.inverse().compose(p), IDENTITY);
        }
        let odd = Perm::all().iter().filter(|p| p.is_odd()).count();
        assert_eq!(odd, 12);
        for (i, p) in Perm::all().iter().enumerate() {
            assert_eq!(p.index(), i);
        }
    }

    #[test]
    fn parse_roundtrip() {
        let p: Perm = "1230".parse().unwrap();
        assert_eq!(p.to_string(), "1230");
        assert!("1123".parse::<Perm>().is_err());
        assert!("123".parse::<Perm>().is_err());
    }

    #[test]
    fn edges() {
        for (k, &(a, b)) in EDGE_ENDS.iter().enumerate() {
            assert_eq!(edge_index(a, b), k);
            assert_eq!(edge_index(b, a), k);
        }
        assert_eq!(complement(0, 2), (1, 3));
    }
}
