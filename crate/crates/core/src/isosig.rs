//! Canonical signatures: the smallest breadth-first relabelling over every start
//! tetrahedron and start framing.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::perm::{Perm, IDENTITY};
use crate::triangulation::{Triangulation, VertexKind};

/// Signature of the empty triangulation.
pub const EMPTY_SIG: &str = "-";

const ALPHABET: &[u8; 64] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789+-";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IsoSig(pub String);

impl fmt::Display for IsoSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Breadth-first relabelling from `start` with framing `frame`, compared against `best`
/// as it is produced. Returns `None` as soon as the sequence exceeds `best`.
fn encode_from(
    tri: &Triangulation,
    comp: &[usize],
    start: usize,
    frame: Perm,
    best: Option<&[u32]>,
) -> Option<Vec<u32>> {
    let n = tri.size();
    let mut new_index = vec![usize::MAX; n];
    let mut sigma = vec![IDENTITY; n];
    let mut order = Vec::with_capacity(comp.len());
    new_index[start] = 0;
    sigma[start] = frame;
    order.push(start);
    let mut out: Vec<u32> = Vec::with_capacity(comp.len() * 5);
    // once strictly smaller than best we stop comparing
    let mut tied = best.is_some();
    let mut push = |out: &mut Vec<u32>, tok: u32| -> bool {
        if tied {
            let b = best.unwrap()[out.len()];
            match tok.cmp(&b) {
                Ordering::Greater => return false,
                Ordering::Less => tied = false,
                Ordering::Equal => {}
            }
        }
        out.push(tok);
        true
    };
    let mut head = 0;
    while head < order.len() {
        let t = order[head];
        let s = sigma[t];
        let mut mask = 0u32;
        for c in 0..4u8 {
            if tri.corner_kind(t, s.apply(c)) == VertexKind::Material {
                mask |= 1 << c;
            }
        }
        if !push(&mut out, mask) {
            return None;
        }
        for f in 0..4u8 {
            let g = tri.gluing(t, s.apply(f));
            let tok = if new_index[g.tet] == usize::MAX {
                new_index[g.tet] = order.len();
                sigma[g.tet] = g.perm.compose(s);
                order.push(g.tet);
                0
            } else {
                let p = sigma[g.tet].inverse().compose(g.perm).compose(s);
                1 + (new_index[g.tet] * 24 + p.index()) as u32
            };
            if !push(&mut out, tok) {
                return None;
            }
        }
        head += 1;
    }
    Some(out)
}

fn components(tri: &Triangulation) -> Vec<Vec<usize>> {
    let n = tri.size();
    let mut comp_of = vec![usize::MAX; n];
    let mut comps = Vec::new();
    for root in 0..n {
        if comp_of[root] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![root];
        comp_of[root] = id;
        let mut i = 0;
        while i < members.len() {
            let t = members[i];
            for f in 0..4u8 {
                let u = tri.gluing(t, f).tet;
                if comp_of[u] == usize::MAX {
                    comp_of[u] = id;
                    members.push(u);
                }
            }
            i += 1;
        }
        comps.push(members);
    }
    comps
}

fn render(tokens: &[u32], size: usize) -> String {
    let max = 1 + (size * 24) as u32;
    let mut width = 1;
    while 64u64.pow(width) <= max as u64 {
        width += 1;
    }
    let mut s = format!("{size}.");
    for &tok in tokens {
        for k in (0..width).rev() {
            s.push(ALPHABET[((tok >> (6 * k)) & 63) as usize] as char);
        }
    }
    s
}

/// Canonical token sequence of a connected component.
fn canonical_component(tri: &Triangulation, comp: &[usize]) -> Vec<u32> {
    let mut best: Option<Vec<u32>> = None;
    for &start in comp {
        for frame in Perm::all() {
            if let Some(seq) = encode_from(tri, comp, start, frame, best.as_deref()) {
                if best.as_ref().is_none_or(|b| seq < *b) {
                    best = Some(seq);
                }
            }
        }
    }
    best.unwrap_or_default()
}

pub fn isosig(tri: &Triangulation) -> IsoSig {
    if tri.is_empty() {
        return IsoSig(EMPTY_SIG.to_string());
    }
    let mut parts: Vec<String> = components(tri)
        .iter()
        .map(|c| render(&canonical_component(tri, c), c.len()))
        .collect();
    parts.sort();
    IsoSig(parts.join("+"))
}
