//! Bounded breadth-first exploration of the 2-3/3-2/0-2/2-0 move graph, keeping only
//! triangulations that pass an essentiality test.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gluing::{essential_via_solution, SolutionVerdict, SolveOptions};
use crate::holonomy::l_essential_check;
use crate::homology::homology;
use crate::isosig::{isosig, IsoSig};
use crate::moves::{legal_moves, Move, MoveKind};
use crate::surgery::Decorated;

pub const SEARCH_KINDS: [MoveKind; 4] = [MoveKind::TwoThree, MoveKind::ThreeTwo, MoveKind::ZeroTwo, MoveKind::TwoZero];

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("triangulation has material vertices")]
    NotIdeal,
    #[error("first homology differs: {0} vs {1}")]
    HomologyMismatch(String, String),
    #[error("budget must be positive")]
    ZeroBudget,
    #[error("could not replay the step to {0}")]
    Replay(String),
    #[error("{0}")]
    Invalid(String),
}

/// Which triangulations count as essential.
#[derive(Clone, Debug)]
pub enum Filter {
    /// Every edge joins differently labelled ends, using the carried labels.
    Labels { tol: f64 },
    /// The edge equations have a solution with no degenerate shape.
    Solutions(SolveOptions),
    Everything,
}

impl Filter {
    pub fn accepts(&self, dec: &Decorated) -> bool {
        match self {
            Filter::Labels { tol } => l_essential_check(dec, *tol).is_ok_and(|r| r.is_essential()),
            Filter::Solutions(opts) => {
                matches!(essential_via_solution(&dec.tri, opts), Ok(SolutionVerdict::Essential { .. }))
            }
            Filter::Everything => true,
        }
    }
}

/// Results of every legal 2-3, 3-2, 0-2 and 2-0 move that pass the filter, in a fixed order.
pub fn neighbors(dec: &Decorated, filter: &Filter) -> Result<Vec<(Move, Decorated)>, SearchError> {
    if !dec.tri.is_ideal() {
        return Err(SearchError::NotIdeal);
    }
    let mut out = Vec::new();
    for kind in SEARCH_KINDS {
        for (mv, applied) in legal_moves(dec, kind) {
            if filter.accepts(&applied.result) {
                out.push((mv, applied.result));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Connection {
    Found { moves: Vec<Move>, nodes: usize },
    Exhausted { nodes: usize, budget: usize },
}

struct Node {
    /// Kept only while the node waits in the frontier.
    dec: Option<Decorated>,
    parent: Option<IsoSig>,
}

const BATCH: usize = 64;

struct Side {
    store: HashMap<IsoSig, Node>,
    frontier: Vec<IsoSig>,
}

impl Side {
    fn new(dec: &Decorated) -> Side {
        let key = isosig(&dec.tri);
        let mut store = HashMap::new();
        store.insert(key.clone(), Node { dec: Some(dec.clone()), parent: None });
        Side { store, frontier: vec![key] }
    }

    fn chain(&self, mut key: IsoSig) -> Vec<IsoSig> {
        let mut out = vec![key.clone()];
        while let Some(p) = self.store[&key].parent.clone() {
            out.push(p.clone());
            key = p;
        }
        out
    }

    /// Expands one level; returns a key also present in `other`, if any.
    fn expand(
        &mut self,
        other: &Side,
        filter: &Filter,
        budget: usize,
        total: &mut usize,
    ) -> Result<Option<IsoSig>, SearchError> {
        let level = std::mem::take(&mut self.frontier);
        for batch in level.chunks(BATCH) {
            let store = &self.store;
            let expanded: Vec<Result<Vec<(IsoSig, Decorated)>, SearchError>> = batch
                .par_iter()
                .map(|k| {
                    let dec = store[k].dec.as_ref().expect("frontier node keeps its triangulation");
                    Ok(neighbors(dec, filter)?
                        .into_iter()
                        .map(|(_, d)| (isosig(&d.tri), d))
                        .filter(|(key, _)| !store.contains_key(key))
                        .collect())
                })
                .collect();
            for (k, next) in batch.iter().zip(expanded) {
                self.store.get_mut(k).expect("stored").dec = None;
                for (key, dec) in next? {
                    if self.store.contains_key(&key) {
                        continue;
                    }
                    if *total >= budget {
                        return Ok(None);
                    }
                    *total += 1;
                    self.store.insert(key.clone(), Node { dec: Some(dec), parent: Some(k.clone()) });
                    if other.store.contains_key(&key) {
                        return Ok(Some(key));
                    }
                    self.frontier.push(key);
                }
            }
        }
        Ok(None)
    }
}

/// Moves that take `dec` through the given isomorphism signatures, each step checked by the filter.
pub fn replay(dec: &Decorated, sigs: &[IsoSig], filter: &Filter) -> Result<Vec<Move>, SearchError> {
    let mut cur = dec.clone();
    let mut moves = Vec::new();
    for want in sigs {
        let (mv, next) = neighbors(&cur, filter)?
            .into_iter()
            .find(|(_, d)| &isosig(&d.tri) == want)
            .ok_or_else(|| SearchError::Replay(want.0.clone()))?;
        moves.push(mv);
        cur = next;
    }
    Ok(moves)
}

/// Bidirectional breadth-first search between two triangulations of the same manifold.
pub fn connect(a: &Decorated, b: &Decorated, filter: &Filter, budget: usize) -> Result<Connection, SearchError> {
    if budget == 0 {
        return Err(SearchError::ZeroBudget);
    }
    if !a.tri.is_ideal() || !b.tri.is_ideal() {
        return Err(SearchError::NotIdeal);
    }
    let ha = homology(&a.tri).map_err(|e| SearchError::Invalid(e.to_string()))?;
    let hb = homology(&b.tri).map_err(|e| SearchError::Invalid(e.to_string()))?;
    if ha != hb {
        return Err(SearchError::HomologyMismatch(ha.to_string(), hb.to_string()));
    }
    let mut fwd = Side::new(a);
    let mut bwd = Side::new(b);
    if fwd.frontier == bwd.frontier {
        return Ok(Connection::Found { moves: Vec::new(), nodes: 2 });
    }
    let mut total = 2;
    loop {
        if fwd.frontier.is_empty() && bwd.frontier.is_empty() || total >= budget {
            return Ok(Connection::Exhausted { nodes: total, budget });
        }
        let grow_fwd = !fwd.frontier.is_empty() && (bwd.frontier.is_empty() || fwd.frontier.len() <= bwd.frontier.len());
        let meet = if grow_fwd {
            fwd.expand(&bwd, filter, budget, &mut total)?
        } else {
            bwd.expand(&fwd, filter, budget, &mut total)?
        };
        if let Some(key) = meet {
            let mut sigs: Vec<IsoSig> = fwd.chain(key.clone());
            sigs.reverse();
            sigs.extend(bwd.chain(key).into_iter().skip(1));
            let moves = replay(a, &sigs[1..], filter)?;
            return Ok(Connection::Found { moves, nodes: total });
        }
    }
}

/// `steps` random moves (kind first, then site, both uniform), each result passing the filter and never revisiting a triangulation.
pub fn scramble(dec: &Decorated, steps: usize, filter: &Filter, seed: u64) -> Result<(Decorated, Vec<Move>), SearchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = dec.clone();
    let mut seen = HashSet::from([isosig(&cur.tri)]);
    let mut moves = Vec::new();
    for _ in 0..steps {
        let options: Vec<(Move, Decorated)> =
            neighbors(&cur, filter)?.into_iter().filter(|(_, d)| !seen.contains(&isosig(&d.tri))).collect();
        let mut kinds: Vec<MoveKind> = options.iter().map(|(m, _)| m.kind()).collect();
        kinds.dedup();
        let Some(&kind) = kinds.choose(&mut rng) else { break };
        let of_kind: Vec<&(Move, Decorated)> = options.iter().filter(|(m, _)| m.kind() == kind).collect();
        let (mv, next) = (*of_kind.choose(&mut rng).expect("kind has a move")).clone();
        seen.insert(isosig(&next.tri));
        moves.push(mv);
        cur = next;
    }
    Ok((cur, moves))
}
