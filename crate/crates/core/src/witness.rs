//! Witness subgraphs for closure edges.
//!
//! Edges of the initial graph witness themselves. The remaining closure
//! edges are replayed one at a time: each is added by some `r`-clique `K`
//! of the current (sequential) graph, and its witness is the union of the
//! witnesses of the other edges of `K`. The synchronous rounds only fix the
//! replay order. Within a round, and among several completing cliques, the
//! choice is made by an [`OrderPolicy`].

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{self, EngineError};
use crate::graph::{words_for, BitIter, Edge, Graph, VertexSet};

/// `shrink` re-runs the engine once per witness edge per pass, so it is
/// limited to small graphs.
pub const SHRINK_MAX_N: usize = 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("shrink is limited to graphs with at most {SHRINK_MAX_N} vertices, got {0}")]
    TooLarge(usize),
    #[error("{0} is not an edge of the closure")]
    NotInClosure(Edge),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderPolicy {
    /// Rounds in time order, each round in canonical edge order; the
    /// lexicographically smallest completing clique.
    #[default]
    Lex,
    /// Each round shuffled and the completing clique drawn uniformly, from
    /// a generator seeded with the given value.
    SeededRandom(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessSet {
    pub edge: Edge,
    /// Initial-graph edges, canonically ordered.
    pub edges: Vec<Edge>,
    pub vertices: VertexSet,
    /// The `r` vertices of the clique that added `edge`; `None` for initial edges.
    pub clique: Option<Vec<usize>>,
}

impl WitnessSet {
    pub fn subgraph(&self) -> Graph {
        Graph::from_edges(self.vertices.capacity(), self.edges.iter().copied())
            .expect("witness edges are valid")
    }
}

#[derive(Debug, Clone)]
struct Entry {
    bits: Vec<u64>,
    clique: Option<Vec<usize>>,
}

/// Witnesses for every closure edge of a run.
#[derive(Debug, Clone)]
pub struct WitnessMap {
    pub r: usize,
    n: usize,
    initial: Vec<Edge>,
    order: Vec<Edge>,
    entries: BTreeMap<Edge, Entry>,
}

impl WitnessMap {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Closure edges in the order they were processed; initial edges first.
    pub fn order(&self) -> &[Edge] {
        &self.order
    }

    pub fn closure(&self) -> Graph {
        Graph::from_edges(self.n, self.entries.keys().copied()).expect("closure edges are valid")
    }

    pub fn get(&self, e: Edge) -> Option<WitnessSet> {
        self.entries.get(&e).map(|entry| self.materialize(e, entry))
    }

    /// All witnesses in canonical edge order.
    pub fn iter(&self) -> impl Iterator<Item = WitnessSet> + '_ {
        self.entries
            .iter()
            .map(|(&e, entry)| self.materialize(e, entry))
    }

    fn materialize(&self, e: Edge, entry: &Entry) -> WitnessSet {
        let mut edges: Vec<Edge> = BitIter::new(&entry.bits).map(|i| self.initial[i]).collect();
        edges.sort_unstable();
        let mut vertices =
            VertexSet::from_vertices(self.n, edges.iter().flat_map(|f| [f.u(), f.v()]));
        vertices.insert(e.u());
        vertices.insert(e.v());
        WitnessSet {
            edge: e,
            edges,
            vertices,
            clique: entry.clique.clone(),
        }
    }
}

pub fn run_with_witnesses(
    g: &Graph,
    r: usize,
    policy: OrderPolicy,
) -> Result<WitnessMap, WitnessError> {
    let trace = engine::run(g, r, None)?;
    let initial = g.edges();
    let words = words_for(initial.len()).max(1);
    let mut entries = BTreeMap::new();
    for (i, &e) in initial.iter().enumerate() {
        let mut bits = vec![0u64; words];
        bits[i / 64] |= 1 << (i % 64);
        entries.insert(e, Entry { bits, clique: None });
    }
    let mut order = initial.clone();
    let mut rng = match policy {
        OrderPolicy::Lex => None,
        OrderPolicy::SeededRandom(seed) => Some(Xoshiro256StarStar::seed_from_u64(seed)),
    };
    let mut current = g.clone();
    for round in &trace.rounds {
        let mut round = round.clone();
        match rng.as_mut() {
            None => round.sort_unstable(),
            Some(rng) => round.shuffle(rng),
        }
        for e in round {
            let (u, v) = e.endpoints();
            let common = current.common_neighbors(u, v);
            let inner = match rng.as_mut() {
                None => current.first_clique(&common, r - 2),
                Some(rng) => {
                    let mut all = current.cliques(&common, r - 2);
                    if all.is_empty() {
                        None
                    } else {
                        let pick = rng.random_range(0..all.len());
                        Some(all.swap_remove(pick))
                    }
                }
            };
            let inner = inner.expect("every replayed edge is addable in the sequential graph");
            let mut clique = inner.clone();
            clique.extend([u, v]);
            clique.sort_unstable();
            let mut bits = vec![0u64; words];
            for (i, &a) in clique.iter().enumerate() {
                for &b in &clique[i + 1..] {
                    let f = Edge::new(a, b);
                    if f == e {
                        continue;
                    }
                    for (dst, src) in bits.iter_mut().zip(&entries[&f].bits) {
                        *dst |= src;
                    }
                }
            }
            entries.insert(
                e,
                Entry {
                    bits,
                    clique: Some(clique),
                },
            );
            current.add_edge(e).expect("closure edge is valid");
            order.push(e);
        }
    }
    Ok(WitnessMap {
        r,
        n: g.n(),
        initial,
        order,
        entries,
    })
}

/// `|E| ≥ λ(|V| - 2) + 1` with `λ = (C(r,2) - 2) / (r - 2)`, multiplied
/// through by `r - 2`.
pub fn check_witness_bound(w: &WitnessSet, r: usize) -> bool {
    assert!(r >= 3, "r must be at least 3");
    let e = w.edges.len() as i128;
    let v = w.vertices.len() as i128;
    let r = r as i128;
    let pairs = r * (r - 1) / 2;
    e * (r - 2) >= (pairs - 2) * (v - 2) + (r - 2)
}

/// True iff the process on the witness subgraph alone adds the witnessed edge.
pub fn check_sufficiency(w: &WitnessSet, r: usize) -> Result<bool, WitnessError> {
    Ok(engine::edge_addition_time(&w.subgraph(), r, w.edge)?.is_some())
}

/// Deletes witness edges one at a time while sufficiency survives, until no
/// single deletion is possible. The result is inclusion-minimal but not
/// necessarily smallest.
pub fn shrink(w: &WitnessSet, r: usize) -> Result<WitnessSet, WitnessError> {
    let n = w.vertices.capacity();
    if n > SHRINK_MAX_N {
        return Err(WitnessError::TooLarge(n));
    }
    if !check_sufficiency(w, r)? {
        return Err(WitnessError::NotInClosure(w.edge));
    }
    let mut edges = w.edges.clone();
    loop {
        let mut removed = false;
        let mut i = 0;
        while i < edges.len() {
            if edges[i] == w.edge {
                i += 1;
                continue;
            }
            let trial: Vec<Edge> = edges
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &f)| f)
                .collect();
            let g = Graph::from_edges(n, trial.iter().copied()).expect("witness edges are valid");
            if engine::edge_addition_time(&g, r, w.edge)?.is_some() {
                edges = trial;
                removed = true;
            } else {
                i += 1;
            }
        }
        if !removed {
            break;
        }
    }
    let mut vertices = VertexSet::from_vertices(n, edges.iter().flat_map(|f| [f.u(), f.v()]));
    vertices.insert(w.edge.u());
    vertices.insert(w.edge.v());
    Ok(WitnessSet {
        edge: w.edge,
        edges,
        vertices,
        clique: None,
    })
}
