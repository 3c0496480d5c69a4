//! Dense undirected simple graphs over vertices `0..n`.
//!
//! Each vertex owns a row of `ceil(n / 64)` words; bit `v` of row `u` is set
//! iff `{u, v}` is an edge. The bootstrap step is dominated by row ANDs, so
//! the dense layout wins over adjacency lists at the sizes this crate targets.
//!
//! Vertices are 0-based. Where the literature labels the anchored pair of an
//! anchored graph `1, 2`, this crate uses `0, 1`; every other vertex shifts
//! down by one in the same way.

pub(crate) mod clique;
pub mod io;
mod vertex_set;

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use vertex_set::VertexSet;
pub(crate) use vertex_set::{words_for, BitIter};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
}

/// An unordered pair of distinct vertices, stored with `u < v`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct Edge {
    u: usize,
    v: usize,
}

impl Edge {
    /// Creates the canonical edge `{a, b}`.
    ///
    /// # Panics
    /// Panics if `a == b`.
    pub fn new(a: usize, b: usize) -> Self {
        Self::try_new(a, b).expect("edge endpoints must differ")
    }

    pub fn try_new(a: usize, b: usize) -> Result<Self, GraphError> {
        match a.cmp(&b) {
            Ordering::Less => Ok(Self { u: a, v: b }),
            Ordering::Greater => Ok(Self { u: b, v: a }),
            Ordering::Equal => Err(GraphError::SelfLoop(a)),
        }
    }

    #[inline]
    pub fn u(self) -> usize {
        self.u
    }

    #[inline]
    pub fn v(self) -> usize {
        self.v
    }

    pub fn endpoints(self) -> (usize, usize) {
        (self.u, self.v)
    }

    pub fn contains(self, x: usize) -> bool {
        self.u == x || self.v == x
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.u, self.v)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.u, self.v)
    }
}

impl TryFrom<[usize; 2]> for Edge {
    type Error = GraphError;

    fn try_from([a, b]: [usize; 2]) -> Result<Self, Self::Error> {
        Edge::try_new(a, b)
    }
}

impl From<Edge> for [usize; 2] {
    fn from(e: Edge) -> Self {
        [e.u, e.v]
    }
}

/// Graph distance summary: either a finite value or "disconnected".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Distance {
    Finite(usize),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

/// Undirected simple graph with row-bitset adjacency.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    edges: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = words_for(n);
        Self {
            n,
            words,
            adj: vec![0; n * words],
            edges: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        let full = VertexSet::full(n);
        for u in 0..n {
            let row = &mut g.adj[u * g.words..(u + 1) * g.words];
            row.copy_from_slice(full.words());
            row[u / 64] &= !(1u64 << (u % 64));
        }
        g.edges = n * n.saturating_sub(1) / 2;
        g
    }

    /// Builds a graph from an edge list, validating every endpoint.
    pub fn from_edges<I: IntoIterator<Item = Edge>>(
        n: usize,
        edges: I,
    ) -> Result<Self, GraphError> {
        let mut g = Self::empty(n);
        for e in edges {
            g.add_edge(e)?;
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Number of vertex pairs, `C(n, 2)`.
    pub fn pair_count(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    pub fn is_complete(&self) -> bool {
        self.edges == self.pair_count()
    }

    #[inline]
    pub(crate) fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub(crate) fn row(&self, u: usize) -> &[u64] {
        &self.adj[u * self.words..(u + 1) * self.words]
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: self.n,
            })
        }
    }

    #[inline]
    fn bit(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    /// Adds `e`; returns `Ok(true)` if the edge was new. Idempotent.
    pub fn add_edge(&mut self, e: Edge) -> Result<bool, GraphError> {
        self.check_vertex(e.v)?;
        Ok(self.insert_unchecked(e.u, e.v))
    }

    pub(crate) fn insert_unchecked(&mut self, u: usize, v: usize) -> bool {
        if self.bit(u, v) {
            return false;
        }
        self.adj[u * self.words + v / 64] |= 1 << (v % 64);
        self.adj[v * self.words + u / 64] |= 1 << (u % 64);
        self.edges += 1;
        debug_assert!(self.bit(v, u) && !self.bit(u, u) && !self.bit(v, v));
        true
    }

    /// Removes `e`; returns `Ok(true)` if it was present.
    pub fn remove_edge(&mut self, e: Edge) -> Result<bool, GraphError> {
        self.check_vertex(e.v)?;
        let (u, v) = e.endpoints();
        if !self.bit(u, v) {
            return Ok(false);
        }
        self.adj[u * self.words + v / 64] &= !(1 << (v % 64));
        self.adj[v * self.words + u / 64] &= !(1 << (u % 64));
        self.edges -= 1;
        debug_assert!(!self.bit(v, u));
        Ok(true)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && u < self.n && v < self.n && self.bit(u, v)
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.has_edge(e.u, e.v)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn min_degree(&self) -> Option<usize> {
        (0..self.n).map(|u| self.degree(u)).min()
    }

    pub fn neighbors(&self, u: usize) -> VertexSet {
        VertexSet::from_words(self.n, self.row(u).to_vec())
    }

    /// Vertices adjacent to both `u` and `v` (the pair itself excluded).
    pub fn common_neighbors(&self, u: usize, v: usize) -> VertexSet {
        let mut words: Vec<u64> = self
            .row(u)
            .iter()
            .zip(self.row(v))
            .map(|(a, b)| a & b)
            .collect();
        for x in [u, v] {
            words[x / 64] &= !(1u64 << (x % 64));
        }
        VertexSet::from_words(self.n, words)
    }

    /// True iff some `k` vertices of `set` are pairwise adjacent.
    pub fn contains_clique(&self, set: &VertexSet, k: usize) -> bool {
        assert_eq!(set.capacity(), self.n, "vertex set universe mismatch");
        clique::contains_clique(self, set.words(), k)
    }

    /// Lexicographically smallest `k`-clique inside `set`, as a sorted vertex list.
    pub fn first_clique(&self, set: &VertexSet, k: usize) -> Option<Vec<usize>> {
        assert_eq!(set.capacity(), self.n, "vertex set universe mismatch");
        clique::first_clique(self, set.words(), k)
    }

    /// Every `k`-clique inside `set`, each sorted, in lexicographic order.
    pub fn cliques(&self, set: &VertexSet, k: usize) -> Vec<Vec<usize>> {
        assert_eq!(set.capacity(), self.n, "vertex set universe mismatch");
        let mut out = Vec::new();
        clique::for_each_clique(self, set.words(), k, &mut |c| out.push(c.to_vec()));
        out
    }

    /// Number of edges with at least one endpoint in `set`.
    pub fn incident_edge_count(&self, set: &VertexSet) -> usize {
        assert_eq!(set.capacity(), self.n, "vertex set universe mismatch");
        let mut degree_sum = 0;
        let mut inside_twice = 0;
        for u in set.iter() {
            let row = self.row(u);
            for (r, s) in row.iter().zip(set.words()) {
                degree_sum += r.count_ones() as usize;
                inside_twice += (r & s).count_ones() as usize;
            }
        }
        degree_sum - inside_twice / 2
    }

    /// Canonically ordered edge list.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edges);
        for u in 0..self.n {
            for v in BitIter::new(self.row(u)) {
                if v > u {
                    out.push(Edge { u, v });
                }
            }
        }
        out
    }

    /// Canonically ordered list of absent pairs.
    pub fn non_edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.pair_count() - self.edges);
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.bit(u, v) {
                    out.push(Edge { u, v });
                }
            }
        }
        out
    }

    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n == other.n && self.adj.iter().zip(&other.adj).all(|(a, b)| a & !b == 0)
    }

    /// BFS distances from `source`; `None` for unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        if source >= self.n {
            return dist;
        }
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for v in BitIter::new(self.row(u)) {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn eccentricity(&self, source: usize) -> Distance {
        let mut ecc = 0;
        for d in self.distances_from(source) {
            match d {
                Some(d) => ecc = ecc.max(d),
                None => return Distance::Infinite,
            }
        }
        Distance::Finite(ecc)
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.distances_from(0).iter().all(Option::is_some)
    }

    /// Maximum eccentricity, or `Infinite` if the graph is disconnected.
    pub fn diameter(&self) -> Distance {
        if !self.is_connected() {
            return Distance::Infinite;
        }
        (0..self.n)
            .map(|u| self.eccentricity(u))
            .max()
            .unwrap_or(Distance::Finite(0))
    }

    /// Checks the structural invariants; intended for tests and debug assertions.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut bits = 0usize;
        for u in 0..self.n {
            if self.bit(u, u) {
                return Err(format!("self-loop at {u}"));
            }
            let row = self.row(u);
            let rem = self.n % 64;
            if rem != 0 && row[self.words - 1] >> rem != 0 {
                return Err(format!("row {u} has bits beyond n"));
            }
            for v in BitIter::new(row) {
                if !self.bit(v, u) {
                    return Err(format!("asymmetric pair ({u},{v})"));
                }
                bits += 1;
            }
        }
        if bits != 2 * self.edges {
            return Err(format!("edge count {} but {} set bits", self.edges, bits));
        }
        Ok(())
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges())
            .finish()
    }
}
