//! The synchronous `K_r`-bootstrap process.
//!
//! A non-edge `{u, v}` joins `G_{t+1}` iff the common neighbourhood of `u`
//! and `v` in `G_t` contains a `(r-2)`-clique. Because `{u, v}` is absent
//! from `G_t`, any such copy of `K_r` is automatically new, so no copy
//! bookkeeping is needed.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{clique, BitIter, Edge, Graph};

/// Rows at or above this size are scanned in parallel.
const PARALLEL_MIN_N: usize = 96;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("clique size r = {0} is below 3")]
    CliqueTooSmall(usize),
    #[error("graph on {n} vertices is smaller than r = {r}")]
    TooFewVertices { n: usize, r: usize },
}

pub fn check_params(g: &Graph, r: usize) -> Result<(), EngineError> {
    if r < 3 {
        return Err(EngineError::CliqueTooSmall(r));
    }
    if g.n() < r {
        return Err(EngineError::TooFewVertices { n: g.n(), r });
    }
    Ok(())
}

/// Strategy for choosing which non-edges to test in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanMode {
    /// Test every non-edge every round.
    Naive,
    /// After the first round, test only pairs that a newly added edge could
    /// have made addable: pairs touching a new edge, and pairs inside the
    /// common neighbourhood of a new edge.
    #[default]
    Frontier,
}

#[inline]
fn addable(g: &Graph, u: usize, v: usize, r: usize, scratch: &mut [u64]) -> bool {
    for ((dst, a), b) in scratch.iter_mut().zip(g.row(u)).zip(g.row(v)) {
        *dst = a & b;
    }
    let k = r - 2;
    match clique::has_small_clique(g, scratch, k) {
        Some(found) => found,
        None => clique::contains_clique(g, scratch, k),
    }
}

fn scan_row(g: &Graph, r: usize, u: usize, candidates: Option<&[u64]>) -> Vec<Edge> {
    let words = g.words();
    let mut scratch = vec![0u64; words];
    let mut targets: Vec<u64> = g.row(u).iter().map(|w| !w).collect();
    if let Some(c) = candidates {
        for (t, c) in targets.iter_mut().zip(c) {
            *t &= c;
        }
    }
    // keep only v > u, v < n
    for (i, t) in targets.iter_mut().enumerate() {
        let lo = i * 64;
        if lo + 64 <= u + 1 {
            *t = 0;
        } else if lo <= u {
            let b = u - lo;
            *t &= if b == 63 { 0 } else { !((1u64 << (b + 1)) - 1) };
        }
        let hi = g.n().saturating_sub(lo);
        if hi < 64 {
            *t &= (1u64 << hi) - 1;
        }
    }
    BitIter::new(&targets)
        .filter(|&v| addable(g, u, v, r, &mut scratch))
        .map(|v| Edge::new(u, v))
        .collect()
}

fn scan(g: &Graph, r: usize, candidates: Option<&[u64]>) -> Vec<Edge> {
    let words = g.words();
    let row_candidates = |u: usize| candidates.map(|c| &c[u * words..(u + 1) * words]);
    if g.n() >= PARALLEL_MIN_N {
        (0..g.n())
            .into_par_iter()
            .map(|u| scan_row(g, r, u, row_candidates(u)))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    } else {
        (0..g.n())
            .flat_map(|u| scan_row(g, r, u, row_candidates(u)))
            .collect()
    }
}

/// One synchronous round: every non-edge of `g` completed to a `K_r` by `g`,
/// in canonical order. `g` itself is not modified.
pub fn step(g: &Graph, r: usize) -> Result<Vec<Edge>, EngineError> {
    check_params(g, r)?;
    Ok(scan(g, r, None))
}

/// True iff adding `e` to `g` completes a copy of `K_r`.
pub fn completes_clique(g: &Graph, r: usize, e: Edge) -> bool {
    let mut scratch = vec![0u64; g.words()];
    addable(g, e.u(), e.v(), r, &mut scratch)
}

/// Incremental driver of the process.
#[derive(Debug, Clone)]
pub struct Process {
    graph: Graph,
    r: usize,
    mode: ScanMode,
    candidates: Option<Vec<u64>>,
    rounds: u32,
}

impl Process {
    pub fn new(graph: Graph, r: usize, mode: ScanMode) -> Result<Self, EngineError> {
        check_params(&graph, r)?;
        Ok(Self {
            graph,
            r,
            mode,
            candidates: None,
            rounds: 0,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    /// Edges the next round would add, without applying them.
    pub fn peek(&self) -> Vec<Edge> {
        scan(&self.graph, self.r, self.candidates.as_deref())
    }

    /// Computes and applies the next round, returning the added edges.
    pub fn advance(&mut self) -> Vec<Edge> {
        let added = self.peek();
        for e in &added {
            self.graph.insert_unchecked(e.u(), e.v());
        }
        self.rounds += 1;
        if self.mode == ScanMode::Frontier {
            self.candidates = Some(self.frontier(&added));
        }
        added
    }

    fn frontier(&self, added: &[Edge]) -> Vec<u64> {
        let g = &self.graph;
        let (n, words) = (g.n(), g.words());
        let mut cand = vec![0u64; n * words];
        let set_pair = |cand: &mut [u64], a: usize, b: usize| {
            cand[a * words + b / 64] |= 1 << (b % 64);
            cand[b * words + a / 64] |= 1 << (a % 64);
        };
        let mut common = vec![0u64; words];
        for e in added {
            let (a, b) = e.endpoints();
            for x in 0..n {
                if x != a {
                    set_pair(&mut cand, a, x);
                }
                if x != b {
                    set_pair(&mut cand, b, x);
                }
            }
            for ((dst, p), q) in common.iter_mut().zip(g.row(a)).zip(g.row(b)) {
                *dst = p & q;
            }
            for x in BitIter::new(&common) {
                let row = &mut cand[x * words..(x + 1) * words];
                for (c, m) in row.iter_mut().zip(&common) {
                    *c |= m;
                }
                row[x / 64] &= !(1u64 << (x % 64));
            }
        }
        cand
    }
}

/// Final state of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// `G_time = K_n` and `time` is minimal.
    Percolated { time: u32 },
    /// The process reached a fixed point other than `K_n`.
    NotPercolated,
    /// The round budget ran out before a fixed point.
    CapReached,
}

/// Record of a run: `rounds[i]` holds the edges added at time `i + 1`.
#[derive(Debug, Clone)]
pub struct BootstrapTrace {
    pub r: usize,
    pub rounds: Vec<Vec<Edge>>,
    pub addition_time: BTreeMap<Edge, u32>,
    pub outcome: Outcome,
    pub final_graph: Graph,
}

impl BootstrapTrace {
    /// `T`, or `None` when the run did not percolate.
    pub fn percolation_time(&self) -> Option<u32> {
        match self.outcome {
            Outcome::Percolated { time } => Some(time),
            _ => None,
        }
    }

    pub fn time_of(&self, e: Edge) -> Option<u32> {
        self.addition_time.get(&e).copied()
    }

    /// The closure when the run reached a fixed point.
    pub fn closure(&self) -> &Graph {
        &self.final_graph
    }

    pub fn to_json(&self) -> TraceJson {
        TraceJson {
            r: self.r,
            t: self.percolation_time(),
            status: match self.outcome {
                Outcome::Percolated { .. } => "percolated",
                Outcome::NotPercolated => "not_percolated",
                Outcome::CapReached => "cap_reached",
            },
            rounds: self.rounds.clone(),
            addition_times: self
                .addition_time
                .iter()
                .map(|(e, &t)| [e.u() as u64, e.v() as u64, u64::from(t)])
                .collect(),
        }
    }
}

/// Serialized trace: `T` is `null` unless the run percolated.
#[derive(Debug, Clone, Serialize)]
pub struct TraceJson {
    pub r: usize,
    #[serde(rename = "T")]
    pub t: Option<u32>,
    pub status: &'static str,
    pub rounds: Vec<Vec<Edge>>,
    pub addition_times: Vec<[u64; 3]>,
}

/// Iterates the process from `g` until a fixed point or `max_rounds` rounds.
///
/// The terminal empty round is recorded when the process stalls or starts
/// complete; a run that becomes complete after a non-empty round ends there.
pub fn run(g: &Graph, r: usize, max_rounds: Option<u32>) -> Result<BootstrapTrace, EngineError> {
    run_with(g, r, max_rounds, ScanMode::default())
}

pub fn run_with(
    g: &Graph,
    r: usize,
    max_rounds: Option<u32>,
    mode: ScanMode,
) -> Result<BootstrapTrace, EngineError> {
    let mut process = Process::new(g.clone(), r, mode)?;
    let mut addition_time: BTreeMap<Edge, u32> = g.edges().into_iter().map(|e| (e, 0)).collect();
    let mut rounds: Vec<Vec<Edge>> = Vec::new();
    let outcome = loop {
        let complete = process.graph().is_complete();
        if complete && !rounds.is_empty() {
            break Outcome::Percolated {
                time: process.rounds(),
            };
        }
        if max_rounds.is_some_and(|cap| process.rounds() >= cap) {
            break if complete {
                Outcome::Percolated {
                    time: process.rounds(),
                }
            } else {
                Outcome::CapReached
            };
        }
        let added = process.advance();
        let time = process.rounds();
        let stalled = added.is_empty();
        for &e in &added {
            addition_time.insert(e, time);
        }
        rounds.push(added);
        if stalled {
            break if complete {
                Outcome::Percolated { time: 0 }
            } else {
                Outcome::NotPercolated
            };
        }
    };
    Ok(BootstrapTrace {
        r,
        rounds,
        addition_time,
        outcome,
        final_graph: process.into_graph(),
    })
}

/// Closure of `g` under the process.
pub fn closure(g: &Graph, r: usize) -> Result<Graph, EngineError> {
    Ok(run(g, r, None)?.final_graph)
}

/// Round at which `e` appears (`Some(0)` if `e ∈ g`), or `None` if never.
pub fn edge_addition_time(g: &Graph, r: usize, e: Edge) -> Result<Option<u32>, EngineError> {
    check_params(g, r)?;
    if g.contains_edge(e) {
        return Ok(Some(0));
    }
    let mut process = Process::new(g.clone(), r, ScanMode::default())?;
    loop {
        let added = process.advance();
        if added.is_empty() {
            return Ok(None);
        }
        if added.binary_search(&e).is_ok() {
            return Ok(Some(process.rounds()));
        }
    }
}

/// `Some(T)` if `g` percolates within `t` rounds, else `None`.
///
/// The last permitted round only checks that every remaining non-edge is
/// addable, stopping at the first one that is not.
pub fn percolates_within(g: &Graph, r: usize, t: u32) -> Result<Option<u32>, EngineError> {
    check_params(g, r)?;
    if g.is_complete() {
        return Ok(Some(0));
    }
    let mut process = Process::new(g.clone(), r, ScanMode::default())?;
    for round in 1..=t {
        if round == t {
            let graph = process.graph();
            let mut scratch = vec![0u64; graph.words()];
            let all = (0..graph.n()).all(|u| {
                (u + 1..graph.n())
                    .all(|v| graph.has_edge(u, v) || addable(graph, u, v, r, &mut scratch))
            });
            return Ok(all.then_some(t));
        }
        if process.advance().is_empty() {
            return Ok(None);
        }
        if process.graph().is_complete() {
            return Ok(Some(round));
        }
    }
    Ok(None)
}

/// Percolation time of the `K_3` process via the diameter shortcut:
/// `None` if disconnected, `0` if complete, otherwise `ceil(log2 d)`.
pub fn percolation_time_k3(g: &Graph) -> Option<u32> {
    let d = g.diameter().finite()?;
    Some(ceil_log2(d))
}

pub(crate) fn ceil_log2(d: usize) -> u32 {
    if d <= 1 {
        0
    } else {
        usize::BITS - (d - 1).leading_zeros()
    }
}

/// Replays `trace` from `g0` and checks synchronous semantics: each round is
/// exactly the set of non-edges certified by a `K_r` in the preceding graph.
pub fn validate_trace(g0: &Graph, trace: &BootstrapTrace) -> Result<(), String> {
    let r = trace.r;
    let mut g = g0.clone();
    for (i, round) in trace.rounds.iter().enumerate() {
        if round.is_empty() && i + 1 != trace.rounds.len() {
            return Err(format!("empty round {} before the end", i + 1));
        }
        if !round.windows(2).all(|w| w[0] < w[1]) {
            return Err(format!("round {} is not canonically sorted", i + 1));
        }
        for &e in round {
            if g.contains_edge(e) {
                return Err(format!("edge {e:?} of round {} already present", i + 1));
            }
            let common = g.common_neighbors(e.u(), e.v());
            let Some(clique) = g.first_clique(&common, r - 2) else {
                return Err(format!(
                    "edge {e:?} of round {} has no certifying K_{r}",
                    i + 1
                ));
            };
            let mut members = clique.clone();
            members.extend([e.u(), e.v()]);
            for (a, &x) in members.iter().enumerate() {
                for &y in &members[a + 1..] {
                    if Edge::new(x, y) != e && !g.has_edge(x, y) {
                        return Err(format!(
                            "certificate for {e:?} uses missing edge {{{x},{y}}}"
                        ));
                    }
                }
            }
        }
        let expected = step(&g, r).map_err(|err| err.to_string())?;
        if &expected != round {
            return Err(format!("round {} differs from a synchronous step", i + 1));
        }
        for &e in round {
            g.insert_unchecked(e.u(), e.v());
        }
    }
    if g != trace.final_graph {
        return Err("replayed graph differs from the recorded final graph".into());
    }
    let t = trace.rounds.iter().filter(|r| !r.is_empty()).count() as u32;
    match trace.outcome {
        Outcome::Percolated { time } if time != t || !g.is_complete() => {
            Err("wrong percolation time".into())
        }
        Outcome::NotPercolated if g.is_complete() => {
            Err("complete graph reported as not percolated".into())
        }
        _ => Ok(()),
    }
}
