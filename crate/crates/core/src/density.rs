//! Minimum incident-edge density over vertex subsets of `F_t`.
//!
//! For `L ⊆ V(F_t) \ {anchor}` the density is `e(L, F_t) / |L|`, where
//! `e(L, F_t)` counts edges with at least one endpoint in `L`. The minimum
//! over nonempty proper subsets, scaled by `(v_t - 2) / e_t`, is `1 + ε_t`.
//!
//! Two exact search routes are provided: a Gray-code walk over all subsets
//! (incremental count update per step, statically split across workers by
//! the high mask bits) and a depth-first branch-and-bound. Ties are broken
//! towards the numerically smallest bitmask over the candidate list, so both
//! routes report the same minimiser.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ft::{self, AnchoredGraph, FtError};
use crate::graph::{Graph, VertexSet};
use crate::rational::{self, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DensityError {
    #[error("{candidates} candidate vertices exceed the enumeration cap of {cap} bits")]
    CapExceeded { candidates: usize, cap: u32 },
    #[error("no admissible subset to minimise over")]
    NoSubsets,
    #[error("this construction needs t >= 2")]
    NeedsSecondGeneration,
    #[error(transparent)]
    Ft(#[from] FtError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Enumerate,
    BranchAndBound,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Enumerate => "enumerate",
            Method::BranchAndBound => "branch_and_bound",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DensityOptions {
    /// Maximum number of candidate vertices (bits of the subset mask).
    pub cap_bits: u32,
    pub method: Method,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            cap_bits: 30,
            method: Method::Enumerate,
        }
    }
}

/// Hard limit imposed by the `u64` subset masks.
const MAX_MASK_BITS: u32 = 63;
const HIGH_BITS: u32 = 6;
const RECOUNT_INTERVAL: u64 = 1 << 12;

/// Density problem over a candidate vertex list, with everything expressed
/// in candidate indices.
struct Problem {
    m: u32,
    degree: Vec<u64>,
    /// Candidate-index neighbourhood masks.
    neighbors: Vec<u64>,
    exclude_full: bool,
}

impl Problem {
    fn new(graph: &Graph, candidates: &[usize], exclude_full: bool) -> Self {
        let degree = candidates.iter().map(|&v| graph.degree(v) as u64).collect();
        let neighbors = candidates
            .iter()
            .map(|&v| {
                candidates
                    .iter()
                    .enumerate()
                    .filter(|&(_, &w)| graph.has_edge(v, w))
                    .fold(0u64, |acc, (j, _)| acc | 1 << j)
            })
            .collect();
        Self {
            m: candidates.len() as u32,
            degree,
            neighbors,
            exclude_full,
        }
    }

    fn full(&self) -> u64 {
        if self.m == 64 {
            u64::MAX
        } else {
            (1u64 << self.m) - 1
        }
    }

    fn count(&self, mask: u64) -> u64 {
        let mut degree_sum = 0;
        let mut inside = 0;
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            degree_sum += self.degree[i];
            inside += u64::from((self.neighbors[i] & mask).count_ones());
        }
        degree_sum - inside / 2
    }

    fn admissible(&self, mask: u64) -> bool {
        mask != 0 && !(self.exclude_full && mask == self.full())
    }
}

#[derive(Debug, Clone, Copy)]
struct Best {
    count: u64,
    size: u64,
    mask: u64,
    examined: u64,
}

impl Best {
    fn none() -> Self {
        Self {
            count: 0,
            size: 0,
            mask: 0,
            examined: 0,
        }
    }

    fn is_set(&self) -> bool {
        self.size != 0
    }

    /// Orders candidate `(count, size, mask)` against the incumbent.
    fn beats(&self, count: u64, size: u64, mask: u64) -> bool {
        if !self.is_set() {
            return true;
        }
        let lhs = u128::from(count) * u128::from(self.size);
        let rhs = u128::from(self.count) * u128::from(size);
        match lhs.cmp(&rhs) {
            Ordering::Less => true,
            Ordering::Equal => mask < self.mask,
            Ordering::Greater => false,
        }
    }

    #[inline]
    fn consider(&mut self, count: u64, mask: u64) {
        self.examined += 1;
        let size = u64::from(mask.count_ones());
        if self.beats(count, size, mask) {
            self.count = count;
            self.size = size;
            self.mask = mask;
        }
    }

    fn merge(mut self, other: Best) -> Best {
        let examined = self.examined + other.examined;
        if other.is_set() && self.beats(other.count, other.size, other.mask) {
            self = other;
        }
        self.examined = examined;
        self
    }
}

fn enumerate(p: &Problem) -> Best {
    let high = p.m.min(HIGH_BITS);
    let low = p.m - high;
    let chunks: Vec<Best> = (0..1u64 << high)
        .into_par_iter()
        .map(|prefix| {
            let mut best = Best::none();
            let mut mask = prefix << low;
            let mut count = p.count(mask);
            if p.admissible(mask) {
                best.consider(count, mask);
            }
            for step in 1..1u64 << low {
                let x = step.trailing_zeros() as usize;
                let bit = 1u64 << x;
                let others = mask & !bit;
                let delta = p.degree[x] - u64::from((p.neighbors[x] & others).count_ones());
                if mask & bit != 0 {
                    count -= delta;
                } else {
                    count += delta;
                }
                mask ^= bit;
                if cfg!(debug_assertions) && step % RECOUNT_INTERVAL == 0 {
                    debug_assert_eq!(count, p.count(mask), "incremental count drifted");
                }
                if p.admissible(mask) {
                    best.consider(count, mask);
                }
            }
            best
        })
        .collect();
    chunks.into_iter().fold(Best::none(), Best::merge)
}

struct Search<'a> {
    p: &'a Problem,
    best: Best,
    weights: Vec<u64>,
}

impl Search<'_> {
    /// Lower bound on `count / size` over all completions of `inside` by
    /// undecided candidates `idx..m`, doubled to stay in integers: an edge
    /// from an added vertex to a decided-out vertex counts 1, an edge between
    /// two undecided vertices counts at least 1/2 towards each.
    fn bound_beats_incumbent(&mut self, idx: u32, inside: u64, count: u64) -> bool {
        if !self.best.is_set() {
            return true;
        }
        let p = self.p;
        let undecided = p.full() & !((1u64 << idx) - 1);
        self.weights.clear();
        for i in idx..p.m {
            let i = i as usize;
            let in_nb = u64::from((p.neighbors[i] & inside).count_ones());
            let und_nb = u64::from((p.neighbors[i] & undecided).count_ones());
            self.weights.push(2 * p.degree[i] - 2 * in_nb - und_nb);
        }
        self.weights.sort_unstable();
        let mut num = 2 * count;
        let mut size = u64::from(inside.count_ones());
        let lower_than = |num: u64, size: u64, best: &Best| {
            // num / (2 size) <= best.count / best.size
            u128::from(num) * u128::from(best.size) <= 2 * u128::from(best.count) * u128::from(size)
        };
        if size > 0 && lower_than(num, size, &self.best) {
            return true;
        }
        for &w in &self.weights {
            num += w;
            size += 1;
            if lower_than(num, size, &self.best) {
                return true;
            }
        }
        false
    }

    fn dfs(&mut self, idx: u32, inside: u64, count: u64) {
        let p = self.p;
        if idx == p.m {
            if p.admissible(inside) {
                self.best.consider(count, inside);
            }
            return;
        }
        if !self.bound_beats_incumbent(idx, inside, count) {
            return;
        }
        let x = idx as usize;
        let added = count + p.degree[x] - u64::from((p.neighbors[x] & inside).count_ones());
        self.dfs(idx + 1, inside | 1 << x, added);
        self.dfs(idx + 1, inside, count);
    }
}

fn branch_and_bound(p: &Problem) -> Best {
    let mut best = Best::none();
    let full = p.full();
    for i in 0..p.m {
        for mask in [1u64 << i, full & !(1u64 << i)] {
            if p.admissible(mask) {
                best.consider(p.count(mask), mask);
            }
        }
    }
    let mut search = Search {
        p,
        best,
        weights: Vec::with_capacity(p.m as usize),
    };
    search.dfs(0, 0, 0);
    search.best
}

/// Result of a subset-density minimisation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetMinimum {
    pub ratio: Rational,
    pub set: Vec<usize>,
    pub incident_edges: u64,
    pub examined: u64,
}

/// Minimises `e(L, G) / |L|` over nonempty `L ⊆ candidates`, excluding
/// `L = candidates` when `exclude_full` is set.
pub fn min_ratio_over(
    graph: &Graph,
    candidates: &[usize],
    exclude_full: bool,
    opts: DensityOptions,
) -> Result<SubsetMinimum, DensityError> {
    let cap = opts.cap_bits.min(MAX_MASK_BITS);
    if candidates.len() > cap as usize {
        return Err(DensityError::CapExceeded {
            candidates: candidates.len(),
            cap: opts.cap_bits,
        });
    }
    let p = Problem::new(graph, candidates, exclude_full);
    let best = match opts.method {
        Method::Enumerate => enumerate(&p),
        Method::BranchAndBound => branch_and_bound(&p),
    };
    if !best.is_set() {
        return Err(DensityError::NoSubsets);
    }
    let set = (0..candidates.len())
        .filter(|&i| best.mask >> i & 1 == 1)
        .map(|i| candidates[i])
        .collect();
    Ok(SubsetMinimum {
        ratio: Rational::new(best.count as i128, best.size as i128),
        set,
        incident_edges: best.count,
        examined: best.examined,
    })
}

/// `1/(r+1) · (2/(r² - 2))^{t-1}`.
pub fn epsilon_lower(r: usize, t: u32) -> Result<Rational, DensityError> {
    ft::tau(r)?;
    if t == 0 {
        return Err(FtError::ZeroTime.into());
    }
    let r = r as i128;
    let base = Rational::new(1, r + 1);
    let factor = Rational::new(2, r * r - 2);
    Ok((1..t).fold(base, |acc, _| acc * factor))
}

/// `1/(r+1)`.
pub fn epsilon_upper(r: usize, t: u32) -> Result<Rational, DensityError> {
    ft::tau(r)?;
    if t == 0 {
        return Err(FtError::ZeroTime.into());
    }
    Ok(Rational::new(1, r as i128 + 1))
}

/// Statistics of the iterated set `L_1 ⊆ L_2 ⊆ … ⊆ L_t`: `L_1` is all but
/// the last core vertex, and `L_i` adds every generation-`i` vertex adjacent
/// to `L_{i-1}`. Reported next to the closed-form counts
/// `1 + 2(r-2)(τ^{t-1}-1)/(τ-1)` vertices and `τ^{t-1}(τ-2)` incident edges,
/// which need not agree with the direct construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IteratedSetStats {
    pub constructed_vertices: usize,
    pub constructed_incident_edges: usize,
    pub formula_vertices: i128,
    pub formula_incident_edges: i128,
}

pub fn iterated_set(f: &AnchoredGraph) -> Result<IteratedSetStats, DensityError> {
    let (r, t) = (f.r, f.t);
    let n = f.graph.n();
    let mut set = VertexSet::from_vertices(n, 2..r - 1);
    for level in 2..=t {
        let fresh: Vec<usize> = f
            .vertices_of_generation(level)
            .iter()
            .filter(|&x| f.graph.neighbors(x).iter().any(|y| set.contains(y)))
            .collect();
        for x in fresh {
            set.insert(x);
        }
    }
    let tau = ft::tau(r)?;
    let prev = if t == 1 { 1 } else { ft::e_t(r, t - 1)? };
    Ok(IteratedSetStats {
        constructed_vertices: set.len(),
        constructed_incident_edges: f.graph.incident_edge_count(&set),
        formula_vertices: 1 + 2 * (r as i128 - 2) * (prev - 1) / (tau - 1),
        formula_incident_edges: prev * (tau - 2),
    })
}

/// The explicit low-density set `{v} ∪ (new neighbours of v)` for a vertex
/// `v` of generation `t - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessSetRatio {
    pub set: VertexSet,
    pub incident_edges: usize,
    pub ratio: Rational,
}

pub fn witness_set_minratio(r: usize, t: u32) -> Result<WitnessSetRatio, DensityError> {
    if t < 2 {
        return Err(DensityError::NeedsSecondGeneration);
    }
    let f = ft::build_ft(r, t)?;
    let v = f
        .vertices_of_generation(t - 1)
        .iter()
        .next()
        .expect("every generation is nonempty");
    let newest = f.vertices_of_generation(t);
    let mut set = f.graph.neighbors(v);
    set.intersect_with(&newest);
    set.insert(v);
    let incident_edges = f.graph.incident_edge_count(&set);
    let tau = ft::tau(r)? as usize;
    debug_assert_eq!(set.len(), 1 + (r - 1) * (r - 2));
    debug_assert_eq!(incident_edges, (r - 1) * tau);
    let ratio = Rational::new(incident_edges as i128, set.len() as i128);
    Ok(WitnessSetRatio {
        set,
        incident_edges,
        ratio,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub r: usize,
    pub t: u32,
    pub vertices: usize,
    pub edges: usize,
    pub min_ratio: Rational,
    pub argmin: VertexSet,
    pub argmin_incident_edges: u64,
    pub epsilon: Rational,
    pub subsets_examined: u64,
    pub lower_bound: Rational,
    pub upper_bound: Rational,
    pub method: Method,
    /// `|argmin| / (v_t - 2)`; observational only.
    pub argmin_fraction: f64,
    pub iterated_set: IteratedSetStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityReportJson {
    pub r: usize,
    pub t: u32,
    pub vertices: usize,
    pub edges: usize,
    pub min_ratio: String,
    pub min_ratio_f64: f64,
    pub argmin: Vec<usize>,
    pub argmin_incident_edges: u64,
    pub epsilon: String,
    pub epsilon_f64: f64,
    pub subsets_examined: u64,
    pub lower_bound: String,
    pub lower_bound_f64: f64,
    pub upper_bound: String,
    pub upper_bound_f64: f64,
    pub method: &'static str,
    pub argmin_fraction: f64,
    pub iterated_set: IteratedSetStats,
}

impl DensityReport {
    pub fn to_json(&self) -> DensityReportJson {
        let frac = rational::to_fraction_string;
        DensityReportJson {
            r: self.r,
            t: self.t,
            vertices: self.vertices,
            edges: self.edges,
            min_ratio: frac(&self.min_ratio),
            min_ratio_f64: rational::to_f64(&self.min_ratio),
            argmin: self.argmin.to_vec(),
            argmin_incident_edges: self.argmin_incident_edges,
            epsilon: frac(&self.epsilon),
            epsilon_f64: rational::to_f64(&self.epsilon),
            subsets_examined: self.subsets_examined,
            lower_bound: frac(&self.lower_bound),
            lower_bound_f64: rational::to_f64(&self.lower_bound),
            upper_bound: frac(&self.upper_bound),
            upper_bound_f64: rational::to_f64(&self.upper_bound),
            method: self.method.name(),
            argmin_fraction: self.argmin_fraction,
            iterated_set: self.iterated_set.clone(),
        }
    }
}

/// Exact `ε_t` of an anchored graph by exhaustive search.
pub fn min_density(f: &AnchoredGraph, opts: DensityOptions) -> Result<DensityReport, DensityError> {
    let candidates = f.non_anchor_vertices();
    let best = min_ratio_over(&f.graph, &candidates, true, opts)?;
    let (vertices, edges) = (f.graph.n(), f.graph.edge_count());
    let scale = Rational::new(vertices as i128 - 2, edges as i128);
    let epsilon = best.ratio * scale - Rational::from_integer(1);
    Ok(DensityReport {
        r: f.r,
        t: f.t,
        vertices,
        edges,
        min_ratio: best.ratio,
        argmin: VertexSet::from_vertices(vertices, best.set.iter().copied()),
        argmin_incident_edges: best.incident_edges,
        epsilon,
        subsets_examined: best.examined,
        lower_bound: epsilon_lower(f.r, f.t)?,
        upper_bound: epsilon_upper(f.r, f.t)?,
        method: opts.method,
        argmin_fraction: best.set.len() as f64 / (vertices - 2) as f64,
        iterated_set: iterated_set(f)?,
    })
}

/// Minimum density over nonempty subsets of `allowed` minus the anchor.
/// The full non-anchor set stays excluded.
pub fn min_density_within(
    f: &AnchoredGraph,
    allowed: &VertexSet,
    opts: DensityOptions,
) -> Result<SubsetMinimum, DensityError> {
    let all = f.non_anchor_vertices();
    let candidates: Vec<usize> = all
        .iter()
        .copied()
        .filter(|&v| allowed.contains(v))
        .collect();
    let exclude_full = candidates.len() == all.len();
    min_ratio_over(&f.graph, &candidates, exclude_full, opts)
}
