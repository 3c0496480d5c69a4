//! The anchored graphs `F_t`.
//!
//! `F_1` is `K_r` minus the anchor pair. `F_{t+1}` replaces every edge `e`
//! of `F_t` by a copy of `K_r - e` on `e` plus `r - 2` fresh vertices (the
//! block of `e`); the edges of `F_t` themselves are not kept. The anchor is
//! then added by the bootstrap process at exactly round `t`.
//!
//! Numbering is deterministic: anchor endpoints `0, 1`, then the `F_1` core
//! `2..r`, then blocks of each generation in canonical parent-edge order.
//! Generation labels are `0` for the anchor, `1` for the core and `g` for
//! vertices created when building `F_g`.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Edge, Graph, VertexSet};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FtError {
    #[error("r = {0} is not supported here (need r >= 4)")]
    UnsupportedR(usize),
    #[error("t must be at least 1")]
    ZeroTime,
    #[error("integer overflow evaluating F_t sizes for r = {r}, t = {t}")]
    Overflow { r: usize, t: u32 },
    #[error("F_{t} for r = {r} has {vertices} vertices, above the cap of {cap}")]
    TooManyVertices {
        r: usize,
        t: u32,
        vertices: i128,
        cap: usize,
    },
    #[error("F_{t} for r = {r} needs {bytes} bytes of adjacency, above the cap of {cap}")]
    AdjacencyTooLarge {
        r: usize,
        t: u32,
        bytes: u128,
        cap: u128,
    },
}

fn check_r(r: usize) -> Result<i128, FtError> {
    if r < 4 {
        Err(FtError::UnsupportedR(r))
    } else {
        Ok(r as i128)
    }
}

/// `τ = C(r, 2) - 1`, the edge count of `F_1`.
pub fn tau(r: usize) -> Result<i128, FtError> {
    let r = check_r(r)?;
    Ok(r * (r - 1) / 2 - 1)
}

/// `λ = (C(r, 2) - 2) / (r - 2)`.
pub fn lambda(r: usize) -> Result<Rational, FtError> {
    let ri = check_r(r)?;
    Ok(Rational::new(ri * (ri - 1) / 2 - 2, ri - 2))
}

fn tau_pow(r: usize, t: u32) -> Result<i128, FtError> {
    if t == 0 {
        return Err(FtError::ZeroTime);
    }
    tau(r)?.checked_pow(t).ok_or(FtError::Overflow { r, t })
}

/// `e_t = τ^t`.
pub fn e_t(r: usize, t: u32) -> Result<i128, FtError> {
    tau_pow(r, t)
}

/// `v_t = 2 + (r - 2)(τ^t - 1)/(τ - 1)`.
pub fn v_t(r: usize, t: u32) -> Result<i128, FtError> {
    let tau = tau(r)?;
    let power = tau_pow(r, t)?;
    let overflow = FtError::Overflow { r, t };
    let blocks = (power - 1) / (tau - 1);
    (r as i128 - 2)
        .checked_mul(blocks)
        .and_then(|x| x.checked_add(2))
        .ok_or(overflow)
}

/// `c_t = 1 / (τ^t - 1)`.
pub fn c_t(r: usize, t: u32) -> Result<Rational, FtError> {
    Ok(Rational::new(1, tau_pow(r, t)? - 1))
}

/// Exact exponent `(v_t - 2) / e_t` of the time-`t` threshold `n^{-(v_t-2)/e_t}`.
pub fn threshold_exponent(r: usize, t: u32) -> Result<Rational, FtError> {
    Ok(Rational::new(v_t(r, t)? - 2, e_t(r, t)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    pub r: usize,
    pub t: u32,
    pub exponent: Rational,
}

impl Threshold {
    /// `n^{-exponent}`.
    pub fn eval(&self, n: f64) -> f64 {
        n.powf(-crate::rational::to_f64(&self.exponent))
    }
}

pub fn threshold(r: usize, t: u32) -> Result<Threshold, FtError> {
    Ok(Threshold {
        r,
        t,
        exponent: threshold_exponent(r, t)?,
    })
}

/// Size guards for [`build_ft_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FtLimits {
    pub max_vertices: usize,
    /// Dense adjacency costs `n * ceil(n/64) * 8` bytes.
    pub max_adjacency_bytes: u128,
}

impl Default for FtLimits {
    fn default() -> Self {
        Self {
            max_vertices: 1 << 22,
            max_adjacency_bytes: 1 << 30,
        }
    }
}

/// `V(e)`: the `r - 2` vertices placed on parent edge `e`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub parent: Edge,
    pub vertices: Vec<usize>,
    pub generation: u32,
}

#[derive(Debug, Clone)]
pub struct AnchoredGraph {
    pub r: usize,
    pub t: u32,
    pub graph: Graph,
    pub anchor: Edge,
    pub generation: Vec<u32>,
    /// All blocks in creation order; the first is the core placed on the anchor.
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnchoredJson {
    pub n: usize,
    pub edges: Vec<Edge>,
    pub anchor: Edge,
    pub generation: Vec<u32>,
}

impl AnchoredGraph {
    pub fn vertex_count(&self) -> usize {
        self.graph.n()
    }

    /// Vertices other than the anchor endpoints, in increasing order.
    pub fn non_anchor_vertices(&self) -> Vec<usize> {
        (0..self.graph.n())
            .filter(|&v| !self.anchor.contains(v))
            .collect()
    }

    pub fn vertices_of_generation(&self, g: u32) -> VertexSet {
        VertexSet::from_vertices(
            self.graph.n(),
            self.generation
                .iter()
                .enumerate()
                .filter(|&(_, &x)| x == g)
                .map(|(v, _)| v),
        )
    }

    /// Blocks created for the last level, i.e. those of generation `t`.
    pub fn last_blocks(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(move |b| b.generation == self.t)
    }

    pub fn to_json(&self) -> AnchoredJson {
        AnchoredJson {
            n: self.graph.n(),
            edges: self.graph.edges(),
            anchor: self.anchor,
            generation: self.generation.clone(),
        }
    }

    pub fn to_dot(&self) -> String {
        crate::graph::io::to_dot(&self.graph, &format!("F_{}", self.t), &[self.anchor])
    }

    /// Verifies the structural invariants of the construction.
    pub fn check_invariants(&self) -> Result<(), String> {
        let g = &self.graph;
        g.check_invariants()?;
        if g.contains_edge(self.anchor) {
            return Err("anchor is an edge".into());
        }
        let (vt, et) = (
            v_t(self.r, self.t).map_err(|e| e.to_string())?,
            e_t(self.r, self.t).map_err(|e| e.to_string())?,
        );
        if g.n() as i128 != vt || g.edge_count() as i128 != et {
            return Err(format!(
                "size ({}, {}) differs from (v_t, e_t) = ({vt}, {et})",
                g.n(),
                g.edge_count()
            ));
        }
        for b in self.last_blocks() {
            if b.vertices.len() != self.r - 2 {
                return Err(format!(
                    "block on {:?} has {} vertices",
                    b.parent,
                    b.vertices.len()
                ));
            }
            let block = VertexSet::from_vertices(g.n(), b.vertices.iter().copied());
            for &x in &b.vertices {
                let mut expected = block.clone();
                expected.remove(x);
                expected.insert(b.parent.u());
                expected.insert(b.parent.v());
                if g.neighbors(x) != expected {
                    return Err(format!("block vertex {x} has unexpected neighbours"));
                }
            }
        }
        if self.t >= 2 {
            let newest = self.vertices_of_generation(self.t);
            if let Some(e) = g
                .edges()
                .into_iter()
                .find(|e| !newest.contains(e.u()) && !newest.contains(e.v()))
            {
                return Err(format!("edge {e:?} avoids generation {}", self.t));
            }
        }
        Ok(())
    }
}

pub fn build_ft(r: usize, t: u32) -> Result<AnchoredGraph, FtError> {
    build_ft_with(r, t, FtLimits::default())
}

pub fn build_ft_with(r: usize, t: u32, limits: FtLimits) -> Result<AnchoredGraph, FtError> {
    let vt = v_t(r, t)?;
    if vt > limits.max_vertices as i128 {
        return Err(FtError::TooManyVertices {
            r,
            t,
            vertices: vt,
            cap: limits.max_vertices,
        });
    }
    let n = vt as usize;
    let bytes = n as u128 * n.div_ceil(64) as u128 * 8;
    if bytes > limits.max_adjacency_bytes {
        return Err(FtError::AdjacencyTooLarge {
            r,
            t,
            bytes,
            cap: limits.max_adjacency_bytes,
        });
    }

    let anchor = Edge::new(0, 1);
    let mut generation = vec![0u32; n];
    let mut blocks = Vec::with_capacity(((vt - 2) / (r as i128 - 2)) as usize);
    let core: Vec<usize> = (2..r).collect();
    for &v in &core {
        generation[v] = 1;
    }
    blocks.push(Block {
        parent: anchor,
        vertices: core,
        generation: 1,
    });
    let mut current: Vec<Edge> = (0..r)
        .flat_map(|a| (a + 1..r).map(move |b| Edge::new(a, b)))
        .filter(|&e| e != anchor)
        .collect();
    let mut next = r;
    for level in 2..=t {
        let mut edges = Vec::with_capacity(current.len() * (tau(r)? as usize));
        for &parent in &current {
            let vertices: Vec<usize> = (next..next + r - 2).collect();
            next += r - 2;
            for (i, &x) in vertices.iter().enumerate() {
                generation[x] = level;
                edges.push(Edge::new(parent.u(), x));
                edges.push(Edge::new(parent.v(), x));
                edges.extend(vertices[i + 1..].iter().map(|&y| Edge::new(x, y)));
            }
            blocks.push(Block {
                parent,
                vertices,
                generation: level,
            });
        }
        edges.sort_unstable();
        current = edges;
    }
    debug_assert_eq!(next, n);
    let graph = Graph::from_edges(n, current).expect("construction stays in range");
    Ok(AnchoredGraph {
        r,
        t,
        graph,
        anchor,
        generation,
        blocks,
    })
}
