//! `G(n, p)` sampling and estimation of `P(T <= t)`.
//!
//! Every trial draws one uniform per vertex pair, in canonical pair order,
//! and keeps the pair iff its uniform is below `p`. Reusing a trial's
//! uniforms at several values of `p` therefore yields nested graphs, and as
//! the process is monotone the success indicators are non-decreasing in `p`.
//! [`sweep`] and [`pc_bisect`] rely on this coupling.

pub mod rng;
pub mod stats;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{self, EngineError};
use crate::ft;
use crate::graph::{Edge, Graph};

pub use stats::{wilson, Z95};

pub const DEFAULT_REPS: u32 = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("reps must be at least 1")]
    ZeroReps,
    #[error("level {0} is outside (0, 1)")]
    Level(f64),
    #[error("tolerance {0} must be positive")]
    Tolerance(f64),
    #[error(
        "bracket failure: estimated success probability {p_hat} at p = 1 is below level {level}"
    )]
    Bracket { p_hat: f64, level: f64 },
    #[error("bad probability grid {0:?}: expected a:b:steps or a:b:steps:log")]
    Grid(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Event whose probability is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Event {
    /// `G_t = K_n`.
    #[default]
    Percolation,
    /// The pair `{0, 1}` is an edge of `G_t`.
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub n: usize,
    pub r: usize,
    pub t: u32,
    pub p: f64,
    pub reps: u32,
    pub seed: u64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<(), McError> {
        check_p(self.p)?;
        if self.reps == 0 {
            return Err(McError::ZeroReps);
        }
        engine::check_params(&Graph::empty(self.n), self.r)?;
        Ok(())
    }
}

fn check_p(p: f64) -> Result<(), McError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(McError::Probability(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub successes: u32,
    pub reps: u32,
    pub p_hat: f64,
    pub ci95: [f64; 2],
    /// Mean of `T` (or of the probe edge's addition time) over successful
    /// trials; `None` when no trial succeeded.
    pub mean_t_given_success: Option<f64>,
}

impl EstimateResult {
    /// Aggregates per-trial outcomes, in trial order.
    pub fn from_outcomes(outcomes: &[Option<u32>]) -> Self {
        let reps = outcomes.len() as u32;
        let times: Vec<u64> = outcomes.iter().flatten().map(|&t| u64::from(t)).collect();
        let successes = times.len() as u32;
        let (lo, hi) = wilson(successes, reps);
        Self {
            successes,
            reps,
            p_hat: f64::from(successes) / f64::from(reps),
            ci95: [lo, hi],
            mean_t_given_success: (successes > 0)
                .then(|| times.iter().sum::<u64>() as f64 / f64::from(successes)),
        }
    }
}

/// One uniform per pair `{u, v}`, `u < v`, in lexicographic order.
pub fn sample_uniforms(n: usize, stream: &mut rng::Stream) -> Vec<f64> {
    (0..n * n.saturating_sub(1) / 2)
        .map(|_| rng::uniform(stream))
        .collect()
}

/// The graph of pairs whose uniform is below `p`.
pub fn threshold_graph(n: usize, uniforms: &[f64], p: f64) -> Graph {
    let mut g = Graph::empty(n);
    let mut k = 0;
    for u in 0..n {
        for v in u + 1..n {
            if uniforms[k] < p {
                g.insert_unchecked(u, v);
            }
            k += 1;
        }
    }
    g
}

pub fn sample_gnp(n: usize, p: f64, stream: &mut rng::Stream) -> Graph {
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng::uniform(stream) < p {
                g.insert_unchecked(u, v);
            }
        }
    }
    g
}

fn outcome(g: &Graph, r: usize, t: u32, event: Event) -> Result<Option<u32>, EngineError> {
    match event {
        Event::Percolation => engine::percolates_within(g, r, t),
        Event::Probe => {
            let e0 = Edge::new(0, 1);
            if g.contains_edge(e0) {
                return Ok(Some(0));
            }
            Ok(engine::run(g, r, Some(t))?.time_of(e0))
        }
    }
}

/// Runs `reps` trials of `f` in parallel and returns results in trial order.
fn trials<T: Send>(reps: u32, seed: u64, f: impl Fn(rng::Stream) -> T + Sync) -> Vec<T> {
    (0..reps)
        .into_par_iter()
        .map(|i| f(rng::stream(seed, u64::from(i))))
        .collect()
}

pub fn estimate_event(cfg: &TrialConfig, event: Event) -> Result<EstimateResult, McError> {
    cfg.validate()?;
    let outcomes = trials(cfg.reps, cfg.seed, |mut s| {
        outcome(&sample_gnp(cfg.n, cfg.p, &mut s), cfg.r, cfg.t, event)
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(EstimateResult::from_outcomes(&outcomes))
}

/// Estimates `P(T <= t)`.
pub fn estimate(cfg: &TrialConfig) -> Result<EstimateResult, McError> {
    estimate_event(cfg, Event::Percolation)
}

/// Estimates `P({0, 1} ∈ G_t)`.
pub fn estimate_probe(cfg: &TrialConfig) -> Result<EstimateResult, McError> {
    estimate_event(cfg, Event::Probe)
}

/// Parses `a:b:steps` (evenly spaced) or `a:b:steps:log` (geometric).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, McError> {
    let bad = || McError::Grid(spec.to_string());
    let parts: Vec<&str> = spec.split(':').collect();
    let log = match parts.len() {
        3 => false,
        4 if parts[3] == "log" => true,
        _ => return Err(bad()),
    };
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if steps == 0 || !a.is_finite() || !b.is_finite() || (log && (a <= 0.0 || b <= 0.0)) {
        return Err(bad());
    }
    let grid: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                return a;
            }
            let f = i as f64 / (steps - 1) as f64;
            if i == steps - 1 {
                b
            } else if log {
                (a.ln() + (b.ln() - a.ln()) * f).exp()
            } else {
                a + (b - a) * f
            }
        })
        .collect();
    for &p in &grid {
        check_p(p)?;
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub estimate: EstimateResult,
}

pub const CSV_HEADER: &str = "p,p_hat,ci_lo,ci_hi,mean_T,reps,seed";

/// Estimates at every grid point from one set of uniforms per trial.
pub fn sweep(
    n: usize,
    r: usize,
    t: u32,
    grid: &[f64],
    reps: u32,
    seed: u64,
) -> Result<Vec<SweepRow>, McError> {
    for &p in grid {
        TrialConfig {
            n,
            r,
            t,
            p,
            reps,
            seed,
        }
        .validate()?;
    }
    let per_trial = trials(reps, seed, |mut s| {
        let uniforms = sample_uniforms(n, &mut s);
        grid.iter()
            .map(|&p| outcome(&threshold_graph(n, &uniforms, p), r, t, Event::Percolation))
            .collect::<Result<Vec<_>, _>>()
    });
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(grid
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let column: Vec<Option<u32>> = per_trial.iter().map(|row| row[j]).collect();
            SweepRow {
                p,
                estimate: EstimateResult::from_outcomes(&column),
            }
        })
        .collect())
}

/// CSV rendering; `mean_T` is `NaN` for rows without successes.
pub fn sweep_csv(rows: &[SweepRow], seed: u64) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let e = &row.estimate;
        let mean = e.mean_t_given_success.unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.p, e.p_hat, e.ci95[0], e.ci95[1], mean, e.reps, seed
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisectResult {
    pub lo: f64,
    pub hi: f64,
    pub p_hat_lo: f64,
    pub p_hat_hi: f64,
    pub level: f64,
    pub evaluations: u32,
}

/// Brackets the smallest `p` with estimated `P(T <= t) >= level`.
///
/// All evaluations share the per-trial uniforms, so the estimate is exactly
/// monotone in `p` and the bracket is consistent. The starting bracket is
/// `[q / ln n, q ln n]` with `q = n^{-(v_t-2)/e_t}` when `r >= 4` and `t >= 1`,
/// widened as needed, and `[0, 1]` otherwise.
pub fn pc_bisect(
    n: usize,
    r: usize,
    t: u32,
    level: f64,
    tol: f64,
    reps: u32,
    seed: u64,
) -> Result<BisectResult, McError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(McError::Level(level));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(McError::Tolerance(tol));
    }
    TrialConfig {
        n,
        r,
        t,
        p: 0.0,
        reps,
        seed,
    }
    .validate()?;
    let uniforms: Vec<Vec<f64>> = trials(reps, seed, |mut s| sample_uniforms(n, &mut s));
    let mut evaluations = 0;
    let mut p_hat = |p: f64| -> Result<f64, McError> {
        evaluations += 1;
        let outcomes: Vec<Option<u32>> = uniforms
            .par_iter()
            .map(|u| outcome(&threshold_graph(n, u, p), r, t, Event::Percolation))
            .collect::<Result<_, _>>()?;
        Ok(EstimateResult::from_outcomes(&outcomes).p_hat)
    };

    let (mut lo, mut hi) = match ft::threshold(r, t) {
        Ok(th) => {
            let nf = n as f64;
            let base = th.eval(nf);
            let spread = nf.ln().max(1.0);
            (base / spread, (base * spread).min(1.0))
        }
        Err(_) => (0.0, 1.0),
    };
    let mut f_hi = p_hat(hi)?;
    while f_hi < level {
        if hi >= 1.0 {
            return Err(McError::Bracket { p_hat: f_hi, level });
        }
        lo = hi;
        hi = (hi * 2.0).min(1.0);
        f_hi = p_hat(hi)?;
    }
    let mut f_lo = p_hat(lo)?;
    while f_lo >= level {
        hi = lo;
        f_hi = f_lo;
        lo = if lo < 1e-12 { 0.0 } else { lo / 2.0 };
        f_lo = p_hat(lo)?;
        if lo == 0.0 && f_lo >= level {
            // Only possible if G(n, 0) already succeeds, i.e. never for n >= r.
            return Ok(BisectResult {
                lo,
                hi: 0.0,
                p_hat_lo: f_lo,
                p_hat_hi: f_lo,
                level,
                evaluations,
            });
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = p_hat(mid)?;
        if f_mid >= level {
            hi = mid;
            f_hi = f_mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok(BisectResult {
        lo,
        hi,
        p_hat_lo: f_lo,
        p_hat_hi: f_hi,
        level,
        evaluations,
    })
}
