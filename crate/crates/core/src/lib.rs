//! K_r graph bootstrap percolation.
//!
//! Starting from `G_0`, every round adds all non-edges whose addition would
//! complete a copy of `K_r`; the process is synchronous, so each round is
//! computed against the previous graph only. The crate covers:
//!
//! * [`graph`]: dense bitset graphs, clique queries, JSON/DOT I/O;
//! * [`engine`]: the synchronous update, closure, percolation time and the
//!   `K_3` diameter shortcut;
//! * [`ft`]: the anchored graphs `F_t` that add their anchor at exactly time
//!   `t`, together with the `τ`, `λ`, `c_t`, `e_t`, `v_t` formulas;
//! * [`density`]: exhaustive minimum incident-edge density over subsets of
//!   `F_t` and the derived `ε_t`;
//! * [`witness`]: witness subgraphs for every edge of a closure;
//! * [`montecarlo`]: `G(n, p)` sampling and estimation of `P(T <= t)`;
//! * [`cli`]: the `grboot` command line front end.

pub mod cli;
pub mod density;
pub mod engine;
pub mod ft;
pub mod graph;
pub mod montecarlo;
pub mod rational;
pub mod witness;

pub use graph::{Distance, Edge, Graph, GraphError, VertexSet};
pub use rational::Rational;

/// Runs `f` inside a dedicated rayon pool with `threads` workers
/// (`None` uses the global pool).
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, rayon::ThreadPoolBuildError> {
    match threads {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()?;
            Ok(pool.install(f))
        }
    }
}
