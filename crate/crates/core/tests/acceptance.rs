//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any fails.

use std::collections::VecDeque;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use grboot::density::{self, DensityOptions, Method};
use grboot::engine;
use grboot::ft;
use grboot::montecarlo::{self, rng};
use grboot::witness::{self, OrderPolicy};
use grboot::{Edge, Graph, Rational, VertexSet};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn binom2(r: usize) -> i128 {
    (r * (r - 1) / 2) as i128
}

// 1. Six-vertex example graph regression.
fn example_graph() -> Check {
    let text = std::fs::read_to_string(fixtures().join("fig1.json")).map_err(|e| e.to_string())?;
    let g = grboot::graph::io::from_json(&text).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let trace = engine::run(&g, 4, None).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let expected: Vec<Vec<Edge>> = [
        vec![(2, 3)],
        vec![(0, 4), (1, 4)],
        vec![(0, 5), (2, 5), (3, 5)],
    ]
    .into_iter()
    .map(|round| round.into_iter().map(|(a, b)| Edge::new(a, b)).collect())
    .collect();
    ensure(trace.rounds == expected, || {
        format!("rounds {:?}", trace.rounds)
    })?;
    ensure(trace.percolation_time() == Some(3), || {
        format!("T = {:?}", trace.percolation_time())
    })?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("T=3, rounds exact, {elapsed:?}"))
}

// 2. The anchor of F_t appears at exactly time t.
fn anchor_timing() -> Check {
    let start = Instant::now();
    for (r, t) in [(4, 1), (4, 2), (4, 3), (5, 1), (5, 2), (6, 1)] {
        let f = ft::build_ft(r, t).map_err(|e| e.to_string())?;
        let time = engine::edge_addition_time(&f.graph, r, f.anchor).map_err(|e| e.to_string())?;
        ensure(time == Some(t), || {
            format!("(r,t)=({r},{t}): anchor at {time:?}")
        })?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("6 instances exact, {elapsed:?}"))
}

// 3. Formula suite against direct recomputation and constructed counts.
fn formula_suite() -> Check {
    let mut built = 0;
    for r in 4..=10usize {
        let tau = binom2(r) - 1;
        let lambda = Rational::new(binom2(r) - 2, r as i128 - 2);
        for t in 1..=5u32 {
            let mut power = 1i128;
            let mut geometric = 0i128;
            for _ in 0..t {
                geometric += power;
                power *= tau;
            }
            let (e, v) = (power, 2 + (r as i128 - 2) * geometric);
            let got_e = ft::e_t(r, t).map_err(|x| x.to_string())?;
            let got_v = ft::v_t(r, t).map_err(|x| x.to_string())?;
            ensure(got_e == e && got_v == v, || {
                format!("(r,t)=({r},{t}): e={got_e} v={got_v}, want {e} {v}")
            })?;
            let c = Rational::new(1, power - 1);
            ensure(
                Rational::new(e, v - 2) == lambda * (Rational::from_integer(1) + c),
                || format!("(r,t)=({r},{t}): ratio identity fails"),
            )?;
            ensure(ft::c_t(r, t).map_err(|x| x.to_string())? == c, || {
                format!("c_t at ({r},{t})")
            })?;
            ensure(ft::lambda(r).map_err(|x| x.to_string())? == lambda, || {
                format!("lambda at r={r}")
            })?;
            if v <= 20_000 {
                let f = ft::build_ft(r, t).map_err(|x| x.to_string())?;
                ensure(
                    f.graph.n() as i128 == v && f.graph.edge_count() as i128 == e,
                    || {
                        format!(
                            "(r,t)=({r},{t}): built {} vertices, {} edges",
                            f.graph.n(),
                            f.graph.edge_count()
                        )
                    },
                )?;
                built += 1;
            }
        }
    }
    Ok(format!(
        "35 formula cases exact, {built} constructions match"
    ))
}

/// Brute force over all subsets, recounting from scratch; small graphs only.
fn brute_min_ratio(g: &Graph, candidates: &[usize]) -> Rational {
    let m = candidates.len();
    let mut best: Option<Rational> = None;
    for mask in 1u64..(1 << m) - 1 {
        let set = VertexSet::from_vertices(
            g.n(),
            (0..m)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| candidates[i]),
        );
        let incident = g
            .edges()
            .iter()
            .filter(|e| set.contains(e.u()) || set.contains(e.v()))
            .count();
        let ratio = Rational::new(incident as i128, set.len() as i128);
        best = Some(best.map_or(ratio, |b| b.min(ratio)));
    }
    best.expect("at least two candidates")
}

fn epsilon_from_ratio(ratio: Rational, f: &ft::AnchoredGraph) -> Rational {
    ratio * Rational::new(f.graph.n() as i128 - 2, f.graph.edge_count() as i128)
        - Rational::from_integer(1)
}

// 4. ε exactness.
fn epsilon_exactness() -> Check {
    let start = Instant::now();
    for r in 4..=7usize {
        let f = ft::build_ft(r, 1).map_err(|e| e.to_string())?;
        let rep = density::min_density(&f, DensityOptions::default()).map_err(|e| e.to_string())?;
        let want = Rational::new(1, r as i128 + 1);
        ensure(rep.epsilon == want, || {
            format!("eps_1(r={r}) = {}", rep.epsilon)
        })?;
        let brute = epsilon_from_ratio(brute_min_ratio(&f.graph, &f.non_anchor_vertices()), &f);
        ensure(brute == want, || format!("brute eps_1(r={r}) = {brute}"))?;
    }
    let f = ft::build_ft(4, 2).map_err(|e| e.to_string())?;
    let rep = density::min_density(&f, DensityOptions::default()).map_err(|e| e.to_string())?;
    ensure(rep.subsets_examined == 4094, || {
        format!("examined {}", rep.subsets_examined)
    })?;
    let lower = Rational::new(1, 5) * Rational::new(2, 14);
    let construction = density::witness_set_minratio(4, 2).map_err(|e| e.to_string())?;
    let construction_eps = epsilon_from_ratio(construction.ratio, &f);
    let brute_eps = epsilon_from_ratio(brute_min_ratio(&f.graph, &f.non_anchor_vertices()), &f);
    let values = [
        rep.epsilon,
        brute_eps,
        lower,
        construction_eps,
        Rational::new(1, 35),
    ];
    ensure(values.iter().all(|&v| v == values[0]), || {
        format!("eps_2(r=4) disagreement: {values:?}")
    })?;
    ensure(
        density::epsilon_lower(4, 2).map_err(|e| e.to_string())? == lower,
        || "library lower bound".into(),
    )?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "eps_1 = 1/(r+1) for r=4..7, eps_2(4) = 1/35 three ways, {elapsed:?}"
    ))
}

// 5. Sandwich and degree bound.
fn sandwich_and_degree() -> Check {
    let mut lines = Vec::new();
    let instances = [
        (4, 1, Method::Enumerate),
        (5, 1, Method::Enumerate),
        (6, 1, Method::Enumerate),
        (7, 1, Method::Enumerate),
        (4, 2, Method::Enumerate),
        (5, 2, Method::Enumerate),
        (6, 2, Method::BranchAndBound),
        (4, 3, Method::BranchAndBound),
    ];
    for (r, t, method) in instances {
        let f = ft::build_ft(r, t).map_err(|e| e.to_string())?;
        let opts = DensityOptions {
            cap_bits: 63,
            method,
        };
        let rep = density::min_density(&f, opts).map_err(|e| e.to_string())?;
        ensure(
            rep.lower_bound <= rep.epsilon && rep.epsilon <= rep.upper_bound,
            || {
                format!(
                    "({r},{t}): {} not in [{}, {}]",
                    rep.epsilon, rep.lower_bound, rep.upper_bound
                )
            },
        )?;
        // the argmin really has the reported density
        let incident = f.graph.incident_edge_count(&rep.argmin);
        ensure(
            Rational::new(incident as i128, rep.argmin.len() as i128) == rep.min_ratio,
            || format!("({r},{t}): argmin density mismatch"),
        )?;
        lines.push(format!("({r},{t})={}", rep.epsilon));
    }
    let mut rng = Xoshiro256StarStar::seed_from_u64(0x5eed);
    for (r, t) in [(4, 2), (4, 3), (5, 2)] {
        let f = ft::build_ft(r, t).map_err(|e| e.to_string())?;
        let candidates = f.non_anchor_vertices();
        let mut checked = 0;
        while checked < 10_000 {
            let density: f64 = rng.random();
            let set = VertexSet::from_vertices(
                f.graph.n(),
                candidates
                    .iter()
                    .copied()
                    .filter(|_| rng.random_bool(density)),
            );
            if set.is_empty() {
                continue;
            }
            let incident = f.graph.incident_edge_count(&set);
            ensure(2 * incident >= (r - 1) * set.len(), || {
                format!("({r},{t}): degree bound fails on {:?}", set.to_vec())
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "eps in bounds for {}; degree bound on 3 x 10^4 subsets",
        lines.join(" ")
    ))
}

// 6. Witness bound and sufficiency.
fn witness_bound() -> Check {
    let start = Instant::now();
    let lambda = Rational::new(binom2(4) - 2, 2);
    let (mut witnesses, mut violations) = (0usize, Vec::new());
    for i in 0..500u64 {
        let g = montecarlo::sample_gnp(20, 0.5, &mut rng::stream(2024, i));
        let map =
            witness::run_with_witnesses(&g, 4, OrderPolicy::Lex).map_err(|e| e.to_string())?;
        for w in map.iter() {
            witnesses += 1;
            let bound = lambda * Rational::from_integer(w.vertices.len() as i128 - 2)
                + Rational::from_integer(1);
            let ok_bound = Rational::from_integer(w.edges.len() as i128) >= bound;
            let ok_initial = w.edges.iter().all(|&e| g.contains_edge(e));
            let sub =
                Graph::from_edges(g.n(), w.edges.iter().copied()).map_err(|e| e.to_string())?;
            let ok_sufficient = engine::closure(&sub, 4)
                .map_err(|e| e.to_string())?
                .contains_edge(w.edge);
            if !(ok_bound && ok_initial && ok_sufficient) {
                violations.push(format!("run {i} edge {:?}", w.edge));
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(violations.is_empty(), || {
        format!("{} violations, first {}", violations.len(), violations[0])
    })?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "{witnesses} witnesses from 500 runs, 0 violations, {elapsed:?}"
    ))
}

fn bfs_diameter(g: &Graph) -> Option<usize> {
    let n = g.n();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|u| (0..n).filter(|&v| g.has_edge(u, v)).collect())
        .collect();
    let mut diameter = 0;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if dist.contains(&usize::MAX) {
            return None;
        }
        diameter = diameter.max(*dist.iter().max().unwrap());
    }
    Some(diameter)
}

// 7. K_3 oracle equivalence.
fn triangle_oracle() -> Check {
    let start = Instant::now();
    let mut rng = Xoshiro256StarStar::seed_from_u64(33);
    let mut mismatches = Vec::new();
    let mut completes = 0;
    for i in 0..200 {
        let n = rng.random_range(3..=40usize);
        let mut g = Graph::empty(n);
        if i % 25 == 0 {
            g = Graph::complete(n);
        } else {
            for v in 1..n {
                let u = rng.random_range(0..v);
                g.add_edge(Edge::new(u, v)).unwrap();
            }
            let extra: f64 = rng.random::<f64>() * 0.3;
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random_bool(extra) {
                        g.add_edge(Edge::new(u, v)).unwrap();
                    }
                }
            }
        }
        let d = bfs_diameter(&g).expect("spanning tree keeps the graph connected");
        let mut expected = 0u32;
        while (1usize << expected) < d {
            expected += 1;
        }
        if d <= 1 {
            completes += 1;
            expected = 0;
        }
        let got = engine::run(&g, 3, None)
            .map_err(|e| e.to_string())?
            .percolation_time();
        if got != Some(expected) {
            mismatches.push(format!(
                "graph {i}: n={n} d={d} engine {got:?} want {expected}"
            ));
        }
    }
    let elapsed = start.elapsed();
    ensure(mismatches.is_empty(), || {
        format!("{} mismatches, first {}", mismatches.len(), mismatches[0])
    })?;
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!(
        "200 graphs ({completes} complete), 0 mismatches, {elapsed:?}"
    ))
}

// 8. Transition qualitative check.
fn transition() -> Check {
    let start = Instant::now();
    let (r, t, reps, seed) = (4usize, 1u32, 400u32, 8u64);
    let mut low_ok = 0;
    let mut bisect_ok = 0;
    let mut lines = Vec::new();
    for n in [60usize, 120, 240] {
        let nf = n as f64;
        let base = nf.powf(-0.4);
        let (p_low, p_high) = (base / nf.ln().ln(), (base * nf.ln()).min(1.0));
        let mut grid = montecarlo::parse_grid(&format!("{}:{}:14:log", base / nf.ln(), p_high))
            .map_err(|e| e.to_string())?;
        grid.push(p_low);
        grid.sort_by(f64::total_cmp);
        let rows = grboot::with_threads(Some(8), || montecarlo::sweep(n, r, t, &grid, reps, seed))
            .map_err(|e| e.to_string())?
            .map_err(|e| e.to_string())?;
        let monotone = rows
            .windows(2)
            .all(|w| w[0].estimate.p_hat <= w[1].estimate.p_hat);
        ensure(monotone, || format!("n={n}: sweep not monotone"))?;
        let at = |p: f64| {
            rows.iter()
                .find(|row| row.p == p)
                .map(|row| row.estimate.p_hat)
                .unwrap()
        };
        let (hat_low, hat_high) = (at(p_low), at(p_high));
        ensure(hat_high > 0.9, || {
            format!("n={n}: p_hat({p_high:.4}) = {hat_high}")
        })?;
        if hat_low < 0.5 {
            low_ok += 1;
        }
        let b = grboot::with_threads(Some(8), || {
            montecarlo::pc_bisect(n, r, t, 0.5, 1e-3, reps, seed)
        })
        .map_err(|e| e.to_string())?
        .map_err(|e| e.to_string())?;
        let inside = p_low <= b.lo && b.hi <= p_high;
        if inside {
            bisect_ok += 1;
        }
        lines.push(format!(
            "n={n}: p_hat {hat_low:.3} at {p_low:.4}, {hat_high:.3} at {p_high:.4}, crossing [{:.4}, {:.4}]{}",
            b.lo,
            b.hi,
            if inside { "" } else { " (outside)" }
        ));
    }
    ensure(low_ok >= 2, || {
        format!("lower check held for {low_ok}/3: {}", lines.join("; "))
    })?;
    ensure(bisect_ok >= 2, || {
        format!(
            "bisect containment held for {bisect_ok}/3: {}",
            lines.join("; ")
        )
    })?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(15 * 60))?;
    Ok(format!("{}; {elapsed:?}", lines.join("; ")))
}

// 9. Byte-identical outputs across thread counts.
fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fig1 = fixtures().join("fig1.json");
    let fig1 = fig1.to_str().unwrap();
    let commands: [(&str, Vec<&str>); 5] = [
        (
            "mc",
            vec![
                "mc", "--n", "60", "--r", "4", "--t", "1", "--p", "0.3", "--reps", "200", "--seed",
                "11",
            ],
        ),
        (
            "mc-probe",
            vec![
                "mc", "--n", "40", "--r", "4", "--t", "2", "--p", "0.2", "--reps", "200", "--seed",
                "11", "--probe",
            ],
        ),
        (
            "sweep",
            vec![
                "sweep",
                "--n",
                "40",
                "--r",
                "4",
                "--t",
                "2",
                "--p-grid",
                "0.05:0.6:8:log",
                "--reps",
                "200",
                "--seed",
                "11",
            ],
        ),
        (
            "bisect",
            vec![
                "bisect", "--n", "40", "--r", "4", "--t", "1", "--reps", "100", "--tol", "0.005",
                "--seed", "11",
            ],
        ),
        (
            "witness",
            vec![
                "witness", "--graph", fig1, "--r", "4", "--policy", "random", "--seed", "11",
            ],
        ),
    ];
    for (name, args) in &commands {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "8"] {
            let out = dir.path().join(format!("{name}-{threads}.out"));
            let status = Command::new(env!("CARGO_BIN_EXE_grboot"))
                .args(args)
                .args(["--threads", threads, "--out", out.to_str().unwrap()])
                .env_remove("GRBOOT_THREADS")
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), || {
                format!("{name} with {threads} threads exited {status}")
            })?;
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure(outputs.iter().all(|o| o == &outputs[0]), || {
            format!("{name}: outputs differ across thread counts")
        })?;
    }
    Ok(format!(
        "{} stochastic commands byte-identical for threads 1/4/8",
        commands.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("six-vertex example regression", example_graph),
        ("F_t anchor added at exactly t", anchor_timing),
        ("formula suite", formula_suite),
        ("epsilon exactness", epsilon_exactness),
        ("density sandwich and degree bound", sandwich_and_degree),
        ("witness bound and sufficiency", witness_bound),
        ("K_3 diameter oracle", triangle_oracle),
        ("transition qualitative check", transition),
        ("determinism across thread counts", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".to_string());
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
