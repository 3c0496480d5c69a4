//! Clique search restricted to a candidate bitset.

use super::{BitIter, Graph};

#[inline]
fn popcount(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

#[inline]
fn clear_upto(words: &mut [u64], v: usize) {
    // clears bits 0..=v
    let w = v / 64;
    for word in &mut words[..w] {
        *word = 0;
    }
    let b = v % 64;
    words[w] &= if b == 63 { 0 } else { !((1u64 << (b + 1)) - 1) };
}

/// `k <= 2` shortcuts used on the bootstrap hot path.
#[inline]
pub(crate) fn has_small_clique(g: &Graph, cand: &[u64], k: usize) -> Option<bool> {
    match k {
        0 => Some(true),
        1 => Some(cand.iter().any(|&w| w != 0)),
        2 => Some(BitIter::new(cand).any(|v| g.row(v).iter().zip(cand).any(|(a, b)| a & b != 0))),
        _ => None,
    }
}

pub(crate) fn contains_clique(g: &Graph, cand: &[u64], k: usize) -> bool {
    if let Some(found) = has_small_clique(g, cand, k) {
        return found;
    }
    if popcount(cand) < k {
        return false;
    }
    // Greedy degeneracy order: repeatedly peel a vertex of minimum degree
    // inside the candidate set, then search each vertex's later neighbours.
    let mut remaining = cand.to_vec();
    let mut order = Vec::new();
    let mut alive = cand.to_vec();
    while alive.iter().any(|&w| w != 0) {
        let v = BitIter::new(&alive)
            .min_by_key(|&v| {
                g.row(v)
                    .iter()
                    .zip(&alive)
                    .map(|(a, b)| (a & b).count_ones())
                    .sum::<u32>()
            })
            .expect("alive is nonempty");
        alive[v / 64] &= !(1u64 << (v % 64));
        order.push(v);
    }
    let mut next = vec![0u64; cand.len()];
    for v in order {
        if popcount(&remaining) < k {
            return false;
        }
        remaining[v / 64] &= !(1u64 << (v % 64));
        for ((dst, a), b) in next.iter_mut().zip(g.row(v)).zip(&remaining) {
            *dst = a & b;
        }
        if has_clique_plain(g, &next, k - 1) {
            return true;
        }
    }
    false
}

fn has_clique_plain(g: &Graph, cand: &[u64], k: usize) -> bool {
    if let Some(found) = has_small_clique(g, cand, k) {
        return found;
    }
    if popcount(cand) < k {
        return false;
    }
    let mut next = vec![0u64; cand.len()];
    for v in BitIter::new(cand) {
        for ((dst, a), b) in next.iter_mut().zip(g.row(v)).zip(cand) {
            *dst = a & b;
        }
        clear_upto(&mut next, v);
        if popcount(&next) >= k - 1 && has_clique_plain(g, &next, k - 1) {
            return true;
        }
    }
    false
}

pub(crate) fn first_clique(g: &Graph, cand: &[u64], k: usize) -> Option<Vec<usize>> {
    let mut chosen = Vec::with_capacity(k);
    let mut found = None;
    visit(g, cand, k, &mut chosen, &mut |c| {
        found = Some(c.to_vec());
        false
    });
    found
}

pub(crate) fn for_each_clique(g: &Graph, cand: &[u64], k: usize, f: &mut dyn FnMut(&[usize])) {
    let mut chosen = Vec::with_capacity(k);
    visit(g, cand, k, &mut chosen, &mut |c| {
        f(c);
        true
    });
}

/// Depth-first enumeration in lexicographic order; `f` returns `false` to stop.
fn visit(
    g: &Graph,
    cand: &[u64],
    k: usize,
    chosen: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if k == 0 {
        return f(chosen);
    }
    if popcount(cand) < k {
        return true;
    }
    let mut next = vec![0u64; cand.len()];
    for v in BitIter::new(cand) {
        for ((dst, a), b) in next.iter_mut().zip(g.row(v)).zip(cand) {
            *dst = a & b;
        }
        clear_upto(&mut next, v);
        chosen.push(v);
        let go_on = visit(g, &next, k - 1, chosen, f);
        chosen.pop();
        if !go_on {
            return false;
        }
    }
    true
}
