//! Independent oracles shared by the integration tests. Nothing here calls
//! into the counting code under test.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use qkcount::graph::Edge;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// G(n, p) with labels `0..n`, by independent coin flips.
pub fn gnp_edges(n: u64, p: f64, rng: &mut impl Rng) -> Vec<Edge> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push(Edge::new(a, b));
            }
        }
    }
    edges
}

pub fn complete_edges(n: u64) -> Vec<Edge> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| Edge::new(a, b))).collect()
}

/// Undirected simple edge set as ordered label pairs.
pub fn simple(edges: &[Edge]) -> BTreeSet<(u64, u64)> {
    edges
        .iter()
        .filter(|e| e.u != e.v)
        .map(|e| (e.u.0.min(e.v.0), e.u.0.max(e.v.0)))
        .collect()
}

/// k-clique count by bitset extension over the raw edge list (≤ 64 nodes).
pub fn oracle_count(edges: &[Edge], k: usize) -> u64 {
    let set = simple(edges);
    let labels: BTreeSet<u64> = set.iter().flat_map(|&(a, b)| [a, b]).collect();
    let index: BTreeMap<u64, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    assert!(labels.len() <= 64, "oracle limited to 64 nodes");
    let mut adj = vec![0u64; labels.len()];
    for &(a, b) in &set {
        let (i, j) = (index[&a], index[&b]);
        adj[i] |= 1 << j;
        adj[j] |= 1 << i;
    }
    fn extend(adj: &[u64], candidates: u64, remaining: usize) -> u64 {
        if remaining == 0 {
            return 1;
        }
        let mut total = 0;
        let mut rest = candidates;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            // only higher-indexed candidates, so each clique is counted once
            total += extend(adj, rest & adj[v], remaining - 1);
        }
        total
    }
    if k == 0 {
        return 1;
    }
    let all = if labels.len() == 64 {
        u64::MAX
    } else {
        (1u64 << labels.len()) - 1
    };
    extend(&adj, all, k)
}

/// `|Γ+(u)|` for every node, computed from scratch from the edge list.
pub fn oracle_high_degrees(edges: &[Edge]) -> BTreeMap<u64, usize> {
    let set = simple(edges);
    let mut degree: BTreeMap<u64, usize> = BTreeMap::new();
    for &(a, b) in &set {
        *degree.entry(a).or_default() += 1;
        *degree.entry(b).or_default() += 1;
    }
    let key = |x: u64| (degree[&x], x);
    let mut high: BTreeMap<u64, usize> = degree.keys().map(|&x| (x, 0)).collect();
    for &(a, b) in &set {
        let lo = if key(a) < key(b) { a } else { b };
        *high.get_mut(&lo).unwrap() += 1;
    }
    high
}

/// Round-2 traffic of the exact pipeline: `Σ C(|Γ+(u)|, 2)` over nodes with
/// `|Γ+(u)| ≥ k − 1`, plus one marker per edge.
pub fn oracle_round2_pairs(edges: &[Edge], k: usize) -> u64 {
    let m = simple(edges).len() as u64;
    oracle_high_degrees(edges)
        .values()
        .filter(|&&h| h >= k - 1)
        .map(|&h| (h * (h.saturating_sub(1)) / 2) as u64)
        .sum::<u64>()
        + m
}

/// Number of non-decreasing k-tuples over `[0, b)` that contain `{i, j}` as
/// a sub-multiset, by enumerating every tuple.
pub fn tuples_containing(b: u32, k: usize, i: u32, j: u32) -> u64 {
    fn rec(b: u32, left: usize, from: u32, cur: &mut Vec<u32>, i: u32, j: u32, hits: &mut u64) {
        if left == 0 {
            let ok = if i == j {
                cur.iter().filter(|&&x| x == i).count() >= 2
            } else {
                cur.contains(&i) && cur.contains(&j)
            };
            *hits += ok as u64;
            return;
        }
        for x in from..b {
            cur.push(x);
            rec(b, left - 1, x, cur, i, j, hits);
            cur.pop();
        }
    }
    let mut hits = 0;
    rec(b, k, 0, &mut Vec::new(), i, j, &mut hits);
    hits
}

pub fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
