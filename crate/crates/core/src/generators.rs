//! Seeded synthetic graphs and the percentile target rule.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, TargetSet};

const MAX_REGENERATIONS: u64 = 10;

fn build(n: usize, edges: &BTreeSet<(usize, usize)>) -> Result<Graph> {
    Graph::from_edges(n, edges.iter().map(|&(i, j)| (i, j, 1.0)), false)
}

/// Preferential attachment: a clique on `attach + 1` nodes, then every new
/// node links to `attach` distinct existing nodes chosen with probability
/// proportional to degree.
pub fn barabasi_albert(n: usize, attach: usize, seed: u64) -> Result<Graph> {
    if attach == 0 || attach >= n {
        return Err(Error::InvalidParameter(format!(
            "barabasi_albert needs 1 <= attach < n, got attach={attach}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = BTreeSet::new();
    // Each node appears once per incident edge end.
    let mut ends: Vec<usize> = Vec::new();
    let core = (attach + 1).min(n);
    for i in 0..core {
        for j in (i + 1)..core {
            edges.insert((i, j));
            ends.push(i);
            ends.push(j);
        }
    }
    for v in core..n {
        let mut chosen = BTreeSet::new();
        while chosen.len() < attach {
            chosen.insert(ends[rng.random_range(0..ends.len())]);
        }
        for u in chosen {
            edges.insert((u, v));
            ends.push(u);
            ends.push(v);
        }
    }
    build(n, &edges)
}

fn watts_strogatz_once(n: usize, k: usize, p: f64, rng: &mut ChaCha8Rng) -> Result<Graph> {
    let mut edges = BTreeSet::new();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    for i in 0..n {
        for off in 1..=k / 2 {
            edges.insert(key(i, (i + off) % n));
        }
    }
    for off in 1..=k / 2 {
        for i in 0..n {
            let old = key(i, (i + off) % n);
            if rng.random::<f64>() >= p || !edges.contains(&old) {
                continue;
            }
            // Every other node already adjacent to i: no valid target.
            let degree_i = edges.iter().filter(|&&(a, b)| a == i || b == i).count();
            if degree_i >= n - 1 {
                continue;
            }
            let target = loop {
                let t = rng.random_range(0..n);
                if t != i && !edges.contains(&key(i, t)) {
                    break t;
                }
            };
            edges.remove(&old);
            edges.insert(key(i, target));
        }
    }
    build(n, &edges)
}

/// Ring lattice with `k` neighbours per node whose clockwise edges are each
/// rewired with probability `p`. Disconnected draws are regenerated from a
/// fresh stream up to ten times.
pub fn watts_strogatz(n: usize, k: usize, p: f64, seed: u64) -> Result<Graph> {
    if !k.is_multiple_of(2) || k >= n || !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "watts_strogatz needs even k < n and p in [0,1], got n={n}, k={k}, p={p}"
        )));
    }
    for attempt in 0..MAX_REGENERATIONS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let g = watts_strogatz_once(n, k, p, &mut rng)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Generation(format!(
        "no connected Watts-Strogatz graph after {MAX_REGENERATIONS} draws"
    )))
}

/// The node whose degree sits at the given nearest-rank percentile (smallest
/// id among equal degrees), together with its neighbours.
pub fn percentile_target(g: &Graph, percentile: f64) -> Result<TargetSet> {
    let n = g.node_count();
    if n == 0 || !(0.0..=100.0).contains(&percentile) {
        return Err(Error::InvalidParameter(format!(
            "percentile must lie in [0,100], got {percentile}"
        )));
    }
    let deg = g.degree_vector();
    let mut sorted = deg.clone();
    sorted.sort_by(f64::total_cmp);
    let rank = ((percentile / 100.0 * n as f64).ceil() as usize).clamp(1, n);
    let target_degree = sorted[rank - 1];
    let node = (0..n).find(|&i| deg[i] == target_degree).expect("degree taken from the sequence");
    TargetSet::new(n, std::iter::once(node).chain(g.neighbors(node).iter().map(|&(j, _)| j)))
}
