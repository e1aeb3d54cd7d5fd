//! Turning the fractional ascent output into a valid adjacency matrix.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{DenseMatrix, SymOperator};
use crate::optimizer::AttackResult;
use crate::spectral::{spectral_norm_of, PowerConfig};

/// Entries closer than this to the original count as unchanged.
pub const CHANGE_THRESHOLD: f64 = 1e-9;

/// Sparse symmetric matrix with mutable entries, used for running
/// perturbations that touch few node pairs.
#[derive(Debug, Clone, Default)]
pub struct SparseSym {
    rows: Vec<BTreeMap<usize, f64>>,
}

impl SparseSym {
    pub fn zeros(n: usize) -> Self {
        Self {
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].get(&j).copied().unwrap_or(0.0)
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            self.rows[i].remove(&j);
            self.rows[j].remove(&i);
        } else {
            self.rows[i].insert(j, v);
            self.rows[j].insert(i, v);
        }
    }

    pub fn rows_len(&self) -> usize {
        self.rows.len()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].values().sum()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &v) in row {
                m.set(i, j, v);
            }
        }
        m
    }
}

impl SymOperator for SparseSym {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(&self.rows) {
            *yi = row.iter().map(|(&j, &w)| w * x[j]).sum();
        }
    }
}

/// A candidate edge toggle with its score `|Ã_ij − A_ij|`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    score: f64,
    i: usize,
    j: usize,
    add: bool,
}

/// Rounds the ascent output of an unweighted graph to a binary graph.
///
/// Node pairs whose entry changed are toggled in descending score order
/// (ties in lexicographic `(i, j)` order): absent edges whose entry grew are
/// added, present edges whose entry shrank are removed. After each toggle
/// the spectral norm of the cumulative binary perturbation is recomputed;
/// the first toggle that exceeds `epsilon` is reverted and rounding stops.
pub fn round_unweighted(
    g: &Graph,
    result: &AttackResult,
    epsilon: f64,
    cfg: &PowerConfig,
) -> Result<Graph> {
    if g.is_weighted() {
        return Err(Error::InvalidParameter("round_unweighted expects an unweighted graph".into()));
    }
    let n = g.node_count();
    if result.adjacency.n() != n {
        return Err(Error::SizeMismatch(n, result.adjacency.n()));
    }
    let mut candidates = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let orig = g.weight(i, j);
            let diff = result.adjacency.get(i, j) - orig;
            if diff.abs() <= CHANGE_THRESHOLD {
                continue;
            }
            let add = diff > 0.0;
            // Only toggles that change the binary graph.
            if add == (orig != 0.0) {
                continue;
            }
            candidates.push(Candidate {
                score: diff.abs(),
                i,
                j,
                add,
            });
        }
    }
    candidates.sort_by(|a, b| b.score.total_cmp(&a.score).then((a.i, a.j).cmp(&(b.i, b.j))));

    let mut delta = SparseSym::zeros(n);
    let mut accepted = Vec::new();
    for c in candidates {
        delta.set_sym(c.i, c.j, if c.add { 1.0 } else { -1.0 });
        if spectral_norm_of(&delta, cfg)? > epsilon {
            delta.set_sym(c.i, c.j, 0.0);
            break;
        }
        accepted.push(c);
    }

    let mut edges: BTreeMap<(usize, usize), f64> = g.edges().map(|(i, j, w)| ((i, j), w)).collect();
    for c in accepted {
        if c.add {
            edges.insert((c.i, c.j), 1.0);
        } else {
            edges.remove(&(c.i, c.j));
        }
    }
    Graph::from_edges(n, edges.into_iter().map(|((i, j), w)| (i, j, w)), false)
}

/// Maps the ascent output of a weight-normalized graph back to the original
/// scale: `A + C·Δ` with `C = max A_ij` (equal to `C·Ã` for `Ã = A/C + Δ`),
/// clipped at zero and optionally rounded to integers.
pub fn rescale_weighted(g: &Graph, result: &AttackResult, integer_weights: bool) -> Result<Graph> {
    let n = g.node_count();
    let delta = result.delta.matrix();
    if delta.n() != n {
        return Err(Error::SizeMismatch(n, delta.n()));
    }
    let c = g.max_weight();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut w = g.weight(i, j) + c * delta.get(i, j);
            if w < 0.0 {
                w = 0.0;
            }
            if integer_weights {
                w = w.round();
            }
            if w != 0.0 {
                edges.push((i, j, w));
            }
        }
    }
    Graph::from_edges(n, edges, true)
}

/// Divides every weight by the largest one; returns the scaled graph and `C`.
pub fn normalize_weights(g: &Graph) -> (Graph, f64) {
    let c = g.max_weight();
    if c == 0.0 {
        return (g.clone(), 1.0);
    }
    (g.divided_by(c), c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::matrix::Perturbation;
    use crate::optimizer::Termination;
    use crate::spectral::full_spectrum;

    fn result_from(a: &DenseMatrix, delta: DenseMatrix) -> AttackResult {
        let p = Perturbation::new(delta);
        let mut adj = a.clone();
        adj.add_scaled(1.0, p.matrix());
        AttackResult {
            adjacency: adj,
            delta: p,
            epsilon: f64::INFINITY,
            budget_used: 0.0,
            iterations: 0,
            objective_trace: vec![],
            step_norms: vec![],
            termination: Termination::BudgetExhausted,
        }
    }

    #[test]
    fn empty_candidate_set_is_identity() {
        let g = path3();
        let r = result_from(&g.to_dense(), DenseMatrix::zeros(3));
        assert_eq!(round_unweighted(&g, &r, 1.0, &PowerConfig::default()).unwrap(), g);
    }

    #[test]
    fn single_addition_within_budget() {
        let g = path3();
        let mut d = DenseMatrix::zeros(3);
        d.set_sym(0, 2, 0.9);
        let r = result_from(&g.to_dense(), d);
        let out = round_unweighted(&g, &r, 1.5, &PowerConfig::default()).unwrap();
        assert!(out.has_edge(0, 2));
        let out = round_unweighted(&g, &r, 0.5, &PowerConfig::default()).unwrap();
        assert_eq!(out, g);
    }

    #[test]
    fn disjoint_additions_share_unit_norm() {
        let g = unweighted(4, &[(0, 2), (1, 3)]);
        let mut d = DenseMatrix::zeros(4);
        d.set_sym(0, 1, 0.7);
        d.set_sym(2, 3, 0.6);
        let mut oracle = DenseMatrix::zeros(4);
        oracle.set_sym(0, 1, 1.0);
        oracle.set_sym(2, 3, 1.0);
        let spec = full_spectrum(&oracle).unwrap();
        assert!((spec[0].abs().max(spec[3].abs()) - 1.0).abs() < 1e-12);

        let r = result_from(&g.to_dense(), d);
        let out = round_unweighted(&g, &r, 1.2, &PowerConfig::default()).unwrap();
        assert!(out.has_edge(0, 1) && out.has_edge(2, 3));
        assert_eq!(out.edge_count(), 4);
    }

    #[test]
    fn removals_and_ordering() {
        // Two candidates: remove (0,1) with score 0.8, add (0,2) with score 0.8.
        // Equal scores fall back to lexicographic order, so (0,1) goes first.
        let g = path3();
        let mut d = DenseMatrix::zeros(3);
        d.set_sym(0, 1, -0.8);
        d.set_sym(0, 2, 0.8);
        let r = result_from(&g.to_dense(), d);
        let out = round_unweighted(&g, &r, 1.0, &PowerConfig::default()).unwrap();
        // Removing (0,1) costs 1; adding (0,2) on top gives norm √2 > 1.
        assert!(!out.has_edge(0, 1));
        assert!(!out.has_edge(0, 2));
        assert!(out.has_edge(1, 2));
    }

    #[test]
    fn rescale_examples() {
        let g = Graph::from_edges(3, [(0, 1, 0.37), (1, 2, 10.0)], true).unwrap();
        let r = result_from(&g.divided_by(10.0).to_dense(), DenseMatrix::zeros(3));
        assert_eq!(rescale_weighted(&g, &r, false).unwrap(), g);

        // Ã_02 = 0.37 with C = 10 and integer rounding gives 4.
        let mut d = DenseMatrix::zeros(3);
        d.set_sym(0, 2, 0.37);
        d.set_sym(0, 1, -0.037 - 0.002);
        let r = result_from(&g.divided_by(10.0).to_dense(), d);
        let out = rescale_weighted(&g, &r, true).unwrap();
        assert_eq!(out.weight(0, 2), 4.0);
        // 0.37 + 10·(−0.039) < 0, clipped.
        assert_eq!(out.weight(0, 1), 0.0);
        assert_eq!(out.weight(1, 2), 10.0);
    }

    #[test]
    fn normalize_weights_divides_by_max() {
        let g = Graph::from_edges(3, [(0, 1, 2.0), (1, 2, 8.0)], true).unwrap();
        let (h, c) = normalize_weights(&g);
        assert_eq!(c, 8.0);
        assert_eq!(h.weight(0, 1), 0.25);
        assert_eq!(h.weight(1, 2), 1.0);
    }
}
