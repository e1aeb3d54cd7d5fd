//! How far degree sequences, mean degree and triangle counts can move under a
//! perturbation of given spectral norm.

use log::warn;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::DenseMatrix;
use crate::spectral::{spectral_norm_of, PowerConfig};

/// A measured deviation next to its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub measured: f64,
    pub bound: f64,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.measured <= self.bound
    }
}

fn check_sizes(g: &Graph, h: &Graph) -> Result<()> {
    if g.node_count() != h.node_count() {
        return Err(Error::SizeMismatch(g.node_count(), h.node_count()));
    }
    Ok(())
}

/// `‖Ã − A‖₂`. Uses the dense eigensolver up to its size cap so the bounds
/// below are not weakened by a power-iteration underestimate.
pub fn delta_norm(g: &Graph, h: &Graph, cfg: &PowerConfig) -> Result<f64> {
    check_sizes(g, h)?;
    let delta = h.to_dense().sub(&g.to_dense());
    if delta.max_abs() == 0.0 {
        return Ok(0.0);
    }
    match crate::spectral::full_spectrum(&delta) {
        Ok(spec) => Ok(spec.iter().fold(0.0f64, |m, v| m.max(v.abs()))),
        Err(Error::DimensionTooLarge { .. }) => spectral_norm_of(&delta, cfg),
        Err(e) => Err(e),
    }
}

/// `‖d̃ − d‖₂` against `√n·‖Δ‖₂`.
pub fn degree_sequence_deviation(g: &Graph, h: &Graph, cfg: &PowerConfig) -> Result<BoundCheck> {
    let norm = delta_norm(g, h, cfg)?;
    let (d, dt) = (g.degree_vector(), h.degree_vector());
    let measured = d.iter().zip(&dt).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
    Ok(BoundCheck {
        measured,
        bound: (g.node_count() as f64).sqrt() * norm,
    })
}

/// `|mean d̃ − mean d|` against `‖Δ‖₂`.
pub fn average_degree_deviation(g: &Graph, h: &Graph, cfg: &PowerConfig) -> Result<BoundCheck> {
    let norm = delta_norm(g, h, cfg)?;
    let n = g.node_count() as f64;
    let mean = |d: Vec<f64>| d.iter().sum::<f64>() / n;
    let measured = (mean(h.degree_vector()) - mean(g.degree_vector())).abs();
    Ok(BoundCheck { measured, bound: norm })
}

/// Triangle count by wedge enumeration over `i < j < k`.
pub fn triangle_count(g: &Graph) -> u64 {
    let mut count = 0;
    for i in 0..g.node_count() {
        let ni = g.neighbors(i);
        for &(j, _) in ni.iter().filter(|&&(j, _)| j > i) {
            let nj = g.neighbors(j);
            // Sorted merge of the neighbours above j.
            let (mut a, mut b) = (0, 0);
            while a < ni.len() && b < nj.len() {
                let (x, y) = (ni[a].0, nj[b].0);
                if x <= j {
                    a += 1;
                } else if y <= j {
                    b += 1;
                } else if x == y {
                    count += 1;
                    a += 1;
                    b += 1;
                } else if x < y {
                    a += 1;
                } else {
                    b += 1;
                }
            }
        }
    }
    count
}

/// Triangles via `trace(A³)/6`, for binary matrices.
pub fn triangle_count_trace(a: &DenseMatrix) -> f64 {
    let n = a.n();
    let mut a2 = DenseMatrix::zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a.get(i, k);
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                a2.add(i, j, aik * a.get(k, j));
            }
        }
    }
    let mut tr = 0.0;
    for i in 0..n {
        for k in 0..n {
            tr += a2.get(i, k) * a.get(k, i);
        }
    }
    tr / 6.0
}

/// `|T − T̃|` against the first-order bound `‖Δ‖₂·m`, `m` the edge count of
/// `g`. Violations are possible for large perturbations and are logged.
pub fn triangle_deviation(g: &Graph, h: &Graph, cfg: &PowerConfig) -> Result<BoundCheck> {
    if g.is_weighted() || h.is_weighted() {
        return Err(Error::InvalidParameter("triangle deviation needs unweighted graphs".into()));
    }
    let norm = delta_norm(g, h, cfg)?;
    let (t, tt) = (triangle_count(g), triangle_count(h));
    let check = BoundCheck {
        measured: t.abs_diff(tt) as f64,
        bound: norm * g.edge_count() as f64,
    };
    if !check.holds() {
        warn!(
            "triangle deviation {} exceeds the first-order bound {}",
            check.measured, check.bound
        );
    }
    Ok(check)
}
