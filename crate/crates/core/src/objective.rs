//! The attacker objective `α₁·λ₁(Ã_S) + α₂·σ(S) + α₃·φ(S)` and its gradient
//! with respect to the full adjacency matrix.
//!
//! All gradients use the full-matrix convention (`Ã_ij` and `Ã_ji` are
//! separate variables) and are returned symmetrized, `(G + Gᵀ)/2`, with an
//! exactly zero diagonal.

use crate::error::{Error, Result};
use crate::graph::TargetSet;
use crate::matrix::{DenseMatrix, SymOperator};
use crate::spectral::{dot, norm2, perron_pair, start_vector, PowerConfig};

/// Nonnegative weights of the three objective terms. They need not sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights {
    /// Weight of `λ₁(Ã_S)`.
    pub lambda: f64,
    /// Weight of the eigenvector centrality `σ(S)`.
    pub centrality: f64,
    /// Weight of the normalized cut `φ(S)`.
    pub cut: f64,
}

impl ObjectiveWeights {
    pub fn new(lambda: f64, centrality: f64, cut: f64) -> Result<Self> {
        let w = [lambda, centrality, cut];
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "objective weights must be finite and nonnegative, got {w:?}"
            )));
        }
        if w.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidParameter("objective weights are all zero".into()));
        }
        Ok(Self {
            lambda,
            centrality,
            cut,
        })
    }

    pub fn equal() -> Self {
        Self {
            lambda: 1.0 / 3.0,
            centrality: 1.0 / 3.0,
            cut: 1.0 / 3.0,
        }
    }
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self::equal()
    }
}

/// A term value with its symmetrized gradient.
#[derive(Debug, Clone)]
pub struct TermGradient {
    pub value: f64,
    pub gradient: DenseMatrix,
    /// Set when the term is degenerate (edgeless `Ã_S`) or ill-conditioned
    /// (disconnected `Ã`, or power iteration that did not converge).
    pub warning: Option<ObjectiveWarning>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveWarning {
    EdgelessTarget,
    Disconnected,
    NotConverged,
}

#[derive(Debug, Clone)]
pub struct ObjectiveReport {
    /// `None` for terms whose weight is zero (they are not evaluated).
    pub lambda1_s: Option<f64>,
    pub sigma_s: Option<f64>,
    pub phi_s: Option<f64>,
    pub total: f64,
    pub gradient: DenseMatrix,
    pub warnings: Vec<ObjectiveWarning>,
}

/// `λ₁(Ã_S)` with gradient `v_S v_Sᵀ` embedded on `S×S` (off-diagonal).
pub fn grad_lambda1_s(a: &DenseMatrix, s: &TargetSet, cfg: &PowerConfig) -> Result<TermGradient> {
    let n = a.n();
    let members = s.members();
    let sub = a.submatrix(members);
    let mut gradient = DenseMatrix::zeros(n);
    if sub.max_abs() == 0.0 {
        return Ok(TermGradient {
            value: 0.0,
            gradient,
            warning: Some(ObjectiveWarning::EdgelessTarget),
        });
    }
    let est = perron_pair(&sub, cfg)?;
    let v = &est.vector;
    for (p, &i) in members.iter().enumerate() {
        for (q, &j) in members.iter().enumerate() {
            if p != q {
                gradient.set(i, j, v[p] * v[q]);
            }
        }
    }
    Ok(TermGradient {
        value: est.value,
        gradient,
        warning: (!est.converged).then_some(ObjectiveWarning::NotConverged),
    })
}

/// Forward trace of the unrolled power iteration on the full matrix.
struct PowerTrace {
    /// `x⁽⁰⁾ … x⁽ᵀ⁾`, unit vectors.
    iterates: Vec<Vec<f64>>,
    /// `‖y⁽ᵗ⁾‖₂` for `t = 0 … T−1`.
    norms: Vec<f64>,
    converged: bool,
}

/// Power iteration on `Ã + shift·I`; the shift leaves eigenvectors unchanged.
fn unrolled_power(a: &DenseMatrix, cfg: &PowerConfig, shift: f64) -> Result<PowerTrace> {
    let n = a.n();
    let mut y = vec![0.0; n];
    let mut x0 = None;
    for attempt in 0..=3 {
        let x = start_vector(n, cfg.seed, attempt);
        a.apply(&x, &mut y);
        if norm2(&y) > 0.0 {
            x0 = Some(x);
            break;
        }
    }
    let x0 = x0.ok_or(Error::ZeroImage)?;
    let mut iterates = vec![x0];
    let mut norms = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.k.max(1) {
        let x = iterates.last().expect("nonempty");
        a.apply(x, &mut y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += shift * xi;
        }
        let nrm = norm2(&y);
        if nrm == 0.0 {
            break;
        }
        let next: Vec<f64> = y.iter().map(|v| v / nrm).collect();
        let sign = if dot(&next, x) < 0.0 { -1.0 } else { 1.0 };
        let diff = next
            .iter()
            .zip(x)
            .map(|(p, q)| (sign * p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        norms.push(nrm);
        iterates.push(next);
        if diff < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(PowerTrace {
        iterates,
        norms,
        converged,
    })
}

/// Eigenvector centrality `σ(S) = Σ_{j∈S} v[j]` of the unit principal
/// eigenvector of `Ã` (sign fixed to a nonnegative sum), differentiated by
/// reverse accumulation through the unrolled power iteration.
pub fn grad_sigma_s(a: &DenseMatrix, s: &TargetSet, cfg: &PowerConfig) -> Result<TermGradient> {
    let trace = unrolled_power(a, cfg, 0.0)?;
    if trace.converged {
        return sigma_from_trace(a, s, &trace, 0.0);
    }
    // Oscillation between ±λ (bipartite support): shift the spectrum so the
    // Perron value dominates strictly. The shift is held constant.
    let shift = 0.5 * trace.norms.last().copied().unwrap_or(0.0);
    sigma_with_shift(a, s, cfg, shift)
}

/// `σ(S)` and its adjoint gradient from power iteration on `Ã + shift·I`.
pub(crate) fn sigma_with_shift(a: &DenseMatrix, s: &TargetSet, cfg: &PowerConfig, shift: f64) -> Result<TermGradient> {
    let trace = unrolled_power(a, cfg, shift)?;
    sigma_from_trace(a, s, &trace, shift)
}

fn sigma_from_trace(a: &DenseMatrix, s: &TargetSet, trace: &PowerTrace, shift: f64) -> Result<TermGradient> {
    let n = a.n();
    let last = trace.iterates.last().expect("nonempty");
    let sign = if last.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let value = sign * s.members().iter().map(|&j| last[j]).sum::<f64>();

    let mut grad = DenseMatrix::zeros(n);
    let mut xbar: Vec<f64> = s.indicator().into_iter().map(|v| sign * v).collect();
    let mut ybar = vec![0.0; n];
    for t in (0..trace.norms.len()).rev() {
        let x_next = &trace.iterates[t + 1];
        let x_prev = &trace.iterates[t];
        let proj = dot(x_next, &xbar);
        let inv = 1.0 / trace.norms[t];
        for ((yb, xb), xn) in ybar.iter_mut().zip(&xbar).zip(x_next) {
            *yb = (xb - xn * proj) * inv;
        }
        for (i, &yi) in ybar.iter().enumerate() {
            if yi != 0.0 {
                for (j, &xj) in x_prev.iter().enumerate() {
                    grad.add(i, j, yi * xj);
                }
            }
        }
        a.apply(&ybar, &mut xbar);
        for (xb, yb) in xbar.iter_mut().zip(&ybar) {
            *xb += shift * yb;
        }
    }
    grad.symmetrize();
    grad.zero_diagonal();

    let warning = if !support_connected(a) {
        Some(ObjectiveWarning::Disconnected)
    } else if !trace.converged {
        Some(ObjectiveWarning::NotConverged)
    } else {
        None
    };
    Ok(TermGradient {
        value,
        gradient: grad,
        warning,
    })
}

fn support_connected(a: &DenseMatrix) -> bool {
    let n = a.n();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for (v, &w) in a.row(u).iter().enumerate() {
            if w != 0.0 && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|b| b)
}

/// Normalized cut with its closed-form gradient under row-sum degrees.
pub fn grad_phi_s(a: &DenseMatrix, s: &TargetSet) -> Result<TermGradient> {
    let n = a.n();
    let mut cut = 0.0;
    let mut vol_s = 0.0;
    let mut vol_c = 0.0;
    for i in 0..n {
        let row = a.row(i);
        if s.contains(i) {
            for (j, &w) in row.iter().enumerate() {
                vol_s += w;
                if !s.contains(j) {
                    cut += w;
                }
            }
        } else {
            vol_c += row.iter().sum::<f64>();
        }
    }
    let value = crate::graph::normalized_cut_from_parts(cut, vol_s, vol_c)?;
    let cross = 1.0 / vol_s + 1.0 / vol_c;
    let in_s = -cut / (vol_s * vol_s);
    let in_c = -cut / (vol_c * vol_c);
    // Full-matrix entries: (S,S′) = cross + in_s, (S′,S) = in_c,
    // (S,S) = in_s, (S′,S′) = in_c. Symmetrize pairwise.
    let mut gradient = DenseMatrix::zeros(n);
    let mixed = 0.5 * (cross + in_s + in_c);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = match (s.contains(i), s.contains(j)) {
                (true, true) => in_s,
                (false, false) => in_c,
                _ => mixed,
            };
            gradient.set_sym(i, j, v);
        }
    }
    Ok(TermGradient {
        value,
        gradient,
        warning: None,
    })
}

/// Weighted objective and gradient. Terms with zero weight are skipped.
pub fn evaluate(
    a: &DenseMatrix,
    s: &TargetSet,
    w: &ObjectiveWeights,
    cfg: &PowerConfig,
) -> Result<ObjectiveReport> {
    let n = a.n();
    let mut gradient = DenseMatrix::zeros(n);
    let mut total = 0.0;
    let mut warnings = Vec::new();
    let mut term = |weight: f64, t: TermGradient| -> f64 {
        total += weight * t.value;
        gradient.add_scaled(weight, &t.gradient);
        warnings.extend(t.warning);
        t.value
    };
    let lambda1_s = if w.lambda > 0.0 {
        Some(term(w.lambda, grad_lambda1_s(a, s, cfg)?))
    } else {
        None
    };
    let sigma_s = if w.centrality > 0.0 {
        Some(term(w.centrality, grad_sigma_s(a, s, cfg)?))
    } else {
        None
    };
    let phi_s = if w.cut > 0.0 {
        Some(term(w.cut, grad_phi_s(a, s)?))
    } else {
        None
    };
    Ok(ObjectiveReport {
        lambda1_s,
        sigma_s,
        phi_s,
        total,
        gradient,
        warnings,
    })
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Finite-difference references built on the dense eigensolver, kept
    //! independent of the power-iteration code paths they check.

    use super::*;
    use crate::spectral::full_eigen;

    pub fn lambda1_dense(a: &DenseMatrix, s: &TargetSet) -> f64 {
        let sub = a.submatrix(s.members());
        crate::spectral::full_spectrum(&sub).unwrap()[0]
    }

    pub fn sigma_dense(a: &DenseMatrix, s: &TargetSet) -> f64 {
        let (_, vecs) = full_eigen(a).unwrap();
        let v = &vecs[0];
        let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        sign * s.members().iter().map(|&j| v[j]).sum::<f64>()
    }

    pub fn phi_direct(a: &DenseMatrix, s: &TargetSet) -> f64 {
        let n = a.n();
        let mut cut = 0.0;
        let mut vs = 0.0;
        let mut vc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let w = a.get(i, j);
                if s.contains(i) {
                    vs += w;
                    if !s.contains(j) {
                        cut += w;
                    }
                } else {
                    vc += w;
                }
            }
        }
        cut * (1.0 / vs + 1.0 / vc)
    }

    /// Central difference of `f` under the symmetric perturbation of `(i,j)`,
    /// halved so that it matches a symmetrized full-matrix gradient entry.
    pub fn sym_fd<F: Fn(&DenseMatrix) -> f64>(a: &DenseMatrix, i: usize, j: usize, h: f64, f: F) -> f64 {
        let mut p = a.clone();
        p.set_sym(i, j, a.get(i, j) + h);
        let mut m = a.clone();
        m.set_sym(i, j, a.get(i, j) - h);
        (f(&p) - f(&m)) / (2.0 * h) / 2.0
    }
}
