//! Power-iteration eigenpair estimation, spectral norms of symmetric
//! perturbations, and a dense eigensolver used for verification.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Negated, Perturbation, Shifted, Squared, SymOperator};

/// Iteration depth, convergence tolerance and seed for every power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            k: 50,
            tol: 1e-10,
            seed: 0,
        }
    }
}

/// Fallback iterations run `FALLBACK_FACTOR · k` steps.
const FALLBACK_FACTOR: usize = 20;
const MAX_RESTARTS: u64 = 3;

/// Default dimension cap for [`full_spectrum`].
pub const DENSE_CAP: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenEstimate {
    /// Rayleigh quotient `vᵀMv`.
    pub value: f64,
    /// Unit vector.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// `‖Mv − λv‖₂`.
    pub residual: f64,
    /// Whether successive (sign-aligned) iterates came within `tol`.
    pub converged: bool,
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Seeded start vector with entries uniform in (0, 1], normalized.
pub(crate) fn start_vector(n: usize, seed: u64, attempt: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt);
    let mut x: Vec<f64> = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
    let nrm = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nrm);
    x
}

/// First start vector with a nonzero image under `m`, retried up to three times.
fn nondegenerate_start<M: SymOperator>(m: &M, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = m.dim();
    let mut y = vec![0.0; n];
    for attempt in 0..=MAX_RESTARTS {
        let x = start_vector(n, seed, attempt);
        m.apply(&x, &mut y);
        if norm2(&y) > 0.0 {
            return Ok((x, y));
        }
    }
    Err(Error::ZeroImage)
}

/// Power iteration `v ← Mv/‖Mv‖` for at most `cfg.k` steps. Returns the
/// Rayleigh quotient with the final unit vector; on a symmetric matrix this
/// approaches the (signed) eigenvalue of largest magnitude.
///
/// When the iteration has not converged after `k` steps (typically a tie
/// `|λ₁| ≈ |λₙ|`), `M²` is iterated instead and the resulting vector split
/// into its `+μ` and `−μ` components; the heavier component is kept if it has
/// the smaller residual.
pub fn power_iterate<M: SymOperator>(m: &M, cfg: &PowerConfig) -> Result<EigenEstimate> {
    let plain = power_iterate_steps(m, cfg.k, cfg.tol, cfg.seed)?;
    if plain.converged {
        return Ok(plain);
    }
    let sq = power_iterate_steps(&Squared(m), cfg.k * FALLBACK_FACTOR, cfg.tol, cfg.seed)?;
    let mut w = vec![0.0; m.dim()];
    m.apply(&sq.vector, &mut w);
    let mu = norm2(&w);
    if mu == 0.0 {
        return Ok(plain);
    }
    let plus: Vec<f64> = sq.vector.iter().zip(&w).map(|(u, v)| 0.5 * (u + v / mu)).collect();
    let minus: Vec<f64> = sq.vector.iter().zip(&w).map(|(u, v)| 0.5 * (u - v / mu)).collect();
    let mut pick = if norm2(&plus) >= norm2(&minus) { plus } else { minus };
    let nrm = norm2(&pick);
    pick.iter_mut().for_each(|v| *v /= nrm);
    let (value, residual) = rayleigh(m, &pick);
    if residual < plain.residual {
        Ok(EigenEstimate {
            value,
            vector: pick,
            iterations: plain.iterations + sq.iterations,
            residual,
            converged: sq.converged,
        })
    } else {
        Ok(plain)
    }
}

/// Rayleigh quotient and residual norm for a unit vector.
fn rayleigh<M: SymOperator>(m: &M, x: &[f64]) -> (f64, f64) {
    let mut y = vec![0.0; m.dim()];
    m.apply(x, &mut y);
    let value = dot(x, &y);
    let residual = y
        .iter()
        .zip(x)
        .map(|(a, b)| (a - value * b).powi(2))
        .sum::<f64>()
        .sqrt();
    (value, residual)
}

fn power_iterate_steps<M: SymOperator>(m: &M, k: usize, tol: f64, seed: u64) -> Result<EigenEstimate> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let k = k.max(1);
    let (mut x, mut y) = nondegenerate_start(m, seed)?;
    let mut converged = false;
    let mut iterations = 0;
    for t in 0..k {
        if t > 0 {
            m.apply(&x, &mut y);
        }
        let nrm = norm2(&y);
        iterations = t + 1;
        if nrm == 0.0 {
            // x fell into the null space: it is an eigenvector for 0.
            converged = true;
            break;
        }
        let sign = if dot(&y, &x) < 0.0 { -1.0 } else { 1.0 };
        let mut diff = 0.0;
        for (xi, yi) in x.iter_mut().zip(&y) {
            let next = yi / nrm;
            diff += (sign * next - *xi).powi(2);
            *xi = next;
        }
        if diff.sqrt() < tol {
            converged = true;
            break;
        }
    }
    let (value, residual) = rayleigh(m, &x);
    Ok(EigenEstimate {
        value,
        vector: x,
        iterations,
        residual,
        converged,
    })
}

/// Dominant eigenpair of a matrix whose top eigenvalue is known to be the
/// largest algebraically (adjacency-like matrices). Falls back to iterating on
/// `M + sI` when plain iteration stalls, as it does on (near-)bipartite
/// graphs where `λₙ ≈ −λ₁`. The returned vector has nonnegative sum.
pub fn perron_pair<M: SymOperator>(m: &M, cfg: &PowerConfig) -> Result<EigenEstimate> {
    let mut est = power_iterate_steps(m, cfg.k, cfg.tol, cfg.seed)?;
    if !est.converged || est.value < 0.0 {
        let shift = m_inf_estimate(m, &est.vector);
        let shifted = Shifted { inner: m, shift };
        let alt = power_iterate_steps(&shifted, cfg.k * FALLBACK_FACTOR, cfg.tol, cfg.seed)?;
        let (value, residual) = rayleigh(m, &alt.vector);
        est = EigenEstimate {
            value,
            vector: alt.vector,
            iterations: est.iterations + alt.iterations,
            residual,
            converged: alt.converged,
        };
    }
    if est.vector.iter().sum::<f64>() < 0.0 {
        est.vector.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(est)
}

/// `‖Mx‖₂` for the last iterate: close to the dominant magnitude even when
/// the iteration oscillates between two eigenvectors of equal magnitude.
fn m_inf_estimate<M: SymOperator>(m: &M, x: &[f64]) -> f64 {
    let mut y = vec![0.0; m.dim()];
    m.apply(x, &mut y);
    norm2(&y)
}

/// `‖M‖₂ = max{|λ₁(M)|, |λ₁(−M)|}` for symmetric `M`, each side by power
/// iteration. When either side fails to converge (indefinite matrices with
/// `|λ₁| ≈ |λₙ|`), `M²` is iterated as well and `√(xᵀM²x)` considered. Every
/// candidate is a lower bound on the true norm, so the largest is returned.
pub fn spectral_norm_of<M: SymOperator>(m: &M, cfg: &PowerConfig) -> Result<f64> {
    if m.dim() == 0 {
        return Ok(0.0);
    }
    let pos = match power_iterate_steps(m, cfg.k, cfg.tol, cfg.seed) {
        Ok(e) => e,
        // Four random vectors all in the null space: M = 0 almost surely.
        Err(Error::ZeroImage) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let neg = power_iterate_steps(&Negated(m), cfg.k, cfg.tol, cfg.seed)?;
    let mut best = pos.value.abs().max(neg.value.abs());
    if !(pos.converged && neg.converged) {
        let sq = power_iterate_steps(&Squared(m), cfg.k * FALLBACK_FACTOR, cfg.tol, cfg.seed)?;
        best = best.max(sq.value.max(0.0).sqrt());
    }
    Ok(best)
}

/// Spectral norm of a perturbation; caches the value inside it.
pub fn spectral_norm(p: &mut Perturbation, cfg: &PowerConfig) -> Result<f64> {
    if let Some(v) = p.cached_norm() {
        return Ok(v);
    }
    let v = spectral_norm_of(p.matrix(), cfg)?;
    p.set_cached_norm(v);
    Ok(v)
}

/// All eigenvalues of a symmetric matrix, descending, from a dense symmetric
/// eigensolver. Refuses matrices above `cap`.
pub fn full_spectrum_capped(m: &DenseMatrix, cap: usize) -> Result<Vec<f64>> {
    let n = m.n();
    if n > cap {
        return Err(Error::DimensionTooLarge { dim: n, cap });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mat = nalgebra::DMatrix::from_row_slice(n, n, m.as_slice());
    let eig = nalgebra::SymmetricEigen::new(mat);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

pub fn full_spectrum(m: &DenseMatrix) -> Result<Vec<f64>> {
    full_spectrum_capped(m, DENSE_CAP)
}

/// Eigenvalues (descending) and unit eigenvectors (as columns, same order).
pub fn full_eigen(m: &DenseMatrix) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = m.n();
    if n > DENSE_CAP {
        return Err(Error::DimensionTooLarge { dim: n, cap: DENSE_CAP });
    }
    let mat = nalgebra::DMatrix::from_row_slice(n, n, m.as_slice());
    let eig = nalgebra::SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    Ok((vals, vecs))
}

/// `max_i |λᵢ(B) − λᵢ(A)|` with both spectra sorted descending.
pub fn max_eigenvalue_shift(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    let sa = full_spectrum(a)?;
    let sb = full_spectrum(b)?;
    Ok(sa
        .iter()
        .zip(&sb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    fn cfg() -> PowerConfig {
        PowerConfig {
            k: 2000,
            tol: 1e-12,
            seed: 7,
        }
    }

    #[test]
    fn dominant_eigenvalues_of_small_graphs() {
        let k3 = complete(3);
        let e = power_iterate(&k3, &PowerConfig::default()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-8);
        assert!((norm2(&e.vector) - 1.0).abs() < 1e-12);

        // P3 is bipartite: plain iteration oscillates, the Perron fallback does not.
        let e = perron_pair(&path3(), &PowerConfig::default()).unwrap();
        assert!((e.value - 2f64.sqrt()).abs() < 1e-8, "{}", e.value);
        assert!(e.vector.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn single_edge_magnitude_one() {
        let mut m = DenseMatrix::zeros(3);
        m.set_sym(0, 1, 1.0);
        let e = power_iterate(&m, &PowerConfig::default()).unwrap();
        assert!((e.value.abs() - 1.0).abs() < 1e-8, "{}", e.value);
        assert!(e.residual < 1e-8);
    }

    #[test]
    fn zero_image_error() {
        let m = DenseMatrix::zeros(3);
        assert!(matches!(power_iterate(&m, &cfg()), Err(Error::ZeroImage)));
    }

    #[test]
    fn spectral_norm_examples() {
        let mut p = Perturbation::zeros(4);
        assert_eq!(spectral_norm(&mut p, &cfg()).unwrap(), 0.0);
        let mut p = Perturbation::new(DenseMatrix::zeros(4));
        assert_eq!(spectral_norm(&mut p, &cfg()).unwrap(), 0.0);

        let mut flip = DenseMatrix::zeros(4);
        flip.set_sym(1, 2, -1.0);
        let mut p = Perturbation::new(flip);
        assert!((spectral_norm(&mut p, &PowerConfig::default()).unwrap() - 1.0).abs() < 1e-8);
        assert!(p.cached_norm().is_some());

        let mut two = DenseMatrix::zeros(4);
        two.set_sym(0, 1, 1.0);
        two.set_sym(2, 3, 1.0);
        let oracle = full_spectrum(&two).unwrap();
        let expect = oracle[0].abs().max(oracle[3].abs());
        assert!((expect - 1.0).abs() < 1e-12);
        let got = spectral_norm_of(&two, &PowerConfig::default()).unwrap();
        assert!((got - expect).abs() < 1e-8);
    }

    #[test]
    fn full_spectrum_examples() {
        let s = full_spectrum(&complete(4).to_dense()).unwrap();
        for (a, b) in s.iter().zip([3.0, -1.0, -1.0, -1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let s = full_spectrum(&path3().to_dense()).unwrap();
        let r = 2f64.sqrt();
        for (a, b) in s.iter().zip([r, 0.0, -r]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(full_spectrum(&DenseMatrix::zeros(3)).unwrap(), vec![0.0; 3]);
        assert!(matches!(
            full_spectrum_capped(&DenseMatrix::zeros(5), 4),
            Err(Error::DimensionTooLarge { dim: 5, cap: 4 })
        ));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let g = star(6);
        let a = power_iterate(&g, &PowerConfig::default()).unwrap();
        let b = power_iterate(&g, &PowerConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
