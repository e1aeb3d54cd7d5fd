//! Dense symmetric matrices and the linear-operator abstraction used by the
//! power iteration.

use crate::graph::Graph;

/// A real symmetric linear operator `y = M x`.
pub trait SymOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl<T: SymOperator + ?Sized> SymOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

/// `-M`.
pub struct Negated<M>(pub M);

impl<M: SymOperator> SymOperator for Negated<M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    }
}

/// `M²`, positive semidefinite for symmetric `M`.
pub struct Squared<M>(pub M);

impl<M: SymOperator> SymOperator for Squared<M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut tmp = vec![0.0; x.len()];
        self.0.apply(x, &mut tmp);
        self.0.apply(&tmp, y);
    }
}

/// `M + shift·I`.
pub struct Shifted<M> {
    pub inner: M,
    pub shift: f64,
}

impl<M: SymOperator> SymOperator for Shifted<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += self.shift * xi;
        }
    }
}

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_graph(g: &Graph) -> Self {
        let mut m = Self::zeros(g.node_count());
        for (i, j, w) in g.edges() {
            m.set_sym(i, j, w);
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if `data.len() != n*n`.
    pub fn from_rows(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "expected {n}x{n} entries");
        Self { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn zero_diagonal(&mut self) {
        for i in 0..self.n {
            self.set(i, i, 0.0);
        }
    }

    /// Replaces the matrix by `(M + Mᵀ)/2`.
    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set_sym(i, j, v);
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| ((i + 1)..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == 0.0)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * t).collect(),
        }
    }

    /// `self += t·other`.
    pub fn add_scaled(&mut self, t: f64, other: &DenseMatrix) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += t * b;
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, other.n);
        DenseMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn submatrix(&self, idx: &[usize]) -> DenseMatrix {
        let k = idx.len();
        let mut out = DenseMatrix::zeros(k);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.data[a * k + b] = self.get(i, j);
            }
        }
        out
    }
}

impl SymOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// A symmetric zero-diagonal perturbation `Δ = Ã − A` with a cached
/// spectral-norm estimate.
#[derive(Debug, Clone)]
pub struct Perturbation {
    delta: DenseMatrix,
    spec_norm: Option<f64>,
}

impl Perturbation {
    pub fn zeros(n: usize) -> Self {
        Self {
            delta: DenseMatrix::zeros(n),
            spec_norm: Some(0.0),
        }
    }

    /// Wraps `delta`, forcing exact symmetry and a zero diagonal.
    pub fn new(mut delta: DenseMatrix) -> Self {
        delta.symmetrize();
        delta.zero_diagonal();
        Self {
            delta,
            spec_norm: None,
        }
    }

    pub fn between(original: &DenseMatrix, perturbed: &DenseMatrix) -> Self {
        Self::new(perturbed.sub(original))
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.delta
    }

    pub fn cached_norm(&self) -> Option<f64> {
        self.spec_norm
    }

    pub(crate) fn set_cached_norm(&mut self, v: f64) {
        self.spec_norm = Some(v);
    }

    /// `Δ += t·step`; invalidates the cached norm.
    pub fn accumulate(&mut self, t: f64, step: &DenseMatrix) {
        self.delta.add_scaled(t, step);
        self.spec_norm = None;
    }
}
