//! Degree-based impact estimate for `S` and the budget below which no
//! degree-increasing attack can move that estimate by much.

use crate::error::{Error, Result};
use crate::graph::{Graph, TargetSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactEstimate {
    pub value: f64,
    /// `δ/β ≤ d_min` over the whole graph.
    pub applicable: bool,
}

/// `Î = Σ_{i∈S} (1 − δ/(β·d_i))`.
pub fn impact_estimator(g: &Graph, s: &TargetSet, beta: f64, delta: f64) -> Result<ImpactEstimate> {
    if !(beta > 0.0 && beta <= 1.0) || !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("invalid rates beta={beta}, delta={delta}")));
    }
    let deg = g.degree_vector();
    let ratio = delta / beta;
    let mut value = 0.0;
    for &i in s.members() {
        if deg[i] == 0.0 {
            return Err(Error::UndefinedEstimator(format!("node {i} in S has degree 0")));
        }
        value += 1.0 - ratio / deg[i];
    }
    let d_min = deg.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ImpactEstimate {
        value,
        applicable: ratio <= d_min,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertBound {
    pub epsilon_min: f64,
    pub applicable: bool,
    pub tau: f64,
    /// Computed from weighted degrees.
    pub weighted: bool,
}

/// `√(|S|/n)` times the population standard deviation of degrees in `S`.
pub fn epsilon_min(g: &Graph, s: &TargetSet) -> f64 {
    let deg = g.degree_vector();
    let k = s.len() as f64;
    let mean = s.members().iter().map(|&i| deg[i]).sum::<f64>() / k;
    // Two-pass form avoids the cancellation of E[d²] − E[d]².
    let var = s.members().iter().map(|&i| (deg[i] - mean).powi(2)).sum::<f64>() / k;
    (k / g.node_count() as f64).sqrt() * var.sqrt()
}

/// Certified budget for `S`. `beta` and `delta` only determine whether the
/// degree-based regime `δ/β ≤ d_min` applies; `tau` is carried for reporting.
pub fn certify_budget(g: &Graph, s: &TargetSet, beta: f64, delta: f64, tau: f64) -> Result<CertBound> {
    if s.universe() != g.node_count() {
        return Err(Error::SizeMismatch(s.universe(), g.node_count()));
    }
    let d_min = g.degree_vector().into_iter().fold(f64::INFINITY, f64::min);
    let applicable = beta > 0.0 && delta / beta <= d_min;
    Ok(CertBound {
        epsilon_min: epsilon_min(g, s),
        applicable,
        tau,
        weighted: g.is_weighted(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use proptest::prelude::*;

    #[test]
    fn estimator_examples() {
        // Every d_i = δ/β.
        let g = complete(4);
        let s = TargetSet::new_proper(4, [0, 1]).unwrap();
        let e = impact_estimator(&g, &s, 0.1, 0.3).unwrap();
        assert!(e.value.abs() < 1e-15);

        // d_i = 2δ/β.
        let g = star(5);
        let s = TargetSet::new_proper(5, [0]).unwrap();
        let e = impact_estimator(&g, &s, 0.5, 1.0).unwrap();
        assert!((e.value - 0.5).abs() < 1e-15);
        assert!(!e.applicable);

        let g = complete(4);
        let s = TargetSet::new_proper(4, [0, 1]).unwrap();
        let e = impact_estimator(&g, &s, 0.06, 0.12).unwrap();
        assert!((e.value - 2.0 * (1.0 - 2.0 / 3.0)).abs() < 1e-12);
        assert!(e.applicable);
    }

    #[test]
    fn estimator_undefined_on_isolated_target() {
        let g = unweighted(3, &[(0, 1)]);
        let s = TargetSet::new_proper(3, [2]).unwrap();
        assert!(matches!(
            impact_estimator(&g, &s, 0.1, 0.1),
            Err(Error::UndefinedEstimator(_))
        ));
    }

    #[test]
    fn bound_examples() {
        let g = complete(5);
        let s = TargetSet::new_proper(5, [0, 1, 2]).unwrap();
        assert_eq!(certify_budget(&g, &s, 0.06, 0.24, 0.0).unwrap().epsilon_min, 0.0);

        // Degrees {1, 3} in S on n = 4.
        let g = star(4);
        let s = TargetSet::new_proper(4, [0, 1]).unwrap();
        let b = certify_budget(&g, &s, 0.06, 0.24, 0.0).unwrap();
        assert!((b.epsilon_min - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(!b.weighted);

        let g = path3();
        let s = TargetSet::new(3, [0, 1, 2]).unwrap();
        assert!((epsilon_min(&g, &s) - (2.0f64 / 9.0).sqrt()).abs() < 1e-12);
    }

    fn random_graph(n: usize, seed: u64) -> Graph {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < 0.4 {
                    edges.push((i, j, 1.0));
                }
            }
        }
        Graph::from_edges(n, edges, false).unwrap()
    }

    proptest! {
        #[test]
        fn relabeling_invariance(n in 3usize..12, seed in any::<u64>(), k in 1usize..3) {
            let g = random_graph(n, seed);
            let s = TargetSet::new_proper(n, 0..k).unwrap();
            // Reverse the labels.
            let rev = Graph::from_edges(n, g.edges().map(|(i, j, w)| (n - 1 - i, n - 1 - j, w)), false).unwrap();
            let rs = TargetSet::new_proper(n, (0..k).map(|i| n - 1 - i)).unwrap();
            prop_assert!((epsilon_min(&g, &s) - epsilon_min(&rev, &rs)).abs() < 1e-12);
        }

        #[test]
        fn range_bound(n in 3usize..12, seed in any::<u64>(), k in 1usize..3) {
            let g = random_graph(n, seed);
            let s = TargetSet::new_proper(n, 0..k).unwrap();
            let deg = g.degree_vector();
            let ds: Vec<f64> = s.members().iter().map(|&i| deg[i]).collect();
            let range = ds.iter().copied().fold(f64::MIN, f64::max) - ds.iter().copied().fold(f64::MAX, f64::min);
            let e = epsilon_min(&g, &s);
            prop_assert!(e >= 0.0);
            prop_assert!(e <= (k as f64 / n as f64).sqrt() * range / 2.0 + 1e-12);
        }
    }
}
