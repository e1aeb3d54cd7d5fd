//! SIS epidemics and random-walk dynamics, with outcomes split between the
//! target set `S` and its complement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, TargetSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisParams {
    pub beta: f64,
    pub delta: f64,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
}

impl SisParams {
    pub fn new(beta: f64, delta: f64) -> Result<Self> {
        let p = Self {
            beta,
            delta,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    /// `β` and `δ` must lie in `[0, 1]`; at least one trial is required.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("beta", self.beta), ("delta", self.delta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0,1], got {v}")));
            }
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive".into()));
        }
        Ok(())
    }
}

impl Default for SisParams {
    fn default() -> Self {
        Self {
            beta: 0.06,
            delta: 0.24,
            steps: 30,
            trials: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialInfection {
    /// One node drawn uniformly from all of `V` per trial.
    UniformRandom,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub frac_s: f64,
    pub frac_s_prime: f64,
    pub frac_all: f64,
    /// Infected counts `(in S, in S′)` at the horizon, one pair per trial.
    pub per_trial: Vec<(usize, usize)>,
    pub stderr_s: f64,
    pub stderr_s_prime: f64,
}

/// RNG for one trial: the seed selects the key, the trial index the stream,
/// so results do not depend on how trials are scheduled.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs one SIS trial and returns the infection state at the horizon.
fn run_trial(g: &Graph, p: &SisParams, initial: InitialInfection, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let n = g.node_count();
    let mut infected = vec![false; n];
    let start = match initial {
        InitialInfection::UniformRandom => rng.random_range(0..n),
        InitialInfection::Fixed(i) => i,
    };
    infected[start] = true;
    let mut next = infected.clone();
    for _ in 0..p.steps {
        for i in 0..n {
            if infected[i] {
                next[i] = rng.random::<f64>() >= p.delta;
            } else {
                let mut stay = 1.0;
                for &(j, w) in g.neighbors(i) {
                    if infected[j] {
                        stay *= 1.0 - (p.beta * w).min(1.0);
                    }
                }
                next[i] = stay < 1.0 && rng.random::<f64>() < 1.0 - stay;
            }
        }
        std::mem::swap(&mut infected, &mut next);
    }
    infected
}

fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone, count: usize) -> (f64, f64) {
    let t = count as f64;
    let mean = values.clone().sum::<f64>() / t;
    if count < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (t - 1.0);
    (mean, (var / t).sqrt())
}

/// Monte Carlo SIS with synchronous updates evaluated against the
/// start-of-step state. A susceptible node is infected with probability
/// `1 − Π_{j infected}(1 − min(1, β·w_ij))`; an infected node recovers with
/// probability `δ`. Trials run in parallel.
pub fn simulate_sis(
    g: &Graph,
    s: &TargetSet,
    p: &SisParams,
    initial: InitialInfection,
) -> Result<SimulationResult> {
    p.validate()?;
    let n = g.node_count();
    if s.universe() != n {
        return Err(Error::SizeMismatch(s.universe(), n));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("cannot simulate on an empty graph".into()));
    }
    if let InitialInfection::Fixed(i) = initial {
        if i >= n {
            return Err(Error::InvalidParameter(format!("initial node {i} out of range")));
        }
    }

    let per_trial: Vec<(usize, usize)> = (0..p.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(p.seed, t as u64);
            let state = run_trial(g, p, initial, &mut rng);
            let in_s = s.members().iter().filter(|&&i| state[i]).count();
            let in_c = s.complement().iter().filter(|&&i| state[i]).count();
            (in_s, in_c)
        })
        .collect();

    let ns = s.members().len();
    let nc = s.complement().len();
    let frac = |c: usize, size: usize| if size == 0 { 0.0 } else { c as f64 / size as f64 };
    let (frac_s, stderr_s) = mean_and_stderr(per_trial.iter().map(|&(a, _)| frac(a, ns)), p.trials);
    let (frac_s_prime, stderr_s_prime) =
        mean_and_stderr(per_trial.iter().map(|&(_, b)| frac(b, nc)), p.trials);
    let frac_all = (ns as f64 * frac_s + nc as f64 * frac_s_prime) / n as f64;
    Ok(SimulationResult {
        frac_s,
        frac_s_prime,
        frac_all,
        per_trial,
        stderr_s,
        stderr_s_prime,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkResult {
    pub rank: Vec<f64>,
    pub mass_s: f64,
    pub mass_s_prime: f64,
    pub iterations: usize,
}

pub const WALK_TOL: f64 = 1e-13;
const WALK_MAX_ITER: usize = 1_000_000;

/// `y = Pᵀx` for the row-stochastic walk matrix; mass on isolated nodes is
/// returned in the second slot.
fn walk_step(g: &Graph, deg: &[f64], x: &[f64], y: &mut [f64]) -> f64 {
    y.iter_mut().for_each(|v| *v = 0.0);
    let mut dangling = 0.0;
    for i in 0..g.node_count() {
        if x[i] == 0.0 {
            continue;
        }
        if deg[i] == 0.0 {
            dangling += x[i];
            continue;
        }
        let r = x[i] / deg[i];
        for &(j, w) in g.neighbors(i) {
            y[j] += w * r;
        }
    }
    dangling
}

/// Iterates `r ← (1−c)·Pᵀr + c·q` until the ℓ₁ change drops below `tol`.
/// Dangling mass is sent to `q`. With `c = 0` the lazy chain `(I + Pᵀ)/2`
/// is iterated instead; it has the same fixed points and converges on
/// bipartite graphs.
fn stationary(g: &Graph, s: &TargetSet, c: f64, q: &[f64], r0: Vec<f64>, tol: f64) -> Result<WalkResult> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("restart probability must lie in [0,1], got {c}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let n = g.node_count();
    if s.universe() != n {
        return Err(Error::SizeMismatch(s.universe(), n));
    }
    let deg = g.degree_vector();
    let lazy = c == 0.0;
    let mut r = r0;
    let mut y = vec![0.0; n];
    for it in 1..=WALK_MAX_ITER {
        let dangling = walk_step(g, &deg, &r, &mut y);
        let mut change = 0.0;
        for i in 0..n {
            let walked = y[i] + dangling * q[i];
            let v = if lazy {
                0.5 * (r[i] + walked)
            } else {
                (1.0 - c) * walked + c * q[i]
            };
            change += (v - r[i]).abs();
            y[i] = v;
        }
        std::mem::swap(&mut r, &mut y);
        if change < tol {
            let mass_s = s.members().iter().map(|&i| r[i]).sum();
            let mass_s_prime = s.complement().iter().map(|&i| r[i]).sum();
            return Ok(WalkResult {
                rank: r,
                mass_s,
                mass_s_prime,
                iterations: it,
            });
        }
    }
    Err(Error::NotConverged(format!("walk did not reach tolerance {tol}")))
}

/// Random walk with restart to `start` with probability `c`.
pub fn random_walk_restart(g: &Graph, s: &TargetSet, c: f64, start: usize, tol: f64) -> Result<WalkResult> {
    let n = g.node_count();
    if start >= n {
        return Err(Error::InvalidParameter(format!("start node {start} out of range")));
    }
    if g.neighbors(start).is_empty() {
        return Err(Error::InvalidParameter(format!("start node {start} is isolated")));
    }
    let mut q = vec![0.0; n];
    q[start] = 1.0;
    stationary(g, s, c, &q, q.clone(), tol)
}

/// PageRank with uniform teleport probability `c`.
pub fn page_rank(g: &Graph, s: &TargetSet, c: f64, tol: f64) -> Result<WalkResult> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidParameter("cannot rank an empty graph".into()));
    }
    let q = vec![1.0 / n as f64; n];
    stationary(g, s, c, &q, q.clone(), tol)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    fn params(beta: f64, delta: f64, steps: usize, trials: usize) -> SisParams {
        SisParams {
            beta,
            delta,
            steps,
            trials,
            seed: 7,
        }
    }

    #[test]
    fn no_transmission_full_recovery() {
        let g = complete(4);
        let s = TargetSet::new(4, [0, 1]).unwrap();
        let r = simulate_sis(&g, &s, &params(0.0, 1.0, 3, 100), InitialInfection::UniformRandom).unwrap();
        assert_eq!(r.frac_all, 0.0);
    }

    #[test]
    fn no_transmission_decay_matches_expectation() {
        let g = complete(4);
        let s = TargetSet::new(4, [0, 1]).unwrap();
        let p = params(0.0, 0.3, 2, 20_000);
        let r = simulate_sis(&g, &s, &p, InitialInfection::UniformRandom).unwrap();
        let expected = 0.7f64.powi(2) / 4.0;
        // Bernoulli(0.49) per trial scaled by 1/4.
        let se = (0.49f64 * 0.51 / 20_000.0).sqrt() / 4.0;
        assert!((r.frac_all - expected).abs() < 4.0 * se);
    }

    #[test]
    fn deterministic_spread_on_single_edge() {
        let g = unweighted(2, &[(0, 1)]);
        let s = TargetSet::new_proper(2, [0]).unwrap();
        let r = simulate_sis(&g, &s, &params(1.0, 0.0, 1, 10), InitialInfection::Fixed(0)).unwrap();
        assert_eq!(r.frac_all, 1.0);
        assert_eq!(r.stderr_s, 0.0);
    }

    #[test]
    fn k5_at_threshold_matches_exact_chain() {
        let g = complete(5);
        let s = TargetSet::new_proper(5, [0, 1]).unwrap();
        let p = params(0.06, 0.24, 30, 2000);
        let r = simulate_sis(&g, &s, &p, InitialInfection::UniformRandom).unwrap();
        assert!(r.frac_all > 0.0);
        let (es, ec) = oracle::exact_sis(&g, &s, 0.06, 0.24, 30);
        assert!((r.frac_s - es / 2.0).abs() <= 3.0 * r.stderr_s.max(1e-12));
        assert!((r.frac_s_prime - ec / 3.0).abs() <= 3.0 * r.stderr_s_prime.max(1e-12));
    }

    #[test]
    fn fractions_are_consistent() {
        let g = star(6);
        let s = TargetSet::new_proper(6, [0, 2]).unwrap();
        let r = simulate_sis(&g, &s, &params(0.3, 0.2, 10, 300), InitialInfection::UniformRandom).unwrap();
        let all = (2.0 * r.frac_s + 4.0 * r.frac_s_prime) / 6.0;
        assert!((r.frac_all - all).abs() < 1e-15);
        for f in [r.frac_s, r.frac_s_prime, r.frac_all] {
            assert!((0.0..=1.0).contains(&f));
        }
    }

    #[test]
    fn same_seed_reproduces_trials() {
        let g = complete(6);
        let s = TargetSet::new_proper(6, [0, 1, 2]).unwrap();
        let p = params(0.2, 0.3, 15, 200);
        let a = simulate_sis(&g, &s, &p, InitialInfection::UniformRandom).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_sis(&g, &s, &p, InitialInfection::UniformRandom).unwrap());
        assert_eq!(a.per_trial, b.per_trial);
    }

    #[test]
    fn weighted_transmission_is_capped() {
        let g = Graph::from_edges(2, [(0, 1, 50.0)], true).unwrap();
        let s = TargetSet::new_proper(2, [1]).unwrap();
        let r = simulate_sis(&g, &s, &params(0.1, 0.0, 1, 50), InitialInfection::Fixed(0)).unwrap();
        assert_eq!(r.frac_s, 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SisParams::new(1.5, 0.2).is_err());
        assert!(SisParams::new(0.2, -0.1).is_err());
    }

    #[test]
    fn rwr_closed_forms() {
        let g = path3();
        let s = TargetSet::new_proper(3, [0]).unwrap();
        let r = random_walk_restart(&g, &s, 1.0, 1, 1e-13).unwrap();
        assert_eq!(r.rank, vec![0.0, 1.0, 0.0]);

        let r = random_walk_restart(&g, &s, 0.0, 0, 1e-14).unwrap();
        for (a, b) in r.rank.iter().zip([0.25, 0.5, 0.25]) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((r.mass_s + r.mass_s_prime - 1.0).abs() < 1e-10);

        let g2 = unweighted(2, &[(0, 1)]);
        let s2 = TargetSet::new_proper(2, [0]).unwrap();
        let r = random_walk_restart(&g2, &s2, 0.0, 1, 1e-14).unwrap();
        assert!((r.rank[0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn rwr_rejects_isolated_start() {
        let g = unweighted(3, &[(0, 1)]);
        let s = TargetSet::new_proper(3, [0]).unwrap();
        assert!(random_walk_restart(&g, &s, 0.05, 2, 1e-12).is_err());
    }

    #[test]
    fn pagerank_closed_forms() {
        let g = complete(5);
        let s = TargetSet::new_proper(5, [0, 1]).unwrap();
        for c in [0.0, 0.1, 1.0] {
            let r = page_rank(&g, &s, c, 1e-14).unwrap();
            for v in &r.rank {
                assert!((v - 0.2).abs() < 1e-10);
            }
        }
        let g = path3();
        let s = TargetSet::new_proper(3, [0]).unwrap();
        let pr = page_rank(&g, &s, 0.0, 1e-14).unwrap();
        let rw = random_walk_restart(&g, &s, 0.0, 2, 1e-14).unwrap();
        for (a, b) in pr.rank.iter().zip(&rw.rank) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn pagerank_star_matches_linear_solve() {
        let g = star(4);
        let s = TargetSet::new_proper(4, [0]).unwrap();
        let c = 0.1;
        let r = page_rank(&g, &s, c, 1e-14).unwrap();
        // (I − (1−c)Pᵀ) r = c/n·1 solved densely.
        let a = g.to_dense();
        let deg = g.degree_vector();
        let m = nalgebra::DMatrix::from_fn(4, 4, |i, j| {
            let pt = a.get(j, i) / deg[j];
            (if i == j { 1.0 } else { 0.0 }) - (1.0 - c) * pt
        });
        let b = nalgebra::DVector::from_element(4, c / 4.0);
        let x = m.lu().solve(&b).unwrap();
        for i in 0..4 {
            assert!((r.rank[i] - x[i]).abs() < 1e-10);
        }
        assert!(r.rank[0] > r.rank[1]);
        assert!((r.rank.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}
