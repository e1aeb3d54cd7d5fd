//! Greedy comparison attacks: `deg` scores a pair by `d_i + d_j`, `gel` by
//! the eigenscore `v_i·v_j`. Moves alternate between strengthening `G_S` and
//! weakening `G_S′` until the spectral budget is spent.

use std::str::FromStr;

use crate::discretize::SparseSym;
use crate::error::{Error, Result};
use crate::graph::{Graph, TargetSet};
use crate::matrix::Perturbation;
use crate::optimizer::{AttackResult, Termination};
use crate::spectral::{perron_pair, spectral_norm_of, PowerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Deg,
    Gel,
}

impl BaselineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Deg => "deg",
            Self::Gel => "gel",
        }
    }
}

impl FromStr for BaselineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deg" => Ok(Self::Deg),
            "gel" => Ok(Self::Gel),
            _ => Err(Error::InvalidParameter(format!("unknown baseline {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Target,
    Rest,
}

fn scores(current: &SparseSym, kind: BaselineKind, cfg: &PowerConfig) -> Result<Vec<f64>> {
    let n = current.rows_len();
    match kind {
        BaselineKind::Deg => Ok((0..n).map(|i| current.row_sum(i)).collect()),
        BaselineKind::Gel => {
            if current.nnz() == 0 {
                return Ok(vec![0.0; n]);
            }
            Ok(perron_pair(current, cfg)?.vector)
        }
    }
}

fn pair_score(kind: BaselineKind, x: &[f64], i: usize, j: usize) -> f64 {
    match kind {
        BaselineKind::Deg => x[i] + x[j],
        BaselineKind::Gel => x[i] * x[j],
    }
}

/// Highest-scoring pair among `nodes × nodes` (i < j) passing `eligible`,
/// ties broken by the smallest `(i, j)`.
fn best_pair(
    nodes: &[usize],
    x: &[f64],
    kind: BaselineKind,
    eligible: impl Fn(usize, usize) -> bool,
) -> Option<(usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for (a, &i) in nodes.iter().enumerate() {
        for &j in &nodes[a + 1..] {
            if !eligible(i, j) {
                continue;
            }
            let sc = pair_score(kind, x, i, j);
            // Members are sorted, so the first maximum is the lexicographic one.
            if best.is_none_or(|(b, _, _)| sc > b) {
                best = Some((sc, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Runs a baseline attack. `weighted_step` is the weight change per move on
/// weighted graphs and defaults to the mean positive edge weight.
pub fn baseline_attack(
    g: &Graph,
    s: &TargetSet,
    kind: BaselineKind,
    epsilon: f64,
    weighted_step: Option<f64>,
    cfg: &PowerConfig,
) -> Result<AttackResult> {
    let n = g.node_count();
    if s.universe() != n {
        return Err(Error::SizeMismatch(s.universe(), n));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("budget must be nonnegative, got {epsilon}")));
    }
    let weighted = g.is_weighted();
    let step = if weighted {
        let st = weighted_step.unwrap_or_else(|| g.mean_positive_weight());
        if !(st.is_finite() && st > 0.0) {
            return Err(Error::InvalidParameter(format!("weighted step must be positive, got {st}")));
        }
        st
    } else {
        1.0
    };

    let mut current = SparseSym::zeros(n);
    for (i, j, w) in g.edges() {
        current.set_sym(i, j, w);
    }
    let mut delta = SparseSym::zeros(n);
    let mut norms = Vec::new();
    let mut side = Side::Target;
    let mut budget_used = 0.0;

    let termination = loop {
        let x = scores(&current, kind, cfg)?;
        let target_move = best_pair(s.members(), &x, kind, |i, j| {
            let present = current.get(i, j) != 0.0;
            if weighted {
                present
            } else {
                !present
            }
        });
        let rest_move = best_pair(s.complement(), &x, kind, |i, j| current.get(i, j) != 0.0);
        let order = match side {
            Side::Target => [Side::Target, Side::Rest],
            Side::Rest => [Side::Rest, Side::Target],
        };
        let pick = order.into_iter().find_map(|sd| match sd {
            Side::Target => target_move.map(|m| (m, sd)),
            Side::Rest => rest_move.map(|m| (m, sd)),
        });
        let Some((chosen, this_side)) = pick else {
            break Termination::NoCandidates;
        };
        let (i, j) = chosen;
        let old = current.get(i, j);
        let new = match this_side {
            Side::Target => old + step,
            Side::Rest => (old - step).max(0.0),
        };
        let old_delta = delta.get(i, j);
        current.set_sym(i, j, new);
        delta.set_sym(i, j, old_delta + (new - old));
        let norm = spectral_norm_of(&delta, cfg)?;
        if norm > epsilon {
            current.set_sym(i, j, old);
            delta.set_sym(i, j, old_delta);
            break Termination::BudgetExhausted;
        }
        budget_used = norm;
        norms.push(norm);
        side = match this_side {
            Side::Target => Side::Rest,
            Side::Rest => Side::Target,
        };
    };

    let a = g.to_dense();
    let delta = delta.to_dense();
    let mut adjacency = a.clone();
    adjacency.add_scaled(1.0, &delta);
    let mut delta = Perturbation::new(delta);
    delta.set_cached_norm(budget_used);
    Ok(AttackResult {
        adjacency,
        delta,
        epsilon,
        budget_used,
        iterations: norms.len(),
        objective_trace: Vec::new(),
        step_norms: norms,
        termination,
    })
}
