//! Gradient ascent on the attacker objective with one-step look-ahead budget
//! control: a step is taken only if the running sum of per-step spectral
//! norms stays within `ε`, which by the triangle inequality keeps
//! `‖Ã − A‖₂ ≤ ε` and hence every eigenvalue within `ε` of the original.

use log::warn;

use crate::error::{Error, Result};
use crate::graph::{Graph, TargetSet};
use crate::matrix::{DenseMatrix, Perturbation};
use crate::objective::{evaluate, ObjectiveWeights};
use crate::spectral::{perron_pair, spectral_norm_of, PowerConfig};

/// Gradients whose largest entry is below this count as zero.
pub const ZERO_GRADIENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    InverseSqrt,
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "inverse-sqrt" | "inverse_sqrt" => Ok(Self::InverseSqrt),
            _ => Err(Error::InvalidParameter(format!("unknown step schedule {s:?}"))),
        }
    }
}

/// Step sizes `η_i`, `i ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    kind: ScheduleKind,
    eta0: f64,
}

impl StepSchedule {
    pub fn new(kind: ScheduleKind, eta0: f64) -> Result<Self> {
        if !(eta0.is_finite() && eta0 > 0.0) {
            return Err(Error::InvalidParameter(format!("step size must be positive, got {eta0}")));
        }
        Ok(Self { kind, eta0 })
    }

    pub fn eta(&self, i: usize) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.eta0,
            ScheduleKind::InverseSqrt => self.eta0 / (i.max(1) as f64).sqrt(),
        }
    }
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self {
            kind: ScheduleKind::Constant,
            eta0: 0.1,
        }
    }
}

/// Budget either in spectral-norm units or relative to `λ₁(A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Absolute(f64),
    RelativeToLambda1(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    pub budget: Budget,
    pub max_steps: usize,
    pub schedule: StepSchedule,
    pub weights: ObjectiveWeights,
    pub power: PowerConfig,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            budget: Budget::RelativeToLambda1(0.5),
            max_steps: 500,
            schedule: StepSchedule::default(),
            weights: ObjectiveWeights::equal(),
            power: PowerConfig::default(),
        }
    }
}

impl AttackConfig {
    /// Resolves the budget to `ε` for a given original adjacency.
    pub fn epsilon_for(&self, a: &DenseMatrix) -> Result<f64> {
        let eps = match self.budget {
            Budget::Absolute(e) => e,
            Budget::RelativeToLambda1(gamma) => {
                if a.max_abs() == 0.0 {
                    0.0
                } else {
                    gamma * perron_pair(a, &self.power)?.value
                }
            }
        };
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidParameter(format!("budget must be nonnegative, got {eps}")));
        }
        Ok(eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    LocalOptimum,
    BudgetExhausted,
    MaxSteps,
    /// Baselines only: neither side has a candidate move left.
    NoCandidates,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::LocalOptimum => "local-optimum",
            Self::BudgetExhausted => "budget-exhausted",
            Self::MaxSteps => "max-steps",
            Self::NoCandidates => "no-candidates",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AttackResult {
    /// `Ã = A + Δ`; fractional and possibly negative entries are allowed.
    pub adjacency: DenseMatrix,
    pub delta: Perturbation,
    pub epsilon: f64,
    /// `B`, the sum of accepted per-step spectral norms.
    pub budget_used: f64,
    pub iterations: usize,
    /// Objective total at every evaluated iterate.
    pub objective_trace: Vec<f64>,
    /// `‖η_iΔ_i‖₂` of every accepted step.
    pub step_norms: Vec<f64>,
    pub termination: Termination,
}

/// Runs the ascent on an unweighted or weight-normalized graph.
pub fn attack(g: &Graph, s: &TargetSet, cfg: &AttackConfig) -> Result<AttackResult> {
    if !g.is_connected() {
        warn!("attacking a disconnected graph; the principal eigenvector is ill-defined");
    }
    attack_dense(&g.to_dense(), s, cfg)
}

pub fn attack_dense(a: &DenseMatrix, s: &TargetSet, cfg: &AttackConfig) -> Result<AttackResult> {
    if cfg.max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
    }
    if s.universe() != a.n() {
        return Err(Error::SizeMismatch(s.universe(), a.n()));
    }
    let epsilon = cfg.epsilon_for(a)?;
    let mut delta = Perturbation::zeros(a.n());
    let mut adjacency = a.clone();
    let mut budget_used = 0.0;
    let mut trace = Vec::new();
    let mut step_norms = Vec::new();

    let termination = loop {
        let i = step_norms.len() + 1;
        if i > cfg.max_steps {
            break Termination::MaxSteps;
        }
        let report = evaluate(&adjacency, s, &cfg.weights, &cfg.power)?;
        trace.push(report.total);
        let mut grad = report.gradient;
        grad.zero_diagonal();
        if grad.max_abs() < ZERO_GRADIENT {
            break Termination::LocalOptimum;
        }
        let eta = cfg.schedule.eta(i);
        let step_norm = eta * spectral_norm_of(&grad, &cfg.power)?;
        if budget_used + step_norm > epsilon {
            break Termination::BudgetExhausted;
        }
        delta.accumulate(eta, &grad);
        budget_used += step_norm;
        step_norms.push(step_norm);
        adjacency = a.clone();
        adjacency.add_scaled(1.0, delta.matrix());
        debug_assert!(delta.matrix().is_symmetric() && delta.matrix().has_zero_diagonal());
    };

    Ok(AttackResult {
        adjacency,
        delta,
        epsilon,
        budget_used,
        iterations: step_norms.len(),
        objective_trace: trace,
        step_norms,
        termination,
    })
}
