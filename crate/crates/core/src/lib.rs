//! Spectrally budgeted structural attacks on graphs that steer diffusion
//! towards a target node set, together with the tooling to evaluate them:
//! SIS and random-walk simulators, degree and eigenscore baselines,
//! degree-based robustness certificates and structural perturbation bounds.

pub mod baselines;
pub mod certify;
pub mod config;
pub mod diffusion;
pub mod discretize;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod matrix;
pub mod objective;
pub mod optimizer;
pub mod spectral;
pub mod structural;

pub use error::{Error, Result};
pub use graph::{Graph, TargetSet};
pub use matrix::{DenseMatrix, Perturbation, SymOperator};
pub use objective::ObjectiveWeights;
pub use optimizer::{attack, AttackConfig, AttackResult, Budget};
pub use spectral::{EigenEstimate, PowerConfig};
