//! Derivative-free searches over bodies and the log-log trend fit.

mod functional;
mod optimize;
mod param;
mod trend;

pub use functional::{
    conjecture_functional, conjecture_sup_search, dilation_ray, integrability_diagnostic, mahler_search,
    Integrability, IntegrabilityDiagnostic, RayPoint, RayReport,
};
pub use optimize::{Optimizer, TrajectoryPoint};
pub use param::{rotation, Parameterization};
pub use trend::{trend_fit, TrendFit};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Body, GeometryError};
use crate::weights::WeightError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Weight(#[from] WeightError),
}

impl SearchError {
    /// Stable variant name, used in run manifests.
    pub fn name(&self) -> &'static str {
        match self {
            SearchError::DegenerateInput(_) => "DegenerateInput",
            SearchError::InvalidConfig(_) => "InvalidConfig",
            SearchError::Geometry(e) => e.name(),
            SearchError::Weight(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Min,
    Max,
}

fn default_fraction() -> f64 {
    1.0
}

fn default_samples() -> usize {
    20_000
}

/// Family, translation ranges, optimizer and seed of a body search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub parameterization: Parameterization,
    /// `μ` ranges over `−mu_fraction · E`; 0 pins `μ = 0`.
    #[serde(default = "default_fraction")]
    pub mu_fraction: f64,
    /// Each `τᵢ` ranges over `(−tau_bound, tau_bound)`.
    #[serde(default = "default_fraction")]
    pub tau_bound: f64,
    pub optimizer: Optimizer,
    /// Monte Carlo budget per measurement, used when no exact form applies.
    #[serde(default = "default_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            parameterization: Parameterization::Box { dim: 1 },
            mu_fraction: 1.0,
            tau_bound: 1.0,
            optimizer: Optimizer::Annealing { steps: 2000, cooling: 0.995, step_size: 0.25, t0: None },
            mc_samples: default_samples(),
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        self.parameterization.validate()?;
        self.optimizer.validate()?;
        if !(0.0..=1.0).contains(&self.mu_fraction) {
            return Err(SearchError::InvalidConfig("mu_fraction must lie in [0, 1]".into()));
        }
        if !(self.tau_bound.is_finite() && self.tau_bound >= 0.0) {
            return Err(SearchError::InvalidConfig("tau_bound must be finite and nonnegative".into()));
        }
        if self.mc_samples < crate::tolerances::MIN_MC_SAMPLES {
            return Err(SearchError::InvalidConfig(format!("mc_samples below {}", crate::tolerances::MIN_MC_SAMPLES)));
        }
        Ok(())
    }
}

/// A body with its shifts: the sets are `body + mu` and `(body + mu)° + tau`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub body: Body,
    pub mu: Vec<f64>,
    pub tau: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    /// `"conjecture"` or `"mahler"`.
    pub objective: String,
    pub direction: Direction,
    pub best_value: f64,
    pub best_error: f64,
    pub best_config: Candidate,
    /// Running best of each chain at the steps where it improved.
    pub trajectory: Vec<TrajectoryPoint>,
    pub evaluations: usize,
    pub accepted: usize,
    /// Proposals outside the family (degenerate bodies).
    pub rejected: usize,
    pub initial_temperature: Option<f64>,
    /// A maximizing search witnesses a value the supremum is at least.
    pub lower_bound_evidence: bool,
    /// A minimizing search witnesses a value the infimum is at most.
    pub upper_bound_evidence: bool,
    pub integrability: Option<Integrability>,
}

impl SearchReport {
    /// `start,step,value` rows.
    pub fn trajectory_csv(&self) -> String {
        let mut s = String::from("start,step,value\n");
        for p in &self.trajectory {
            s.push_str(&format!("{},{},{:e}\n", p.start, p.step, p.value));
        }
        s
    }
}
