//! Default tolerances used across the crate.
//!
//! The run manifest embeds [`table`] so a report can always be traced back to
//! the thresholds that produced it.

use std::collections::BTreeMap;

/// Absolute slack on every defining inequality in membership tests.
pub const MEMBERSHIP_SLACK: f64 = 1e-9;
/// Allowed deviation of `RᵀR` from the identity for box rotations.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;
/// Multiplicative slack in the John sandwich `S ⊆ E ⊆ √n (1 + ε) S`.
pub const JOHN_SLACK: f64 = 1e-3;
/// Iteration cap for the minimum-volume enclosing ellipsoid.
pub const MVEE_MAX_ITER: usize = 100_000;
/// Sigma multiple reported as Monte Carlo error.
pub const MC_SIGMAS: f64 = 3.0;
/// Smallest Monte Carlo budget accepted for volumes and integrals.
pub const MIN_MC_SAMPLES: usize = 1_000;
/// Largest dimension handled by Monte Carlo volume estimation.
pub const MAX_MC_DIM: usize = 6;
/// Largest dimension handled by exact polytope volumes.
pub const MAX_EXACT_POLY_DIM: usize = 3;
/// Sup-norm change between successive quadrature levels that counts as converged.
pub const QUADRATURE_TOL: f64 = 1e-4;
/// Hard cap on quadrature nodes per axis.
pub const MAX_QUADRATURE_NODES: usize = 1 << 12;
/// Smallest evaluation-grid resolution per axis.
pub const MIN_GRID_RESOLUTION: usize = 16;
/// Minimum log-log slope for a diverging verdict.
pub const DIVERGENCE_SLOPE: f64 = 0.02;
/// Minimum coefficient of determination for a diverging verdict.
pub const DIVERGENCE_R2: f64 = 0.9;
/// Minimum number of scales for a verdict other than inconclusive.
pub const MIN_TREND_SCALES: usize = 8;
/// Margin below 1 tolerated by the pointwise lower-bound check.
pub const LOWER_BOUND_MARGIN: f64 = 1e-3;
/// Width of the outer shell of an evaluation grid, as a fraction of the half-width.
pub const SHELL_FRACTION: f64 = 0.05;
/// Largest share of a level-set measure allowed inside the outer shell.
pub const SHELL_SHARE: f64 = 0.01;
/// Relative tolerance used when a run is reproduced from its manifest.
pub const REPRODUCE_RTOL: f64 = 1e-9;

/// Name/value listing of every default above.
pub fn table() -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("membership_slack", MEMBERSHIP_SLACK),
        ("orthogonality_tol", ORTHOGONALITY_TOL),
        ("john_slack", JOHN_SLACK),
        ("mvee_max_iter", MVEE_MAX_ITER as f64),
        ("mc_sigmas", MC_SIGMAS),
        ("min_mc_samples", MIN_MC_SAMPLES as f64),
        ("max_mc_dim", MAX_MC_DIM as f64),
        ("max_exact_poly_dim", MAX_EXACT_POLY_DIM as f64),
        ("quadrature_tol", QUADRATURE_TOL),
        ("max_quadrature_nodes", MAX_QUADRATURE_NODES as f64),
        ("min_grid_resolution", MIN_GRID_RESOLUTION as f64),
        ("divergence_slope", DIVERGENCE_SLOPE),
        ("divergence_r2", DIVERGENCE_R2),
        ("min_trend_scales", MIN_TREND_SCALES as f64),
        ("lower_bound_margin", LOWER_BOUND_MARGIN),
        ("shell_fraction", SHELL_FRACTION),
        ("shell_share", SHELL_SHARE),
        ("reproduce_rtol", REPRODUCE_RTOL),
    ])
}
