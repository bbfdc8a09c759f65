//! Numerical exploration of the geometric weight conditions behind the
//! weighted Fourier inequality
//!
//! ```text
//! (∫ |f̂|^q u)^{1/q} ≤ C (∫ |f|^p v)^{1/p}
//! ```
//!
//! The crate is organised in layers:
//!
//! - [`geometry`]: convex bodies, polars, volumes, Mahler volumes and the
//!   John/Löwner ellipsoid sandwiches.
//! - [`weights`]: weight descriptors, conjugate exponents, the dual weight
//!   `w = v^{-p'/p}`, integration over bodies and doubling checks.
//! - [`conditions`]: sampled checks of the necessary classes, comparability of
//!   measures, reverse Hölder exponents and the inherited parameter regions.
//! - [`fourier`]: transforms of simple functions on grids and the level-set,
//!   strong-type and Hausdorff–Young checks built on them.
//! - [`search`]: derivative-free searches over bodies and the log-log trend fit
//!   shared with the condition checks.
//!
//! All randomized operations take an explicit `u64` seed; Monte Carlo work is
//! split into fixed-size blocks with one ChaCha stream per block, so results do
//! not depend on the number of worker threads.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod fourier;
pub mod geometry;
mod mc;
pub mod search;
pub mod tolerances;
pub mod weights;

pub use mc::derive_seed;

use thiserror::Error;

/// Umbrella error for callers that drive several modules at once.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Weight(#[from] weights::WeightError),
    #[error(transparent)]
    Condition(#[from] conditions::ConditionError),
    #[error(transparent)]
    Fourier(#[from] fourier::FourierError),
    #[error(transparent)]
    Search(#[from] search::SearchError),
}

impl Error {
    /// Stable variant name, used in run manifests.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Geometry(e) => e.name(),
            Error::Weight(e) => e.name(),
            Error::Condition(e) => e.name(),
            Error::Fourier(e) => e.name(),
            Error::Search(e) => e.name(),
        }
    }
}
