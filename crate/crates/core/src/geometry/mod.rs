//! Convex bodies, polars, volumes, Mahler volumes and ellipsoid sandwiches.
//!
//! A [`Body`] is one of four variants (rotated box, ellipsoid, symmetric
//! V-polytope, H-polytope). [`TranslatedBody`] carries the `(E + μ)° + τ`
//! bookkeeping used by the condition checks; [`Region`] accepts either.

mod body;
mod ellipsoids;
mod hull;
mod json;
mod polar;
mod volume;

pub(crate) use body::sample_sphere;
pub use body::{random_rotation, Body, BoxBody, EllipsoidBody, HPolytope, SymPolytope};
pub use ellipsoids::{loewner_john, mvee_symmetric, rect_ellipsoid_sandwich, JohnSandwich};
pub use polar::{polar, polar_of_shifted, polar_translated};
pub use volume::{exact_volume, mahler_volume, unit_ball_volume, volume, Estimate, EstimateMethod, VolumeMethod};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerances::MEMBERSHIP_SLACK;

/// Column vector in `R^n`.
pub type Vector = DVector<f64>;
/// Dense `n × n` matrix.
pub type Matrix = DMatrix<f64>;

/// Volume of a body, with its error and how it was obtained.
pub type VolumeEstimate = Estimate;

/// Errors raised by geometric constructions and measurements.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("body does not contain the origin")]
    BodyNotContainingOrigin,
    #[error("body is unbounded")]
    UnboundedBody,
    #[error("polar of a non-symmetric H-polytope requires re-centering")]
    NonSymmetricHPolytope,
    #[error("ellipsoid is not centered at the origin after translation")]
    OffCenterEllipsoid,
    #[error("body is not centrally symmetric about the origin")]
    NotSymmetric,
    #[error("Monte Carlo budget of {0} samples is below the minimum")]
    SampleBudgetTooSmall(usize),
    #[error("dimension {0} exceeds the supported range for this method")]
    DimensionTooLarge(usize),
    #[error("generators do not span the ambient space")]
    DegenerateGenerators,
    #[error("iteration cap reached after {0} steps")]
    NoConvergence(usize),
    #[error("no exact volume formula for this body")]
    NoExactVolume,
}

impl GeometryError {
    /// Stable variant name, used in run manifests.
    pub fn name(&self) -> &'static str {
        match self {
            GeometryError::DimensionMismatch { .. } => "DimensionMismatch",
            GeometryError::InvalidBody(_) => "InvalidBody",
            GeometryError::BodyNotContainingOrigin => "BodyNotContainingOrigin",
            GeometryError::UnboundedBody => "UnboundedBody",
            GeometryError::NonSymmetricHPolytope => "NonSymmetricHPolytope",
            GeometryError::OffCenterEllipsoid => "OffCenterEllipsoid",
            GeometryError::NotSymmetric => "NotSymmetric",
            GeometryError::SampleBudgetTooSmall(_) => "SampleBudgetTooSmall",
            GeometryError::DimensionTooLarge(_) => "DimensionTooLarge",
            GeometryError::DegenerateGenerators => "DegenerateGenerators",
            GeometryError::NoConvergence(_) => "NoConvergence",
            GeometryError::NoExactVolume => "NoExactVolume",
        }
    }
}

/// A body moved by `mu + tau`. The set is `{x : x − mu − tau ∈ base}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranslatedBody {
    pub base: Body,
    #[serde(with = "json::vector")]
    pub mu: Vector,
    #[serde(with = "json::vector")]
    pub tau: Vector,
}

impl TranslatedBody {
    /// Builds `base + mu + tau` after checking dimensions and finiteness.
    pub fn new(base: Body, mu: Vector, tau: Vector) -> Result<Self, GeometryError> {
        let n = base.dim();
        for v in [&mu, &tau] {
            if v.len() != n {
                return Err(GeometryError::DimensionMismatch { expected: n, got: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::InvalidBody("non-finite translation".into()));
            }
        }
        Ok(Self { base, mu, tau })
    }

    /// Total offset `mu + tau`.
    pub fn offset(&self) -> Vector {
        &self.mu + &self.tau
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.base.contains(&(x - self.offset()))
    }
}

/// Shifts `body` by `t`.
pub fn translate(body: &Body, t: &Vector) -> Result<TranslatedBody, GeometryError> {
    TranslatedBody::new(body.clone(), Vector::zeros(body.dim()), t.clone())
}

/// Either a plain body or a translated one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Region {
    Translated(TranslatedBody),
    Body(Body),
}

impl From<Body> for Region {
    fn from(b: Body) -> Self {
        Region::Body(b)
    }
}

impl From<TranslatedBody> for Region {
    fn from(t: TranslatedBody) -> Self {
        Region::Translated(t)
    }
}

impl Region {
    pub fn dim(&self) -> usize {
        self.base().dim()
    }

    /// Underlying untranslated body.
    pub fn base(&self) -> &Body {
        match self {
            Region::Body(b) => b,
            Region::Translated(t) => &t.base,
        }
    }

    /// Offset applied to [`Region::base`].
    pub fn offset(&self) -> Vector {
        match self {
            Region::Body(b) => Vector::zeros(b.dim()),
            Region::Translated(t) => t.offset(),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        match self {
            Region::Body(b) => b.contains(x),
            Region::Translated(t) => t.contains(x),
        }
    }

    /// Tight axis-aligned bounding box `(lower, upper)`.
    pub fn bbox(&self) -> (Vector, Vector) {
        let (lo, hi) = self.base().bbox();
        let off = self.offset();
        (lo + &off, hi + off)
    }

    /// Interval of `x_axis` values such that `point` with that coordinate
    /// replaced lies in the region.
    pub fn chord(&self, point: &Vector, axis: usize) -> Option<(f64, f64)> {
        let off = self.offset();
        self.base()
            .chord(&(point - &off), axis)
            .map(|(a, b)| (a + off[axis], b + off[axis]))
    }
}

/// Membership test with the default slack, for bodies and translated bodies.
pub fn contains(region: &Region, x: &Vector) -> bool {
    region.contains(x)
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<(), GeometryError> {
    if expected != got {
        Err(GeometryError::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

pub(crate) fn le_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + MEMBERSHIP_SLACK
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_moves_membership() {
        let b = Body::cube(1, 1.0);
        let t = translate(&b, &Vector::from_vec(vec![3.0])).unwrap();
        assert!(t.contains(&Vector::from_vec(vec![3.0])));
        assert!(t.contains(&Vector::from_vec(vec![2.0])));
        assert!(!t.contains(&Vector::from_vec(vec![0.0])));
        let back = translate(&b, &Vector::from_vec(vec![0.0])).unwrap();
        assert!(back.contains(&Vector::from_vec(vec![-1.0])));
    }

    #[test]
    fn error_names_are_stable() {
        assert_eq!(GeometryError::UnboundedBody.name(), "UnboundedBody");
        assert_eq!(GeometryError::SampleBudgetTooSmall(3).name(), "SampleBudgetTooSmall");
    }
}
