use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{hull, polar, Body, GeometryError, Matrix};
use crate::mc::mean_estimate;
use crate::tolerances::{MAX_EXACT_POLY_DIM, MAX_MC_DIM, MIN_MC_SAMPLES};

/// How a measurement was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum EstimateMethod {
    Exact,
    Quadrature,
    MonteCarlo { samples: usize, seed: u64 },
}

/// A nonnegative measurement with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub method: EstimateMethod,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, abs_error: 0.0, method: EstimateMethod::Exact }
    }

    /// Product of two independent estimates with first-order error propagation.
    pub fn times(&self, other: &Estimate) -> Estimate {
        let method = match (self.method, other.method) {
            (EstimateMethod::Exact, m) | (m, EstimateMethod::Exact) => m,
            (m @ EstimateMethod::MonteCarlo { .. }, _) | (_, m @ EstimateMethod::MonteCarlo { .. }) => m,
            (m, _) => m,
        };
        Estimate {
            value: self.value * other.value,
            abs_error: self.value * other.abs_error + other.value * self.abs_error + self.abs_error * other.abs_error,
            method,
        }
    }
}

/// Requested volume method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum VolumeMethod {
    /// Closed form or exact decomposition; fails if none applies.
    Exact,
    /// Rejection sampling inside the bounding box.
    MonteCarlo { samples: usize, seed: u64 },
    /// Exact when available, Monte Carlo otherwise.
    Auto { samples: usize, seed: u64 },
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Closed-form or exact-decomposition volume, when one applies.
pub fn exact_volume(body: &Body) -> Option<f64> {
    let n = body.dim();
    match body {
        Body::Box(b) => Some(b.half_extents().iter().map(|a| 2.0 * a).product()),
        Body::Ellipsoid(e) => Some(unit_ball_volume(n) / e.shape().determinant().sqrt()),
        Body::SymPolytopeV(p) => {
            if p.generators().len() == n {
                let g = Matrix::from_fn(n, n, |i, j| p.generators()[j][i]);
                Some(2f64.powi(n as i32) * g.determinant().abs() / factorial(n))
            } else if n <= MAX_EXACT_POLY_DIM {
                Some(hull::fan_volume(p.facets(), p.vertices()))
            } else {
                None
            }
        }
        Body::PolytopeH(h) => {
            if let Some(verts) = h.vertices() {
                let facets = hull::active_facets(&h.rows(), verts);
                return Some(hull::fan_volume(&facets, verts));
            }
            let rows = h.rows();
            if rows.len() == 2 * n && h.is_origin_symmetric() {
                let mut pairs: Vec<_> = Vec::new();
                for r in &rows {
                    if !pairs.iter().any(|p: &super::Vector| (p + r).amax() <= 1e-9 * (1.0 + r.amax())) {
                        pairs.push(r.clone());
                    }
                }
                if pairs.len() == n {
                    let m = Matrix::from_fn(n, n, |i, j| pairs[i][j]);
                    return Some(2f64.powi(n as i32) / m.determinant().abs());
                }
            }
            None
        }
    }
}

fn mc_volume(body: &Body, samples: usize, seed: u64) -> Result<Estimate, GeometryError> {
    let n = body.dim();
    if samples < MIN_MC_SAMPLES {
        return Err(GeometryError::SampleBudgetTooSmall(samples));
    }
    if n > MAX_MC_DIM {
        return Err(GeometryError::DimensionTooLarge(n));
    }
    let (lo, hi) = body.bbox();
    let box_volume: f64 = (0..n).map(|j| hi[j] - lo[j]).product();
    let (mean, err) = mean_estimate(samples, seed, |rng| {
        let x = super::Vector::from_fn(n, |j, _| rng.gen_range(lo[j]..=hi[j]));
        if body.contains(&x) {
            1.0
        } else {
            0.0
        }
    });
    Ok(Estimate {
        value: box_volume * mean,
        abs_error: box_volume * err,
        method: EstimateMethod::MonteCarlo { samples, seed },
    })
}

/// Lebesgue measure of a body.
pub fn volume(body: &Body, method: &VolumeMethod) -> Result<Estimate, GeometryError> {
    match *method {
        VolumeMethod::Exact => exact_volume(body).map(Estimate::exact).ok_or(GeometryError::NoExactVolume),
        VolumeMethod::MonteCarlo { samples, seed } => mc_volume(body, samples, seed),
        VolumeMethod::Auto { samples, seed } => match exact_volume(body) {
            Some(v) => Ok(Estimate::exact(v)),
            None => mc_volume(body, samples, seed),
        },
    }
}

/// `|E| · |E°|` for an origin-symmetric body.
///
/// Monte Carlo runs (if any) for `E` and `E°` use distinct streams derived
/// from the given seed.
pub fn mahler_volume(body: &Body, method: &VolumeMethod) -> Result<Estimate, GeometryError> {
    if !body.is_origin_symmetric() {
        return Err(GeometryError::NotSymmetric);
    }
    let dual = polar(body)?;
    let second = match *method {
        VolumeMethod::Exact => VolumeMethod::Exact,
        VolumeMethod::MonteCarlo { samples, seed } => VolumeMethod::MonteCarlo {
            samples,
            seed: crate::derive_seed(seed, &[1]),
        },
        VolumeMethod::Auto { samples, seed } => VolumeMethod::Auto {
            samples,
            seed: crate::derive_seed(seed, &[1]),
        },
    };
    let a = volume(body, method)?;
    let b = volume(&dual, &second)?;
    Ok(a.times(&b))
}
