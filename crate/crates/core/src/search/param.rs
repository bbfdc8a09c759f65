use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::SearchError;
use crate::geometry::{Body, GeometryError, Matrix, Vector};

/// Bound on each raw parameter.
const MAX_PARAM: f64 = 30.0;
/// Bound on log half-extents and log semiaxes. Wider ranges make the
/// shape matrices ill-conditioned enough to bias volumes.
const MAX_LOG_EXTENT: f64 = 6.0;

/// Family of symmetric bodies explored by a search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Parameterization {
    /// Hull of `±g₁, …, ±g_k` in the plane.
    SymPolygon { k: usize },
    /// Hull of `±g₁, …, ±g_k` in `R³`.
    SymPolytope { k: usize },
    /// Log half-extents and rotation angles.
    Box { dim: usize },
    /// Log semiaxes and rotation angles.
    Ellipsoid { dim: usize },
}

impl Parameterization {
    pub fn dim(&self) -> usize {
        match *self {
            Parameterization::SymPolygon { .. } => 2,
            Parameterization::SymPolytope { .. } => 3,
            Parameterization::Box { dim } | Parameterization::Ellipsoid { dim } => dim,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), SearchError> {
        let n = self.dim();
        match *self {
            Parameterization::SymPolygon { k } | Parameterization::SymPolytope { k } if k < n => {
                Err(SearchError::InvalidConfig(format!("k = {k} generators cannot span dimension {n}")))
            }
            Parameterization::Box { dim } | Parameterization::Ellipsoid { dim } if !(1..=3).contains(&dim) => {
                Err(SearchError::InvalidConfig(format!("body search supports dimensions 1 to 3, got {dim}")))
            }
            _ => Ok(()),
        }
    }

    /// Length of the body part of the parameter vector.
    pub(crate) fn body_len(&self) -> usize {
        let n = self.dim();
        match *self {
            Parameterization::SymPolygon { k } | Parameterization::SymPolytope { k } => n * k,
            Parameterization::Box { .. } | Parameterization::Ellipsoid { .. } => n + n * (n - 1) / 2,
        }
    }

    /// Number of generators whose hull is the body; `μ` mixes these. Zero
    /// for ellipsoids, whose polar is only available when centered.
    pub(crate) fn generator_count(&self) -> usize {
        match *self {
            Parameterization::SymPolygon { k } | Parameterization::SymPolytope { k } => k,
            Parameterization::Box { dim } => dim,
            Parameterization::Ellipsoid { .. } => 0,
        }
    }

    pub(crate) fn prior(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.dim();
        match *self {
            Parameterization::SymPolygon { .. } | Parameterization::SymPolytope { .. } => {
                (0..self.body_len()).map(|_| rng.sample(StandardNormal)).collect()
            }
            Parameterization::Box { .. } | Parameterization::Ellipsoid { .. } => {
                let mut t: Vec<f64> = (0..n).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
                t.extend((0..n * (n - 1) / 2).map(|_| rng.gen_range(-PI..PI)));
                t
            }
        }
    }

    /// The body and its generators.
    pub(crate) fn decode(&self, theta: &[f64]) -> Result<(Body, Vec<Vector>), GeometryError> {
        let n = self.dim();
        if theta.iter().any(|t| !(t.is_finite() && t.abs() <= MAX_PARAM)) {
            return Err(GeometryError::InvalidBody("parameter outside the search range".into()));
        }
        let boxed = matches!(self, Parameterization::Box { .. } | Parameterization::Ellipsoid { .. });
        if boxed && theta[..n].iter().any(|t| t.abs() > MAX_LOG_EXTENT) {
            return Err(GeometryError::InvalidBody("extent outside the search range".into()));
        }
        match *self {
            Parameterization::SymPolygon { k } | Parameterization::SymPolytope { k } => {
                let gens: Vec<Vector> = (0..k).map(|i| Vector::from_row_slice(&theta[i * n..(i + 1) * n])).collect();
                Ok((Body::sym_polytope(gens.clone())?, gens))
            }
            Parameterization::Box { .. } => {
                let half = Vector::from_iterator(n, theta[..n].iter().map(|t| t.exp()));
                let rot = rotation(n, &theta[n..]);
                let gens = (0..n).map(|i| rot.column(i) * half[i]).collect();
                Ok((Body::rotated_box(Vector::zeros(n), half, rot)?, gens))
            }
            Parameterization::Ellipsoid { .. } => {
                let rot = rotation(n, &theta[n..]);
                let inv_sq = Matrix::from_diagonal(&Vector::from_iterator(n, theta[..n].iter().map(|t| (-2.0 * t).exp())));
                let shape = &rot * inv_sq * rot.transpose();
                Ok((Body::ellipsoid(Vector::zeros(n), shape)?, Vec::new()))
            }
        }
    }
}

/// Product of plane rotations, one angle per coordinate pair `i < j`.
pub fn rotation(n: usize, angles: &[f64]) -> Matrix {
    let mut r = Matrix::identity(n, n);
    let mut a = angles.iter();
    for i in 0..n {
        for j in i + 1..n {
            let t = *a.next().unwrap_or(&0.0);
            let mut g = Matrix::identity(n, n);
            let (s, c) = t.sin_cos();
            g[(i, i)] = c;
            g[(j, j)] = c;
            g[(i, j)] = -s;
            g[(j, i)] = s;
            r = g * r;
        }
    }
    r
}

/// `−f · Σ λᵢ tanh(sᵢ) gᵢ` with `λ = softmax(l₀, …, l_k)` dropping `l₀`, so
/// that `−μ` lies in the hull of `±gᵢ` whenever `f ∈ [0, 1]`.
pub(crate) fn mix_generators(gens: &[Vector], logits: &[f64], signs: &[f64], fraction: f64, n: usize) -> Vector {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let total: f64 = exps.iter().sum();
    let mut mu = Vector::zeros(n);
    for (i, g) in gens.iter().enumerate() {
        mu -= g * (fraction * exps[i + 1] / total * signs[i].tanh());
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn rotations_are_orthogonal() {
        let r = rotation(3, &[0.3, -1.2, 2.0]);
        assert!((r.transpose() * &r - Matrix::identity(3, 3)).amax() < 1e-14);
        assert!((r.determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mixed_shift_stays_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = Parameterization::SymPolygon { k: 4 };
        for _ in 0..200 {
            let theta = p.prior(&mut rng);
            let (body, gens) = p.decode(&theta).unwrap();
            let logits: Vec<f64> = (0..5).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
            let signs: Vec<f64> = (0..4).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
            let mu = mix_generators(&gens, &logits, &signs, 1.0, 2);
            assert!(body.contains(&-mu));
        }
    }
}
