use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{integrate, Weight, WeightError};
use crate::geometry::{Body, Region, Vector, VolumeMethod};

/// Axis-parallel cubes `center + [−h, h]^n` for every center and half side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeFamily {
    pub centers: Vec<Vec<f64>>,
    pub half_sides: Vec<f64>,
    /// Monte Carlo budget per cube when no deterministic rule applies.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    100_000
}

/// One sampled cube and its ratio `u(2Q) / u(Q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingSample {
    pub center: Vec<f64>,
    pub half_side: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub passed: bool,
    pub max_ratio: f64,
    pub witness: DoublingSample,
    pub samples: Vec<DoublingSample>,
}

pub(crate) fn cube(center: &[f64], half: f64) -> Result<Region, WeightError> {
    let n = center.len();
    Ok(Region::Body(Body::aligned_box(
        Vector::from_column_slice(center),
        Vector::from_element(n, half),
    )?))
}

/// Largest `u(2Q) / u(Q)` over the family; passes when it is at most `c_cap`.
pub fn is_doubling(u: &Weight, family: &CubeFamily, c_cap: f64) -> Result<DoublingReport, WeightError> {
    let jobs: Vec<(usize, &Vec<f64>, f64)> = family
        .centers
        .iter()
        .flat_map(|c| family.half_sides.iter().map(move |&h| (c, h)))
        .enumerate()
        .map(|(k, (c, h))| (k, c, h))
        .collect();
    if jobs.is_empty() {
        return Err(WeightError::InvalidWeight("empty cube family".into()));
    }
    let samples: Vec<DoublingSample> = jobs
        .par_iter()
        .map(|&(k, center, half)| {
            let seed = crate::derive_seed(family.seed, &[k as u64]);
            let method = VolumeMethod::Auto { samples: family.samples, seed };
            let inner = integrate(u, &cube(center, half)?, &method)?.value;
            if inner <= 0.0 {
                return Err(WeightError::ZeroMeasureCube { center: center.clone(), half_side: half });
            }
            let method = VolumeMethod::Auto { samples: family.samples, seed: crate::derive_seed(seed, &[1]) };
            let outer = integrate(u, &cube(center, 2.0 * half)?, &method)?.value;
            Ok(DoublingSample { center: center.clone(), half_side: half, ratio: outer / inner })
        })
        .collect::<Result<_, _>>()?;
    let witness = samples
        .iter()
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .cloned()
        .expect("nonempty");
    Ok(DoublingReport { passed: witness.ratio <= c_cap, max_ratio: witness.ratio, witness, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_doubling_constant() {
        let fam = CubeFamily {
            centers: vec![vec![0.0, 0.0], vec![3.0, -1.0]],
            half_sides: vec![0.5, 2.0],
            samples: 10_000,
            seed: 1,
        };
        let r = is_doubling(&Weight::lebesgue(), &fam, 4.0).unwrap();
        assert_eq!(r.max_ratio, 4.0);
        assert!(r.passed);
    }

    #[test]
    fn zero_measure_cube_is_reported() {
        let g = Weight::Grid(super::super::GridWeight::from_fn(vec![0.0], vec![1.0], vec![2], |_| 1.0));
        let fam = CubeFamily { centers: vec![vec![5.0]], half_sides: vec![1.0], samples: 10_000, seed: 0 };
        assert_eq!(is_doubling(&g, &fam, 10.0).unwrap_err().name(), "ZeroMeasureCube");
    }
}
