use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{per_scale_max, trend_verdict, ConditionError, TrendAnalysis, TrendPoint, Verdict, VerdictThresholds};
use crate::geometry::{Estimate, VolumeMethod};
use crate::weights::{integrate, is_doubling, CubeFamily, Weight, WeightError};

/// Subsets sampled inside each cube of a [`CubeFamily`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparabilitySampling {
    pub cubes: CubeFamily,
    /// Dyadic depth of the cells inside each cube; by default 4, 3, 2 in
    /// dimensions 1, 2, 3 and 1 beyond.
    #[serde(default)]
    pub depth: Option<usize>,
    /// Random unions of cells per cube, besides every single cell.
    #[serde(default = "default_unions")]
    pub unions_per_cube: usize,
    /// Side fractions of the corner subcubes, taken at all `2^n` corners.
    #[serde(default = "default_fractions")]
    pub corner_fractions: Vec<f64>,
    /// Doubling constant accepted by the precheck.
    #[serde(default = "default_doubling_cap")]
    pub doubling_cap: f64,
    #[serde(default)]
    pub thresholds: VerdictThresholds,
}

fn default_unions() -> usize {
    64
}

fn default_fractions() -> Vec<f64> {
    vec![0.0625, 0.125, 0.25, 0.5, 0.75]
}

fn default_doubling_cap() -> f64 {
    64.0
}

impl ComparabilitySampling {
    pub fn new(cubes: CubeFamily) -> Self {
        Self {
            cubes,
            depth: None,
            unions_per_cube: default_unions(),
            corner_fractions: default_fractions(),
            doubling_cap: default_doubling_cap(),
            thresholds: VerdictThresholds::default(),
        }
    }
}

/// Subset attaining the sampled constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparabilityWitness {
    pub center: Vec<f64>,
    pub half_side: f64,
    /// `"cells"` for a union of dyadic cells, `"corner"` for a corner subcube.
    pub subset: String,
    /// Dyadic cells in the union, row-major; empty for corner subcubes.
    pub cells: Vec<usize>,
    pub mu1_fraction: f64,
    pub mu2_fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparabilityReport {
    pub delta: f64,
    pub c_estimate: f64,
    pub witness: ComparabilityWitness,
    /// Per half side, the largest ratio.
    pub trend: Vec<TrendPoint>,
    pub analysis: TrendAnalysis,
    pub verdict: Verdict,
    pub mu1_doubling: bool,
    pub mu2_doubling: bool,
    /// Whether at least one of the measures passed the doubling precheck.
    pub premise_holds: bool,
    pub subsets: usize,
}

impl ComparabilityReport {
    /// Finite constant without a diverging trend.
    pub fn bounded(&self) -> bool {
        self.c_estimate.is_finite() && !matches!(self.verdict, Verdict::Diverging { .. })
    }
}

fn default_depth(n: usize) -> usize {
    match n {
        1 => 4,
        2 => 3,
        3 => 2,
        _ => 1,
    }
}

/// One candidate subset of a cube, with its two fractions.
struct Candidate {
    subset: &'static str,
    cells: Vec<usize>,
    f1: f64,
    f2: f64,
}

fn ratio(f1: f64, f2: f64, delta: f64) -> f64 {
    if f1 == 0.0 {
        0.0
    } else if f2 == 0.0 {
        f64::INFINITY
    } else {
        f1 / f2.powf(delta)
    }
}

fn measure(u: &Weight, center: &[f64], half: f64, samples: usize, seed: u64) -> Result<Estimate, WeightError> {
    integrate(u, &crate::weights::cube(center, half)?, &VolumeMethod::Auto { samples, seed })
}

/// Candidates of one cube. Every measurement is seeded by the cube and cell
/// indices only, so both measures see the same sample points.
fn cube_candidates(
    mu1: &Weight,
    mu2: &Weight,
    sampling: &ComparabilitySampling,
    cube_idx: usize,
    center: &[f64],
    half: f64,
    depth: usize,
) -> Result<Vec<Candidate>, ConditionError> {
    let n = center.len();
    let seed = crate::derive_seed(sampling.cubes.seed, &[cube_idx as u64]);
    let samples = sampling.cubes.samples;
    let per_axis = 1usize << depth;
    let cells = per_axis.pow(n as u32);
    let cell_half = half / per_axis as f64;
    let cell_measures = (0..cells)
        .into_par_iter()
        .map(|k| {
            let mut idx = k;
            let c: Vec<f64> = (0..n)
                .map(|j| {
                    let i = idx % per_axis;
                    idx /= per_axis;
                    center[j] - half + (2 * i + 1) as f64 * cell_half
                })
                .collect();
            let s = crate::derive_seed(seed, &[0, k as u64]);
            Ok((measure(mu1, &c, cell_half, samples, s)?.value, measure(mu2, &c, cell_half, samples, s)?.value))
        })
        .collect::<Result<Vec<(f64, f64)>, WeightError>>()?;
    let total1: f64 = cell_measures.iter().map(|m| m.0).sum();
    let total2: f64 = cell_measures.iter().map(|m| m.1).sum();
    for t in [total1, total2] {
        if t <= 0.0 {
            return Err(WeightError::ZeroMeasureCube { center: center.to_vec(), half_side: half }.into());
        }
    }
    let union = |cells: Vec<usize>| {
        let (a, b) = cells.iter().fold((0.0, 0.0), |(a, b), &k| (a + cell_measures[k].0, b + cell_measures[k].1));
        Candidate { subset: "cells", cells, f1: a / total1, f2: b / total2 }
    };
    let mut out: Vec<Candidate> = (0..cells).map(|k| union(vec![k])).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, &[1]));
    for _ in 0..sampling.unions_per_cube {
        let density: f64 = rng.gen();
        let mut pick: Vec<usize> = (0..cells).filter(|_| rng.gen::<f64>() < density).collect();
        if pick.is_empty() {
            pick.push(rng.gen_range(0..cells));
        }
        out.push(union(pick));
    }
    let whole1 = measure(mu1, center, half, samples, crate::derive_seed(seed, &[2]))?.value;
    let whole2 = measure(mu2, center, half, samples, crate::derive_seed(seed, &[2]))?.value;
    let corners = 1usize << n;
    for (fi, &f) in sampling.corner_fractions.iter().enumerate() {
        if !(f > 0.0 && f <= 1.0) {
            return Err(ConditionError::EmptySampling(format!("corner fraction {f} outside (0, 1]")));
        }
        for corner in 0..corners {
            let c: Vec<f64> = (0..n)
                .map(|j| {
                    let s = if corner >> j & 1 == 1 { 1.0 } else { -1.0 };
                    center[j] + s * half * (1.0 - f)
                })
                .collect();
            let s = crate::derive_seed(seed, &[3, fi as u64, corner as u64]);
            let a = measure(mu1, &c, f * half, samples, s)?.value;
            let b = measure(mu2, &c, f * half, samples, s)?.value;
            out.push(Candidate { subset: "corner", cells: vec![], f1: a / whole1, f2: b / whole2 });
        }
    }
    Ok(out)
}

/// Sampled constant of `μ₁(E)/μ₁(Q) ≤ C (μ₂(E)/μ₂(Q))^δ` over subsets `E` of the
/// cubes `Q`: single dyadic cells, random unions of cells and corner subcubes.
///
/// A doubling precheck runs first; when neither measure passes it the report
/// is still produced, with `premise_holds = false`.
pub fn check_comparability(
    mu1: &Weight,
    mu2: &Weight,
    delta: f64,
    sampling: &ComparabilitySampling,
) -> Result<ComparabilityReport, ConditionError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(ConditionError::ExponentOutOfRange(delta));
    }
    if delta > 1.0 {
        log::warn!("comparability exponent {delta} > 1 fails for a measure against itself");
    }
    let fam = &sampling.cubes;
    let n = match fam.centers.first() {
        Some(c) if !c.is_empty() => c.len(),
        _ => return Err(ConditionError::EmptySampling("no cube centers".into())),
    };
    if fam.half_sides.is_empty() {
        return Err(ConditionError::EmptySampling("no cube sizes".into()));
    }
    mu1.validate_lenient(n)?;
    mu2.validate_lenient(n)?;
    let d1 = is_doubling(mu1, fam, sampling.doubling_cap)?;
    let d2 = is_doubling(mu2, fam, sampling.doubling_cap)?;
    let premise_holds = d1.passed || d2.passed;
    if !premise_holds {
        log::warn!("neither measure is doubling on the sampled cubes (ratios {} and {})", d1.max_ratio, d2.max_ratio);
    }
    let depth = sampling.depth.unwrap_or_else(|| default_depth(n));
    let cubes: Vec<(&Vec<f64>, f64)> =
        fam.centers.iter().flat_map(|c| fam.half_sides.iter().map(move |&h| (c, h))).collect();
    let per_cube = cubes
        .par_iter()
        .enumerate()
        .map(|(i, &(c, h))| cube_candidates(mu1, mu2, sampling, i, c, h, depth))
        .collect::<Result<Vec<_>, ConditionError>>()?;
    let mut best: Option<(f64, usize, &Candidate)> = None;
    let mut keyed = Vec::new();
    let mut subsets = 0;
    for (i, cands) in per_cube.iter().enumerate() {
        for cand in cands {
            subsets += 1;
            let r = ratio(cand.f1, cand.f2, delta);
            keyed.push((cubes[i].1, r));
            if best.is_none_or(|(b, _, _)| r > b) {
                best = Some((r, i, cand));
            }
        }
    }
    let (c_estimate, i, cand) = best.expect("every cube has candidates");
    let trend = per_scale_max(keyed);
    let (verdict, analysis) = trend_verdict(&trend, c_estimate, &sampling.thresholds);
    Ok(ComparabilityReport {
        delta,
        c_estimate,
        witness: ComparabilityWitness {
            center: cubes[i].0.clone(),
            half_side: cubes[i].1,
            subset: cand.subset.into(),
            cells: cand.cells.clone(),
            mu1_fraction: cand.f1,
            mu2_fraction: cand.f2,
        },
        trend,
        analysis,
        verdict,
        mu1_doubling: d1.passed,
        mu2_doubling: d2.passed,
        premise_holds,
        subsets,
    })
}

/// Reverse Hölder exponent `ε(δ) = (½ ln 2) / (n ln 2 + ln(2C)/δ)` for
/// `(μ₁, μ₂) ∈ C(δ)` with constant `C` in dimension `n`.
pub fn epsilon_of_delta(delta: f64, c: f64, n: usize) -> Result<f64, ConditionError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(ConditionError::ExponentOutOfRange(delta));
    }
    if !(c.is_finite() && c > 0.0) || n == 0 {
        return Err(ConditionError::ExponentOutOfRange(c));
    }
    let ln2 = std::f64::consts::LN_2;
    let denom = n as f64 * ln2 + (2.0 * c).ln() / delta;
    if denom <= 0.0 {
        return Err(ConditionError::ExponentOutOfRange(c));
    }
    Ok(0.5 * ln2 / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseHolderSample {
    pub center: Vec<f64>,
    pub half_side: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseHolderReport {
    pub epsilon: f64,
    /// `None` when `σ^{1+ε}` is not integrable on some sampled cube.
    pub c_estimate: Option<f64>,
    pub divergent: bool,
    pub samples: Vec<ReverseHolderSample>,
}

/// Largest `avg_Q(σ^{1+ε})^{1/(1+ε)} / avg_Q(σ)` over the cubes, averages
/// taken against `μ₁`.
pub fn reverse_holder_check(
    mu1: &Weight,
    sigma: &Weight,
    epsilon: f64,
    cubes: &CubeFamily,
) -> Result<ReverseHolderReport, ConditionError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(ConditionError::ExponentOutOfRange(epsilon));
    }
    let lifted = Weight::Product {
        factors: vec![mu1.clone(), Weight::Pow { base: Box::new(sigma.clone()), exponent: 1.0 + epsilon }],
    };
    let plain = Weight::Product { factors: vec![mu1.clone(), sigma.clone()] };
    let jobs: Vec<(&Vec<f64>, f64)> =
        cubes.centers.iter().flat_map(|c| cubes.half_sides.iter().map(move |&h| (c, h))).collect();
    if jobs.is_empty() {
        return Err(ConditionError::EmptySampling("empty cube family".into()));
    }
    let results: Vec<Result<ReverseHolderSample, WeightError>> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, &(c, h))| {
            let seed = crate::derive_seed(cubes.seed, &[i as u64]);
            let m = measure(mu1, c, h, cubes.samples, seed)?.value;
            if m <= 0.0 {
                return Err(WeightError::ZeroMeasureCube { center: c.clone(), half_side: h });
            }
            let lifted = measure(&lifted, c, h, cubes.samples, seed)?.value / m;
            let plain = measure(&plain, c, h, cubes.samples, seed)?.value / m;
            Ok(ReverseHolderSample { center: c.clone(), half_side: h, ratio: lifted.powf(1.0 / (1.0 + epsilon)) / plain })
        })
        .collect();
    let mut samples = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(WeightError::NonIntegrableSingularity) => {
                return Ok(ReverseHolderReport { epsilon, c_estimate: None, divergent: true, samples: vec![] })
            }
            Err(e) => return Err(e.into()),
        }
    }
    let c = samples.iter().map(|s| s.ratio).fold(f64::NEG_INFINITY, f64::max);
    let divergent = !c.is_finite();
    Ok(ReverseHolderReport { epsilon, c_estimate: (!divergent).then_some(c), divergent, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family(centers: Vec<Vec<f64>>, half_sides: Vec<f64>) -> CubeFamily {
        CubeFamily { centers, half_sides, samples: 20_000, seed: 5 }
    }

    #[test]
    fn epsilon_closed_form() {
        assert!((epsilon_of_delta(1.0, 1.0, 1).unwrap() - 0.25).abs() < 1e-15);
        assert!((epsilon_of_delta(3.0, 1.0, 1).unwrap() - 0.375).abs() < 1e-15);
        assert!((epsilon_of_delta(1e6, 1.0, 1).unwrap() - 0.5).abs() < 1e-6);
        assert!(epsilon_of_delta(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn measure_against_itself_is_exactly_one() {
        let s = ComparabilitySampling::new(family(vec![vec![0.3, -0.2]], vec![0.5, 1.0]));
        let w = Weight::Product { factors: vec![Weight::power(0.5), Weight::constant(3.0)] };
        let r = check_comparability(&w, &w, 1.0, &s).unwrap();
        assert_eq!(r.c_estimate, 1.0);
    }

    #[test]
    fn singular_lift_is_flagged() {
        let r = reverse_holder_check(&Weight::lebesgue(), &Weight::power(-1.0), 0.5, &family(vec![vec![0.0]], vec![1.0]))
            .unwrap();
        assert!(r.divergent && r.c_estimate.is_none());
    }
}
