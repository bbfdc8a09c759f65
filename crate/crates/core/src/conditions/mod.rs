//! Sampled checks of the necessary classes, comparability of measures,
//! reverse Hölder exponents and the inherited parameter regions.

mod classify;
mod comparability;
mod necessary;
mod region;

pub use classify::{classify_sufficiency, CaseEvidence, Classification, ClassifyConfig};
pub use comparability::{
    check_comparability, epsilon_of_delta, reverse_holder_check, ComparabilityReport, ComparabilitySampling,
    ComparabilityWitness, ReverseHolderReport, ReverseHolderSample,
};
pub use necessary::{check_condition, check_nqprime, dilation_ratio};
pub use region::{inherited_region, Case, Disk, Line, RegionSpec, DEFAULT_DISK_RADIUS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Body, GeometryError};
use crate::search::{trend_fit, TrendFit};
use crate::tolerances::{DIVERGENCE_R2, DIVERGENCE_SLOPE, MIN_TREND_SCALES};
use crate::weights::{dual_weight, Exponents, Weight, WeightError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConditionError {
    #[error("sampling configuration produces no configurations: {0}")]
    EmptySampling(String),
    #[error("dual weight |x|^{alpha} is not locally integrable in dimension {dim}")]
    NotLocallyIntegrable { alpha: f64, dim: usize },
    #[error("exponent {0} is outside the admissible range")]
    ExponentOutOfRange(f64),
    #[error("case {case} requires {requirement}")]
    CaseMismatch { case: String, requirement: String },
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl ConditionError {
    /// Stable variant name, used in run manifests.
    pub fn name(&self) -> &'static str {
        match self {
            ConditionError::EmptySampling(_) => "EmptySampling",
            ConditionError::NotLocallyIntegrable { .. } => "NotLocallyIntegrable",
            ConditionError::ExponentOutOfRange(_) => "ExponentOutOfRange",
            ConditionError::CaseMismatch { .. } => "CaseMismatch",
            ConditionError::Weight(e) => e.name(),
            ConditionError::Geometry(e) => e.name(),
        }
    }
}

/// The weights `u`, `v` and the dual `w = v^{−p'/p}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPair {
    pub u: Weight,
    pub v: Weight,
    pub w: Weight,
}

impl WeightPair {
    /// Pair with `w` derived from `v`.
    pub fn new(u: Weight, v: Weight, exps: &Exponents) -> Result<Self, ConditionError> {
        let w = dual_weight(&v, exps)?;
        Ok(Self { u, v, w })
    }

    /// Pair given through `u` and the dual `w`; `v = w^{−p/p'}`.
    pub fn from_dual(u: Weight, w: Weight, exps: &Exponents) -> Result<Self, ConditionError> {
        let v = dual_weight(&w, &exps.conjugate_swapped())?;
        Ok(Self { u, v, w })
    }

    pub(crate) fn validate(&self, n: usize) -> Result<(), ConditionError> {
        self.u.validate(n)?;
        self.v.validate_lenient(n)?;
        self.w.validate_lenient(n)?;
        Ok(())
    }
}

/// Body family swept by the condition checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Cubes,
    Rectanguloids,
    Ellipsoids,
    SymPolytopes,
}

/// Thresholds deciding between bounded, diverging and inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictThresholds {
    pub slope: f64,
    pub r_squared: f64,
    pub min_scales: usize,
}

impl Default for VerdictThresholds {
    fn default() -> Self {
        Self { slope: DIVERGENCE_SLOPE, r_squared: DIVERGENCE_R2, min_scales: MIN_TREND_SCALES }
    }
}

/// Configurations sampled at each scale. Index zero of every sampled
/// dimension is the origin-centered configuration (`c = 0`, `μ = 0`, `τ = 0`,
/// shape zero being the cube or ball).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    /// Ambient dimension, used when no weight fixes it.
    pub dim: usize,
    /// Linear sizes `L`; the cube at scale `L` is `[−L, L]^n`.
    pub scales: Vec<f64>,
    pub shapes_per_scale: usize,
    pub centers_per_scale: usize,
    pub offsets_per_center: usize,
    pub translations_per_scale: usize,
    /// Half-width of the center and translation boxes, relative to the set's scale.
    pub translation_width: f64,
    pub mc_samples: usize,
    pub seed: u64,
    pub thresholds: VerdictThresholds,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            dim: 1,
            scales: dyadic_scales(-10, 10),
            shapes_per_scale: 1,
            centers_per_scale: 1,
            offsets_per_center: 1,
            translations_per_scale: 1,
            translation_width: 1.0,
            mc_samples: 20_000,
            seed: 0,
            thresholds: VerdictThresholds::default(),
        }
    }
}

/// `2^lo, …, 2^hi`.
pub fn dyadic_scales(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Bounded { constant: f64 },
    /// Growth along one end of the scale sweep; `slope` is the fitted tail slope.
    Diverging { slope: f64, tail: Tail },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Lower,
    Upper,
}

/// One point of a growth trend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub scale: f64,
    pub value: f64,
}

/// Configuration attaining the sampled supremum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    /// Which of the two products: `"direct"` (`w` on the body) or `"interchanged"`.
    pub product: String,
    pub scale: f64,
    /// The body before translation; the sampled set is `body + center`.
    pub body: Body,
    pub center: Vec<f64>,
    pub mu: Vec<f64>,
    pub tau: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrendAnalysis {
    pub fit: Option<TrendFit>,
    pub lower_tail: Option<TrendFit>,
    pub upper_tail: Option<TrendFit>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub class: String,
    pub family: Family,
    pub sup_estimate: f64,
    /// Propagated error of the supremum's witness value.
    pub sup_error: f64,
    pub witness: Witness,
    /// Per-scale maxima, keyed by the scale of the set carrying `w` (or `v`).
    pub trend: Vec<TrendPoint>,
    pub analysis: TrendAnalysis,
    pub verdict: Verdict,
    /// Largest `u(√n A) / u(A)` over the origin-centered shapes.
    pub dilation_ratio_u: f64,
    /// Largest `w(√n A) / w(A)` over the origin-centered shapes.
    pub dilation_ratio_w: f64,
    pub evaluations: usize,
}

/// Verdict from a trend: diverging when a tail fit grows with slope beyond the
/// threshold and a good fit, bounded otherwise.
pub fn trend_verdict(trend: &[TrendPoint], sup: f64, th: &VerdictThresholds) -> (Verdict, TrendAnalysis) {
    let mut pts: Vec<(f64, f64)> = trend
        .iter()
        .filter(|p| p.value > 0.0 && p.value.is_finite())
        .map(|p| (p.scale, p.value))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let fit = trend_fit(&pts).ok();
    if pts.len() < th.min_scales.max(4) {
        let reason = format!("{} usable scales, need {}", pts.len(), th.min_scales.max(4));
        return (
            Verdict::Inconclusive { reason },
            TrendAnalysis { fit, lower_tail: None, upper_tail: None },
        );
    }
    let half = pts.len().div_ceil(2);
    let (lower, upper) = if half >= th.min_scales.max(4) {
        (trend_fit(&pts[..half]).ok(), trend_fit(&pts[pts.len() - half..]).ok())
    } else {
        (fit, fit)
    };
    let verdict = match (upper, lower) {
        (Some(u), _) if u.slope > th.slope && u.r_squared > th.r_squared => {
            Verdict::Diverging { slope: u.slope, tail: Tail::Upper }
        }
        (_, Some(l)) if l.slope < -th.slope && l.r_squared > th.r_squared => {
            Verdict::Diverging { slope: l.slope, tail: Tail::Lower }
        }
        _ => Verdict::Bounded { constant: sup },
    };
    (verdict, TrendAnalysis { fit, lower_tail: lower, upper_tail: upper })
}

/// Groups `(scale, value)` pairs by scale (relative tolerance `1e-12`) and keeps the maximum.
pub(crate) fn per_scale_max(values: impl IntoIterator<Item = (f64, f64)>) -> Vec<TrendPoint> {
    let mut out: Vec<TrendPoint> = Vec::new();
    for (s, v) in values {
        match out.iter_mut().find(|p| (p.scale - s).abs() <= 1e-12 * s.abs()) {
            Some(p) => p.value = p.value.max(v),
            None => out.push(TrendPoint { scale: s, value: v }),
        }
    }
    out.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    out
}

pub(crate) fn check_dual_integrability(pair: &WeightPair, n: usize) -> Result<(), ConditionError> {
    match pair.w.kernel(n) {
        Some((_, alpha)) if alpha <= -(n as f64) => Err(ConditionError::NotLocallyIntegrable { alpha, dim: n }),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vector;
    use rand::{Rng, SeedableRng};

    #[test]
    fn dual_is_consistent_pointwise() {
        let exps = Exponents::new(3.0, 2.0).unwrap();
        let v = Weight::Product { factors: vec![Weight::power(0.7), Weight::constant(2.5)] };
        let pair = WeightPair::new(Weight::lebesgue(), v.clone(), &exps).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let x = Vector::from_fn(2, |_, _| rng.gen_range(-3.0..3.0));
            let expect = v.eval(&x).powf(exps.dual_power());
            assert!((pair.w.eval(&x) - expect).abs() <= 1e-9 * expect);
        }
        let back = WeightPair::from_dual(Weight::lebesgue(), pair.w.clone(), &exps).unwrap();
        let x = Vector::from_row_slice(&[0.3, -1.2]);
        assert!((back.v.eval(&x) - v.eval(&x)).abs() < 1e-9 * v.eval(&x));
    }

    #[test]
    fn verdicts_from_synthetic_trends() {
        let th = VerdictThresholds::default();
        let grow: Vec<TrendPoint> =
            dyadic_scales(-8, 8).into_iter().map(|s| TrendPoint { scale: s, value: s.powf(0.2) }).collect();
        assert!(matches!(trend_verdict(&grow, 1.0, &th).0, Verdict::Diverging { tail: Tail::Upper, .. }));
        let shrink: Vec<TrendPoint> =
            dyadic_scales(-8, 8).into_iter().map(|s| TrendPoint { scale: s, value: s.powf(-0.2) }).collect();
        assert!(matches!(trend_verdict(&shrink, 1.0, &th).0, Verdict::Diverging { tail: Tail::Lower, .. }));
        let flat: Vec<TrendPoint> =
            dyadic_scales(-8, 8).into_iter().map(|s| TrendPoint { scale: s, value: 2.0 }).collect();
        assert!(matches!(trend_verdict(&flat, 2.0, &th).0, Verdict::Bounded { .. }));
        assert!(matches!(trend_verdict(&flat[..5], 2.0, &th).0, Verdict::Inconclusive { .. }));
    }
}
