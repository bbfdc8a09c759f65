//! Weights, conjugate exponents, the dual weight and integration over bodies.

mod doubling;
mod integrate;

pub use doubling::{is_doubling, CubeFamily, DoublingReport, DoublingSample};
pub(crate) use doubling::cube;
pub use integrate::{integrate, integrate_body, power_interval};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Vector};

/// Measure of a region under a weight, with its error and method.
pub type MeasureEstimate = crate::geometry::Estimate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("exponent {0} is outside the admissible range")]
    ExponentOutOfRange(f64),
    #[error("weight vanishes identically, its dual is undefined")]
    ZeroWeight,
    #[error("|x|^{alpha} is not locally integrable in dimension {dim}")]
    NotLocallyIntegrable { alpha: f64, dim: usize },
    #[error("weight has a non-integrable singularity inside the region")]
    NonIntegrableSingularity,
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("weight dimension {got} does not match ambient dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cube centered at {center:?} with half side {half_side} has zero measure")]
    ZeroMeasureCube { center: Vec<f64>, half_side: f64 },
    #[error("no exact form for this weight and region")]
    NoExactForm,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl WeightError {
    /// Stable variant name, used in run manifests.
    pub fn name(&self) -> &'static str {
        match self {
            WeightError::ExponentOutOfRange(_) => "ExponentOutOfRange",
            WeightError::ZeroWeight => "ZeroWeight",
            WeightError::NotLocallyIntegrable { .. } => "NotLocallyIntegrable",
            WeightError::NonIntegrableSingularity => "NonIntegrableSingularity",
            WeightError::InvalidWeight(_) => "InvalidWeight",
            WeightError::DimensionMismatch { .. } => "DimensionMismatch",
            WeightError::ZeroMeasureCube { .. } => "ZeroMeasureCube",
            WeightError::NoExactForm => "NoExactForm",
            WeightError::Geometry(e) => e.name(),
        }
    }
}

/// Conjugate exponent `p / (p − 1)`.
pub fn conjugate(p: f64) -> Result<f64, WeightError> {
    if !(p.is_finite() && p > 1.0) {
        return Err(WeightError::ExponentOutOfRange(p));
    }
    Ok(p / (p - 1.0))
}

/// The exponents `(p, q)` with their conjugates and `s = max(p', q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentsDoc")]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub p_conj: f64,
    pub q_conj: f64,
    pub s: f64,
}

#[derive(Deserialize)]
struct ExponentsDoc {
    p: f64,
    q: f64,
}

impl TryFrom<ExponentsDoc> for Exponents {
    type Error = WeightError;
    fn try_from(d: ExponentsDoc) -> Result<Self, Self::Error> {
        Exponents::new(d.p, d.q)
    }
}

impl Exponents {
    pub fn new(p: f64, q: f64) -> Result<Self, WeightError> {
        let p_conj = conjugate(p)?;
        let q_conj = conjugate(q)?;
        Ok(Self { p, q, p_conj, q_conj, s: p_conj.max(q) })
    }

    /// Exponents `(p', q')`; the dual weight under these inverts [`dual_weight`].
    pub fn conjugate_swapped(&self) -> Self {
        Exponents::new(self.p_conj, self.q_conj).expect("conjugates of valid exponents are valid")
    }

    /// Power `−p'/p` taking `v` to its dual weight.
    pub fn dual_power(&self) -> f64 {
        -self.p_conj / self.p
    }
}

const MAX_GRID_DIM: usize = 6;

/// Samples of a weight on a vertex grid over a box, multilinearly
/// interpolated and zero outside the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridWeight {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Nodes per axis, at least 2.
    pub shape: Vec<usize>,
    /// Row-major samples, last axis fastest.
    pub values: Vec<f64>,
}

impl GridWeight {
    /// Samples `f` on the vertex grid.
    pub fn from_fn(lower: Vec<f64>, upper: Vec<f64>, shape: Vec<usize>, f: impl Fn(&[f64]) -> f64) -> Self {
        let total: usize = shape.iter().product();
        let n = shape.len();
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; n];
        for flat in 0..total {
            let mut rem = flat;
            for i in (0..n).rev() {
                let k = rem % shape[i];
                rem /= shape[i];
                x[i] = lower[i] + (upper[i] - lower[i]) * k as f64 / (shape[i] - 1) as f64;
            }
            values.push(f(&x));
        }
        Self { lower, upper, shape, values }
    }

    fn validate(&self) -> Result<(), WeightError> {
        let n = self.shape.len();
        if n == 0 || n > MAX_GRID_DIM || self.lower.len() != n || self.upper.len() != n {
            return Err(WeightError::InvalidWeight("grid axes disagree".into()));
        }
        if self.shape.iter().any(|&s| s < 2) {
            return Err(WeightError::InvalidWeight("grid needs at least 2 nodes per axis".into()));
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(l.is_finite() && u.is_finite() && l < u)) {
            return Err(WeightError::InvalidWeight("grid bounds must satisfy lower < upper".into()));
        }
        if self.values.len() != self.shape.iter().product::<usize>() {
            return Err(WeightError::InvalidWeight("grid value count does not match shape".into()));
        }
        if self.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(WeightError::InvalidWeight("grid values must be finite and nonnegative".into()));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = self.shape.len();
        let mut base = 0usize;
        let mut frac = [0.0f64; MAX_GRID_DIM];
        let mut stride = 1usize;
        let mut strides = [0usize; MAX_GRID_DIM];
        for i in (0..n).rev() {
            strides[i] = stride;
            stride *= self.shape[i];
        }
        for i in 0..n {
            let (l, u) = (self.lower[i], self.upper[i]);
            if !(x[i] >= l && x[i] <= u) {
                return 0.0;
            }
            let cells = (self.shape[i] - 1) as f64;
            let t = (x[i] - l) / (u - l) * cells;
            let k = (t.floor() as usize).min(self.shape[i] - 2);
            frac[i] = t - k as f64;
            base += k * strides[i];
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut off = base;
            for i in 0..n {
                if corner >> i & 1 == 1 {
                    w *= frac[i];
                    off += strides[i];
                } else {
                    w *= 1.0 - frac[i];
                }
            }
            if w != 0.0 {
                acc += w * self.values[off];
            }
        }
        acc
    }

    /// Grid node coordinates along `axis`.
    pub fn nodes(&self, axis: usize) -> Vec<f64> {
        let m = self.shape[axis];
        (0..m)
            .map(|k| self.lower[axis] + (self.upper[axis] - self.lower[axis]) * k as f64 / (m - 1) as f64)
            .collect()
    }
}

/// A nonnegative weight on `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Weight {
    /// `c`.
    Constant { value: f64 },
    /// `|x|^alpha`.
    Power { alpha: f64 },
    /// `∏ |x_i|^{alpha_i}`.
    Aniso { alphas: Vec<f64> },
    Grid(GridWeight),
    /// Pointwise product.
    Product { factors: Vec<Weight> },
    /// `factor · weight`.
    Scaled { factor: f64, weight: Box<Weight> },
    /// `base^exponent`.
    Pow { base: Box<Weight>, exponent: f64 },
    /// `x ↦ weight(x + shift)`.
    Shifted { shift: Vec<f64>, weight: Box<Weight> },
}

/// `c · |x − center|^alpha`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Radial {
    pub c: f64,
    pub center: Vector,
    pub alpha: f64,
}

/// `c · ∏ |x_i − center_i|^{alpha_i}`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Separable {
    pub c: f64,
    pub center: Vector,
    pub alphas: Vec<f64>,
}

impl Weight {
    pub fn constant(value: f64) -> Self {
        Weight::Constant { value }
    }
    pub fn lebesgue() -> Self {
        Weight::Constant { value: 1.0 }
    }
    pub fn power(alpha: f64) -> Self {
        Weight::Power { alpha }
    }

    /// Dimension fixed by the descriptor, if any.
    pub fn dim_hint(&self) -> Option<usize> {
        match self {
            Weight::Constant { .. } | Weight::Power { .. } => None,
            Weight::Aniso { alphas } => Some(alphas.len()),
            Weight::Grid(g) => Some(g.shape.len()),
            Weight::Product { factors } => factors.iter().find_map(|f| f.dim_hint()),
            Weight::Scaled { weight, .. } => weight.dim_hint(),
            Weight::Pow { base, .. } => base.dim_hint(),
            Weight::Shifted { shift, .. } => Some(shift.len()),
        }
    }

    /// Checks parameters against the ambient dimension `n`.
    ///
    /// Power singularities that are not locally integrable are rejected here;
    /// use [`Weight::validate_lenient`] for derived weights such as duals.
    pub fn validate(&self, n: usize) -> Result<(), WeightError> {
        self.validate_inner(n, true)
    }

    /// Like [`Weight::validate`] but only logs non-integrable power singularities.
    pub fn validate_lenient(&self, n: usize) -> Result<(), WeightError> {
        self.validate_inner(n, false)
    }

    fn validate_inner(&self, n: usize, strict: bool) -> Result<(), WeightError> {
        let check_dim = |got: usize| {
            if got == n {
                Ok(())
            } else {
                Err(WeightError::DimensionMismatch { expected: n, got })
            }
        };
        match self {
            Weight::Constant { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(WeightError::InvalidWeight("constant must be finite and nonnegative".into()));
                }
            }
            Weight::Power { alpha } => {
                if !alpha.is_finite() {
                    return Err(WeightError::InvalidWeight("non-finite power".into()));
                }
                if *alpha <= -(n as f64) {
                    let err = WeightError::NotLocallyIntegrable { alpha: *alpha, dim: n };
                    if strict {
                        return Err(err);
                    }
                    log::warn!("{err}");
                }
            }
            Weight::Aniso { alphas } => {
                check_dim(alphas.len())?;
                if alphas.iter().any(|a| !a.is_finite()) {
                    return Err(WeightError::InvalidWeight("non-finite power".into()));
                }
                if let Some(&a) = alphas.iter().find(|a| **a <= -1.0) {
                    let err = WeightError::NotLocallyIntegrable { alpha: a, dim: 1 };
                    if strict {
                        return Err(err);
                    }
                    log::warn!("{err}");
                }
            }
            Weight::Grid(g) => {
                g.validate()?;
                check_dim(g.shape.len())?;
            }
            Weight::Product { factors } => {
                if factors.is_empty() {
                    return Err(WeightError::InvalidWeight("empty product".into()));
                }
                for f in factors {
                    f.validate_inner(n, strict)?;
                }
            }
            Weight::Scaled { factor, weight } => {
                if !(factor.is_finite() && *factor > 0.0) {
                    return Err(WeightError::InvalidWeight("scale factor must be positive".into()));
                }
                weight.validate_inner(n, strict)?;
            }
            Weight::Pow { base, exponent } => {
                if !exponent.is_finite() {
                    return Err(WeightError::InvalidWeight("non-finite exponent".into()));
                }
                base.validate_inner(n, false)?;
            }
            Weight::Shifted { shift, weight } => {
                check_dim(shift.len())?;
                if shift.iter().any(|s| !s.is_finite()) {
                    return Err(WeightError::InvalidWeight("non-finite shift".into()));
                }
                weight.validate_inner(n, strict)?;
            }
        }
        Ok(())
    }

    /// Pointwise value.
    pub fn eval(&self, x: &Vector) -> f64 {
        match self {
            Weight::Constant { value } => *value,
            Weight::Power { alpha } => {
                if *alpha == 0.0 {
                    1.0
                } else {
                    x.norm().powf(*alpha)
                }
            }
            Weight::Aniso { alphas } => alphas
                .iter()
                .zip(x.iter())
                .map(|(a, xi)| if *a == 0.0 { 1.0 } else { xi.abs().powf(*a) })
                .product(),
            Weight::Grid(g) => g.eval(x.as_slice()),
            Weight::Product { factors } => factors.iter().map(|f| f.eval(x)).product(),
            Weight::Scaled { factor, weight } => factor * weight.eval(x),
            Weight::Pow { base, exponent } => base.eval(x).powf(*exponent),
            Weight::Shifted { shift, weight } => {
                let y = x + Vector::from_column_slice(shift);
                weight.eval(&y)
            }
        }
    }

    /// `c · |x − p|^α` form, when the weight has one in dimension `n`.
    pub(crate) fn radial(&self, n: usize) -> Option<Radial> {
        let zero = || Vector::zeros(n);
        match self {
            Weight::Constant { value } => Some(Radial { c: *value, center: zero(), alpha: 0.0 }),
            Weight::Power { alpha } => Some(Radial { c: 1.0, center: zero(), alpha: *alpha }),
            Weight::Aniso { alphas } if alphas.iter().all(|a| *a == 0.0) => {
                Some(Radial { c: 1.0, center: zero(), alpha: 0.0 })
            }
            Weight::Aniso { alphas } if n == 1 && alphas.len() == 1 => {
                Some(Radial { c: 1.0, center: zero(), alpha: alphas[0] })
            }
            Weight::Aniso { .. } | Weight::Grid(_) => None,
            Weight::Product { factors } => {
                let mut acc = Radial { c: 1.0, center: zero(), alpha: 0.0 };
                for f in factors {
                    let r = f.radial(n)?;
                    acc = combine_radial(acc, r)?;
                }
                Some(acc)
            }
            Weight::Scaled { factor, weight } => weight.radial(n).map(|mut r| {
                r.c *= factor;
                r
            }),
            Weight::Pow { base, exponent } => base.radial(n).map(|r| Radial {
                c: r.c.powf(*exponent),
                center: r.center,
                alpha: r.alpha * exponent,
            }),
            Weight::Shifted { shift, weight } => weight.radial(n).map(|mut r| {
                r.center -= Vector::from_column_slice(shift);
                r
            }),
        }
    }

    /// `c · ∏ |x_i − p_i|^{α_i}` form, when the weight has one in dimension `n`.
    pub(crate) fn separable(&self, n: usize) -> Option<Separable> {
        let zero = || Vector::zeros(n);
        match self {
            Weight::Constant { value } => Some(Separable { c: *value, center: zero(), alphas: vec![0.0; n] }),
            Weight::Power { alpha } if n == 1 => Some(Separable { c: 1.0, center: zero(), alphas: vec![*alpha] }),
            Weight::Power { alpha } if *alpha == 0.0 => {
                Some(Separable { c: 1.0, center: zero(), alphas: vec![0.0; n] })
            }
            Weight::Power { .. } | Weight::Grid(_) => None,
            Weight::Aniso { alphas } => Some(Separable { c: 1.0, center: zero(), alphas: alphas.clone() }),
            Weight::Product { factors } => {
                let mut acc = Separable { c: 1.0, center: zero(), alphas: vec![0.0; n] };
                for f in factors {
                    let s = f.separable(n)?;
                    acc.c *= s.c;
                    for i in 0..n {
                        if s.alphas[i] == 0.0 {
                            continue;
                        }
                        if acc.alphas[i] == 0.0 {
                            acc.center[i] = s.center[i];
                        } else if acc.center[i] != s.center[i] {
                            return None;
                        }
                        acc.alphas[i] += s.alphas[i];
                    }
                }
                Some(acc)
            }
            Weight::Scaled { factor, weight } => weight.separable(n).map(|mut s| {
                s.c *= factor;
                s
            }),
            Weight::Pow { base, exponent } => base.separable(n).map(|s| Separable {
                c: s.c.powf(*exponent),
                center: s.center,
                alphas: s.alphas.iter().map(|a| a * exponent).collect(),
            }),
            Weight::Shifted { shift, weight } => weight.separable(n).map(|mut s| {
                s.center -= Vector::from_column_slice(shift);
                s
            }),
        }
    }

    /// Most singular radial factor `|x − p|^α`, used to shape importance sampling.
    pub(crate) fn kernel(&self, n: usize) -> Option<(Vector, f64)> {
        if let Some(r) = self.radial(n) {
            return (r.alpha < 0.0).then_some((r.center, r.alpha));
        }
        match self {
            Weight::Product { factors } => {
                let mut best: Option<(Vector, f64)> = None;
                for (center, alpha) in factors.iter().filter_map(|f| f.kernel(n)) {
                    best = match best {
                        Some((c, a)) if c == center => Some((c, a + alpha)),
                        Some((c, a)) if a <= alpha => Some((c, a)),
                        _ => Some((center, alpha)),
                    };
                }
                best
            }
            Weight::Scaled { weight, .. } => weight.kernel(n),
            Weight::Pow { base, exponent } if *exponent > 0.0 => {
                base.kernel(n).map(|(c, a)| (c, a * exponent))
            }
            Weight::Shifted { shift, weight } => weight
                .kernel(n)
                .map(|(c, a)| (c - Vector::from_column_slice(shift), a)),
            _ => None,
        }
    }

    /// Breakpoints along axis `axis` where the weight is not smooth.
    pub(crate) fn breakpoints(&self, axis: usize) -> Vec<f64> {
        match self {
            Weight::Constant { .. } => vec![],
            Weight::Power { .. } | Weight::Aniso { .. } => vec![0.0],
            Weight::Grid(g) => g.nodes(axis),
            Weight::Product { factors } => factors.iter().flat_map(|f| f.breakpoints(axis)).collect(),
            Weight::Scaled { weight, .. } | Weight::Pow { base: weight, .. } => weight.breakpoints(axis),
            Weight::Shifted { shift, weight } => {
                weight.breakpoints(axis).into_iter().map(|b| b - shift[axis]).collect()
            }
        }
    }
}

fn combine_radial(a: Radial, b: Radial) -> Option<Radial> {
    let c = a.c * b.c;
    if a.alpha == 0.0 {
        Some(Radial { c, center: b.center, alpha: b.alpha })
    } else if b.alpha == 0.0 || a.center == b.center {
        Some(Radial { c, center: a.center, alpha: a.alpha + b.alpha })
    } else {
        None
    }
}

/// Dual weight `w = v^{−p'/p}`.
///
/// Power-type descriptors map to power-type descriptors; anything else is
/// wrapped in [`Weight::Pow`]. A dual power that is not locally integrable is
/// logged as a warning, not an error.
pub fn dual_weight(v: &Weight, exps: &Exponents) -> Result<Weight, WeightError> {
    let e = exps.dual_power();
    let w = dual_with_power(v, e)?;
    let n = v.dim_hint().unwrap_or(1);
    if let Some(r) = w.radial(n) {
        if r.alpha <= -(n as f64) {
            log::warn!("{}", WeightError::NotLocallyIntegrable { alpha: r.alpha, dim: n });
        }
    }
    Ok(w)
}

fn dual_with_power(v: &Weight, e: f64) -> Result<Weight, WeightError> {
    Ok(match v {
        Weight::Constant { value } => {
            if *value == 0.0 {
                return Err(WeightError::ZeroWeight);
            }
            Weight::Constant { value: value.powf(e) }
        }
        Weight::Power { alpha } => Weight::Power { alpha: alpha * e },
        Weight::Aniso { alphas } => Weight::Aniso { alphas: alphas.iter().map(|a| a * e).collect() },
        Weight::Grid(g) => {
            if g.values.iter().all(|x| *x == 0.0) {
                return Err(WeightError::ZeroWeight);
            }
            Weight::Pow { base: Box::new(v.clone()), exponent: e }
        }
        Weight::Product { factors } => Weight::Product {
            factors: factors.iter().map(|f| dual_with_power(f, e)).collect::<Result<_, _>>()?,
        },
        Weight::Scaled { factor, weight } => Weight::Scaled {
            factor: factor.powf(e),
            weight: Box::new(dual_with_power(weight, e)?),
        },
        Weight::Pow { base, exponent } => {
            let combined = exponent * e;
            if combined == 1.0 {
                (**base).clone()
            } else {
                Weight::Pow { base: base.clone(), exponent: combined }
            }
        }
        Weight::Shifted { shift, weight } => Weight::Shifted {
            shift: shift.clone(),
            weight: Box::new(dual_with_power(weight, e)?),
        },
    })
}
