//! Fourier transforms `f̂(z) = ∫ f(x) e^{−ix·z} dx` of simple functions on
//! grids, and the lower-bound, restricted weak-type, strong-type and
//! Hausdorff–Young checks built on them.
//!
//! The transform carries no `2π` normalization, so Plancherel reads
//! `‖f̂‖₂² = (2π)^n ‖f‖₂²`.

mod checks;
mod transform;

pub use checks::{
    hausdorff_young_check, lower_bound_check, restricted_weak_type, rwt_sweep, strong_type_ratio, HausdorffYoungReport,
    LevelSetConfig, LevelSetReport, LowerBoundReport, RwtSweepReport, StrongTypeReport, StrongTypeRow,
};
pub use transform::{fourier_transform, transform_at, transform_points};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Region, Vector, VolumeMethod};
use crate::tolerances::{MAX_QUADRATURE_NODES, MIN_GRID_RESOLUTION};
use crate::weights::{integrate, Weight, WeightError};

pub type Complex = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourierError {
    #[error("quadrature did not converge: change {change:e} at {nodes} nodes per axis")]
    QuadratureNotConverged { change: f64, nodes: usize },
    #[error("level set reaches the grid boundary: {share:.3e} of the measure lies in the outer shell")]
    GridDomainTooSmall { share: f64 },
    #[error("the right-hand side vanishes")]
    ZeroDenominator,
    #[error("exponent {0} is outside the admissible range")]
    ExponentOutOfRange(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("regions {0} and {1} overlap")]
    OverlappingRegions(usize, usize),
    #[error("transforms are supported up to dimension 3, got {0}")]
    DimensionTooLarge(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Weight(#[from] WeightError),
}

impl FourierError {
    /// Stable variant name, used in run manifests.
    pub fn name(&self) -> &'static str {
        match self {
            FourierError::QuadratureNotConverged { .. } => "QuadratureNotConverged",
            FourierError::GridDomainTooSmall { .. } => "GridDomainTooSmall",
            FourierError::ZeroDenominator => "ZeroDenominator",
            FourierError::ExponentOutOfRange(_) => "ExponentOutOfRange",
            FourierError::InvalidGrid(_) => "InvalidGrid",
            FourierError::OverlappingRegions(..) => "OverlappingRegions",
            FourierError::DimensionTooLarge(_) => "DimensionTooLarge",
            FourierError::Geometry(e) => e.name(),
            FourierError::Weight(e) => e.name(),
        }
    }
}

/// Real or complex coefficient; real values may be written as plain numbers.
#[derive(Deserialize)]
#[serde(untagged)]
enum CoefficientDoc {
    Real(f64),
    Complex([f64; 2]),
}

fn coefficient<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Complex, D::Error> {
    Ok(match CoefficientDoc::deserialize(d)? {
        CoefficientDoc::Real(r) => Complex::new(r, 0.0),
        CoefficientDoc::Complex([re, im]) => Complex::new(re, im),
    })
}

/// `c · χ_region`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Term {
    #[serde(deserialize_with = "coefficient")]
    pub coefficient: Complex,
    pub region: Region,
}

/// `f = Σ c_i χ_{R_i}` over pairwise disjoint bounded regions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SimpleFunctionDoc")]
pub struct SimpleFunction {
    terms: Vec<Term>,
}

#[derive(Deserialize)]
struct SimpleFunctionDoc {
    terms: Vec<Term>,
}

impl TryFrom<SimpleFunctionDoc> for SimpleFunction {
    type Error = FourierError;
    fn try_from(d: SimpleFunctionDoc) -> Result<Self, Self::Error> {
        SimpleFunction::new(d.terms)
    }
}

const DISJOINT_SAMPLES: usize = 1000;

impl SimpleFunction {
    /// Checks dimensions and, by sampling, that the regions do not overlap.
    pub fn new(terms: Vec<Term>) -> Result<Self, FourierError> {
        let Some(first) = terms.first() else {
            return Err(FourierError::InvalidGrid("simple function without terms".into()));
        };
        let n = first.region.dim();
        for t in &terms {
            crate::geometry::check_dim(n, t.region.dim())?;
            if !(t.coefficient.re.is_finite() && t.coefficient.im.is_finite()) {
                return Err(FourierError::InvalidGrid("non-finite coefficient".into()));
            }
        }
        if terms.len() > 1 {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for (i, a) in terms.iter().enumerate() {
                let off = a.region.offset();
                for _ in 0..DISJOINT_SAMPLES {
                    let x = a.region.base().sample(&mut rng) + &off;
                    if let Some(j) = (0..terms.len()).find(|&j| j != i && terms[j].region.contains(&x)) {
                        return Err(FourierError::OverlappingRegions(i.min(j), i.max(j)));
                    }
                }
            }
        }
        Ok(Self { terms })
    }

    /// `c · χ_region`.
    pub fn indicator(region: impl Into<Region>) -> Self {
        Self { terms: vec![Term { coefficient: Complex::new(1.0, 0.0), region: region.into() }] }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms[0].region.dim()
    }

    /// `c · f`.
    pub fn scaled(&self, c: Complex) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term { coefficient: t.coefficient * c, region: t.region.clone() })
                .collect(),
        }
    }

    /// `(Σ |c_i|^p v(R_i))^{1/p}`.
    pub fn lp_norm(&self, p: f64, v: &Weight, method: &VolumeMethod) -> Result<f64, FourierError> {
        let mut total = 0.0;
        for t in &self.terms {
            total += t.coefficient.norm().powf(p) * integrate(v, &t.region, method)?.value;
        }
        Ok(total.powf(1.0 / p))
    }

    /// `‖f‖₁`, an upper bound for `|f̂|`.
    pub fn l1_norm(&self, method: &VolumeMethod) -> Result<f64, FourierError> {
        self.lp_norm(1.0, &Weight::lebesgue(), method)
    }

    /// Smallest half-width of the regions' bounding boxes; sets the
    /// frequency scale of the transform.
    pub(crate) fn feature_size(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let (lo, hi) = t.region.base().bbox();
                (0..lo.len()).map(|j| 0.5 * (hi[j] - lo[j])).fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Axis-aligned evaluation box with cell-centered nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl GridSpec {
    /// `[−half_width, half_width]^n` with `resolution` cells per axis.
    pub fn centered(n: usize, half_width: f64, resolution: usize) -> Self {
        Self { lower: vec![-half_width; n], upper: vec![half_width; n], resolution: vec![resolution; n] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<(), FourierError> {
        let n = self.lower.len();
        if n == 0 || self.upper.len() != n || self.resolution.len() != n {
            return Err(FourierError::InvalidGrid("lower, upper and resolution differ in length".into()));
        }
        for j in 0..n {
            if !(self.lower[j].is_finite() && self.upper[j].is_finite() && self.lower[j] < self.upper[j]) {
                return Err(FourierError::InvalidGrid(format!("empty extent on axis {j}")));
            }
            if self.resolution[j] < MIN_GRID_RESOLUTION {
                return Err(FourierError::InvalidGrid(format!(
                    "resolution {} below {MIN_GRID_RESOLUTION}",
                    self.resolution[j]
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.resolution[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|j| self.spacing(j)).product()
    }

    /// Multi-index of flat index `k`, last axis fastest.
    pub fn index(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for j in (0..self.dim()).rev() {
            idx[j] = k % self.resolution[j];
            k /= self.resolution[j];
        }
        idx
    }

    /// Center of cell `k`.
    pub fn node(&self, k: usize) -> Vector {
        let idx = self.index(k);
        Vector::from_fn(self.dim(), |j, _| self.lower[j] + (idx[j] as f64 + 0.5) * self.spacing(j))
    }

    pub fn nodes(&self) -> Vec<Vector> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    /// Whether cell `k` lies in the outer shell of relative width `fraction`.
    pub fn in_shell(&self, k: usize, fraction: f64) -> bool {
        let z = self.node(k);
        (0..self.dim()).any(|j| {
            let mid = 0.5 * (self.lower[j] + self.upper[j]);
            let half = 0.5 * (self.upper[j] - self.lower[j]);
            (z[j] - mid).abs() >= half * (1.0 - fraction)
        })
    }
}

/// Samples of a transform on a [`GridSpec`], flat with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: GridSpec,
    pub samples: Vec<Complex>,
    /// Quadrature refinement levels used; zero when every term had a closed form.
    pub quadrature_levels: usize,
}

impl GridFunction {
    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Rows `z_1[, z_2], re, im, abs` for one- and two-dimensional grids.
    pub fn to_csv(&self) -> Result<String, FourierError> {
        let n = self.grid.dim();
        if n > 2 {
            return Err(FourierError::DimensionTooLarge(n));
        }
        let mut out = String::from(if n == 1 { "z1,re,im,abs\n" } else { "z1,z2,re,im,abs\n" });
        for (k, c) in self.samples.iter().enumerate() {
            let z = self.grid.node(k);
            for x in z.iter() {
                out.push_str(&format!("{x},"));
            }
            out.push_str(&format!("{},{},{}\n", c.re, c.im, c.norm()));
        }
        Ok(out)
    }
}

/// Quadrature order for terms without a closed-form transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Gauss–Legendre points per panel.
    pub points: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { points: 8 }
    }
}

/// Evaluation domain for the level-set and norm checks. Unset fields are
/// chosen from the function: a cube of half-width `k·π / r`, `r` the smallest
/// feature size, grown until the outer shell carries a negligible share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub half_width: Option<f64>,
    pub resolution: Option<usize>,
    /// Domain doublings allowed before giving up.
    pub max_expansions: usize,
    pub quadrature: QuadratureSpec,
    /// Budget and seed for Monte Carlo measures of the input regions.
    pub samples: usize,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_width: None, resolution: None, max_expansions: 4, quadrature: QuadratureSpec::default(), samples: 100_000, seed: 0 }
    }
}

impl GridConfig {
    pub(crate) fn initial(&self, f: &SimpleFunction, periods: f64) -> Result<GridSpec, FourierError> {
        let n = f.dim();
        let h = self.half_width.unwrap_or_else(|| periods * std::f64::consts::PI / f.feature_size());
        let res = self.resolution.unwrap_or(match n {
            1 => 8192,
            2 => 256,
            _ => 48,
        });
        let g = GridSpec::centered(n, h, res);
        g.validate()?;
        Ok(g)
    }

    pub(crate) fn method(&self) -> VolumeMethod {
        VolumeMethod::Auto { samples: self.samples, seed: self.seed }
    }
}

/// Doubles the domain, keeping the spacing while the node cap allows.
pub(crate) fn expand(g: &GridSpec) -> GridSpec {
    GridSpec {
        lower: g.lower.iter().map(|x| 2.0 * x).collect(),
        upper: g.upper.iter().map(|x| 2.0 * x).collect(),
        resolution: g.resolution.iter().map(|r| (2 * r).min(MAX_QUADRATURE_NODES.max(*r))).collect(),
    }
}

/// `∫_cell u` for every cell; exact or quadrature in one dimension and for
/// constants, midpoint values otherwise.
pub(crate) fn cell_masses(u: &Weight, grid: &GridSpec) -> Result<Vec<f64>, FourierError> {
    use rayon::prelude::*;
    let vol = grid.cell_volume();
    let n = grid.dim();
    if let Weight::Constant { value } = u {
        return Ok(vec![value * vol; grid.len()]);
    }
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let z = grid.node(k);
            if n == 1 {
                let h = 0.5 * grid.spacing(0);
                let cell = crate::weights::cube(&[z[0]], h)?;
                Ok(integrate(u, &cell, &VolumeMethod::Exact)?.value)
            } else {
                Ok(u.eval(&z) * vol)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Body;

    #[test]
    fn grid_nodes_are_cell_centers() {
        let g = GridSpec { lower: vec![0.0, -1.0], upper: vec![1.0, 1.0], resolution: vec![16, 32] };
        g.validate().unwrap();
        let z = g.node(33);
        assert!((z[0] - 1.5 / 16.0).abs() < 1e-15 && (z[1] - (-1.0 + 1.5 / 16.0)).abs() < 1e-15);
        assert!(g.in_shell(0, 0.05) && !g.in_shell(16 * 32 / 2 + 8, 0.05));
    }

    #[test]
    fn overlapping_terms_are_rejected() {
        let a = Term { coefficient: Complex::new(1.0, 0.0), region: Body::cube(1, 1.0).into() };
        let b = Term {
            coefficient: Complex::new(2.0, 0.0),
            region: Body::aligned_box(Vector::from_vec(vec![0.5]), Vector::from_vec(vec![1.0])).unwrap().into(),
        };
        assert_eq!(SimpleFunction::new(vec![a, b]).unwrap_err().name(), "OverlappingRegions");
    }

    #[test]
    fn coefficients_parse_as_real_or_pair() {
        let f: SimpleFunction = serde_json::from_str(
            r#"{"terms": [{"coefficient": 2.0, "region": {"variant": "box", "dim": 1, "half_extents": [1.0]}},
                          {"coefficient": [0.0, 1.0], "region": {"base": {"variant": "box", "dim": 1, "half_extents": [1.0]}, "mu": [0.0], "tau": [5.0]}}]}"#,
        )
        .unwrap();
        assert_eq!(f.terms()[1].coefficient, Complex::new(0.0, 1.0));
        assert!((f.l1_norm(&VolumeMethod::Exact).unwrap() - 6.0).abs() < 1e-15);
    }
}
