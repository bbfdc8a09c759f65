use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    cell_masses, expand, fourier_transform, transform_points, FourierError, GridConfig, GridFunction, GridSpec,
    SimpleFunction,
};
use crate::conditions::WeightPair;
use crate::geometry::{polar, Body, Region, Vector};
use crate::tolerances::{LOWER_BOUND_MARGIN, SHELL_FRACTION, SHELL_SHARE};
use crate::weights::{integrate, Exponents, Weight};

/// Frequency domain half-width, in units of `π / feature size`, for level sets.
const LEVEL_SET_PERIODS: f64 = 16.0;
/// Same for the norm checks, whose tails decay more slowly.
const NORM_PERIODS: f64 = 32.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    /// `min |χ̂_E(z)| / (cos(1)|E|)` over the sampled `z ∈ E°`.
    pub min_ratio: f64,
    pub witness: Vec<f64>,
    pub passed: bool,
    pub samples: usize,
}

/// Samples `z` uniformly from `E°` and checks `|χ̂_E(z)| ≥ cos(1)|E|`.
pub fn lower_bound_check(
    e: &Body,
    samples: usize,
    seed: u64,
    config: &GridConfig,
) -> Result<LowerBoundReport, FourierError> {
    if samples == 0 {
        return Err(FourierError::InvalidGrid("no sample points".into()));
    }
    let dual = polar(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zs: Vec<Vector> = (0..samples).map(|_| dual.sample(&mut rng)).collect();
    let f = SimpleFunction::indicator(e.clone());
    let volume = f.l1_norm(&config.method())?;
    let (vals, _) = transform_points(&f, &zs, &config.quadrature)?;
    let (k, min) = vals
        .iter()
        .map(|c| c.norm() / (1f64.cos() * volume))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    Ok(LowerBoundReport {
        min_ratio: min,
        witness: zs[k].iter().copied().collect(),
        passed: min >= 1.0 - LOWER_BOUND_MARGIN,
        samples,
    })
}

/// Level grid and domain for [`restricted_weak_type`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevelSetConfig {
    /// Number of geometric levels from `‖χ_A‖₁` down to `floor · ‖χ_A‖₁`.
    pub levels: usize,
    pub floor: f64,
    pub grid: GridConfig,
}

impl Default for LevelSetConfig {
    fn default() -> Self {
        Self { levels: 64, floor: 1.0 / 32.0, grid: GridConfig::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelSetReport {
    pub alphas: Vec<f64>,
    /// `u(E_α)` inside the evaluation domain, for each level.
    pub measures: Vec<f64>,
    /// `sup_α α u(E_α)^{1/q}` over all `α ≥ floor · ‖χ_A‖₁`, taken exactly over
    /// the values of `|χ̂_A|` on the grid.
    pub sup_quantity: f64,
    /// The level attaining `sup_quantity`.
    pub sup_alpha: f64,
    /// The same supremum restricted to the level grid.
    pub grid_sup: f64,
    pub v_measure: f64,
    /// `sup_quantity / v(A)^{1/p}`.
    pub ratio: f64,
    pub grid: GridSpec,
    pub shell_share: f64,
    pub quadrature_levels: usize,
}

fn shell_part(g: &GridFunction, mass: &[f64], f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut total = 0.0;
    let mut shell = 0.0;
    for (k, c) in g.samples.iter().enumerate() {
        let x = f(c.norm()) * mass[k];
        total += x;
        if g.grid.in_shell(k, SHELL_FRACTION) {
            shell += x;
        }
    }
    (total, shell)
}

/// Transforms `f` on a grid grown until `share(ĝ, masses)` drops below the
/// shell threshold.
fn converged_grid(
    f: &SimpleFunction,
    u: &Weight,
    config: &GridConfig,
    periods: f64,
    share: impl Fn(&GridFunction, &[f64]) -> f64,
) -> Result<(GridFunction, Vec<f64>, f64), FourierError> {
    let mut grid = config.initial(f, periods)?;
    let mut expansions = 0;
    loop {
        let g = fourier_transform(f, &grid, &config.quadrature)?;
        let mass = cell_masses(u, &grid)?;
        let s = share(&g, &mass);
        if s < SHELL_SHARE {
            return Ok((g, mass, s));
        }
        if expansions >= config.max_expansions {
            return Err(FourierError::GridDomainTooSmall { share: s });
        }
        log::debug!("expanding frequency grid, shell share {s:.3e}");
        grid = expand(&grid);
        expansions += 1;
    }
}

/// Level sets `E_α = {|χ̂_A| > α}` measured by `u`, the weak-type quantity
/// `sup_α α u(E_α)^{1/q}` and its ratio to `v(A)^{1/p}`.
pub fn restricted_weak_type(
    pair: &WeightPair,
    exps: &Exponents,
    a: &Region,
    config: &LevelSetConfig,
) -> Result<LevelSetReport, FourierError> {
    if config.levels < 2 || !(config.floor > 0.0 && config.floor < 1.0) {
        return Err(FourierError::InvalidGrid("need at least two levels and a floor in (0, 1)".into()));
    }
    let f = SimpleFunction::indicator(a.clone());
    let norm = f.l1_norm(&config.grid.method())?;
    let alpha_min = norm * config.floor;
    let (g, mass, shell_share) = converged_grid(&f, &pair.u, &config.grid, LEVEL_SET_PERIODS, |g, m| {
        let (t, s) = shell_part(g, m, |x| if x > alpha_min { 1.0 } else { 0.0 });
        if t > 0.0 {
            s / t
        } else {
            0.0
        }
    })?;
    let alphas: Vec<f64> = (0..config.levels)
        .map(|k| norm * config.floor.powf(k as f64 / (config.levels - 1) as f64))
        .collect();
    let measures: Vec<f64> = alphas
        .iter()
        .map(|&al| g.samples.iter().zip(&mass).filter(|(c, _)| c.norm() > al).map(|(_, m)| m).sum())
        .collect();
    let iq = 1.0 / exps.q;
    let grid_sup = alphas.iter().zip(&measures).map(|(a, m)| a * m.powf(iq)).fold(0.0, f64::max);
    let mut order: Vec<(f64, f64)> = g
        .samples
        .iter()
        .zip(&mass)
        .map(|(c, m)| (c.norm(), *m))
        .filter(|(x, _)| *x >= alpha_min)
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut sup, mut sup_alpha, mut cum) = (0.0, norm, 0.0);
    for (i, &(x, m)) in order.iter().enumerate() {
        cum += m;
        let last_of_tie = order.get(i + 1).is_none_or(|n| n.0 < x);
        if last_of_tie && x * cum.powf(iq) > sup {
            sup = x * cum.powf(iq);
            sup_alpha = x;
        }
    }
    let v_measure = integrate(&pair.v, a, &config.grid.method())?.value;
    if v_measure <= 0.0 {
        return Err(FourierError::ZeroDenominator);
    }
    Ok(LevelSetReport {
        alphas,
        measures,
        sup_quantity: sup,
        sup_alpha,
        grid_sup,
        v_measure,
        ratio: sup / v_measure.powf(1.0 / exps.p),
        grid: g.grid,
        shell_share,
        quadrature_levels: g.quadrature_levels,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RwtSweepReport {
    pub scales: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `max/min − 1` over the sweep.
    pub variation: f64,
}

/// [`restricted_weak_type`] for the dilates `kA`.
pub fn rwt_sweep(
    pair: &WeightPair,
    exps: &Exponents,
    a: &Body,
    scales: &[f64],
    config: &LevelSetConfig,
) -> Result<RwtSweepReport, FourierError> {
    if scales.is_empty() {
        return Err(FourierError::InvalidGrid("empty dilation sweep".into()));
    }
    let mut ratios = Vec::with_capacity(scales.len());
    for &k in scales {
        let r = restricted_weak_type(pair, exps, &a.scaled(k)?.into(), config)?;
        ratios.push(r.ratio);
    }
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RwtSweepReport { scales: scales.to_vec(), ratios, variation: max / min - 1.0 })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrongTypeRow {
    /// `(∫ |f̂|^q u)^{1/q}` over the evaluation domain.
    pub lhs: f64,
    /// `(∫ |f|^p v)^{1/p}`.
    pub rhs: f64,
    pub ratio: f64,
    pub grid: GridSpec,
    pub shell_share: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrongTypeReport {
    pub max_ratio: f64,
    pub rows: Vec<StrongTypeRow>,
}

fn transform_norm(
    f: &SimpleFunction,
    u: &Weight,
    q: f64,
    config: &GridConfig,
) -> Result<(f64, GridSpec, f64), FourierError> {
    let (g, mass, share) = converged_grid(f, u, config, NORM_PERIODS, |g, m| {
        let (t, s) = shell_part(g, m, |x| x.powf(q));
        if t > 0.0 {
            s / t
        } else {
            0.0
        }
    })?;
    let (total, _) = shell_part(&g, &mass, |x| x.powf(q));
    Ok((total.powf(1.0 / q), g.grid, share))
}

/// `(∫ |f̂|^q u)^{1/q} / (∫ |f|^p v)^{1/p}` for each test function.
pub fn strong_type_ratio(
    pair: &WeightPair,
    exps: &Exponents,
    functions: &[SimpleFunction],
    config: &GridConfig,
) -> Result<StrongTypeReport, FourierError> {
    if functions.is_empty() {
        return Err(FourierError::InvalidGrid("no test functions".into()));
    }
    let mut rows = Vec::with_capacity(functions.len());
    for f in functions {
        let rhs = f.lp_norm(exps.p, &pair.v, &config.method())?;
        if !(rhs > 0.0) {
            return Err(FourierError::ZeroDenominator);
        }
        let (lhs, grid, shell_share) = transform_norm(f, &pair.u, exps.q, config)?;
        rows.push(StrongTypeRow { lhs, rhs, ratio: lhs / rhs, grid, shell_share });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(StrongTypeReport { max_ratio, rows })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HausdorffYoungReport {
    pub p: f64,
    /// `‖f̂‖_{p'}` over the evaluation domain.
    pub lhs: f64,
    /// `‖f‖_p`.
    pub rhs_without_constant: f64,
    pub ratio: f64,
    pub grid: GridSpec,
}

/// `‖f̂‖_{p'} / ‖f‖_p` for `1 < p ≤ 2`.
pub fn hausdorff_young_check(
    f: &SimpleFunction,
    p: f64,
    config: &GridConfig,
) -> Result<HausdorffYoungReport, FourierError> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(FourierError::ExponentOutOfRange(p));
    }
    let p_conj = p / (p - 1.0);
    let one = Weight::lebesgue();
    let rhs = f.lp_norm(p, &one, &config.method())?;
    if !(rhs > 0.0) {
        return Err(FourierError::ZeroDenominator);
    }
    let (lhs, grid, _) = transform_norm(f, &one, p_conj, config)?;
    Ok(HausdorffYoungReport { p, lhs, rhs_without_constant: rhs, ratio: lhs / rhs, grid })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_lower_bound_at_the_polar_boundary() {
        let r = lower_bound_check(&Body::cube(1, 1.0), 200, 1, &GridConfig::default()).unwrap();
        assert!(r.passed);
        assert!(r.min_ratio >= 1f64.tan() - 1e-2);
    }

    #[test]
    fn hausdorff_young_rejects_large_p() {
        let f = SimpleFunction::indicator(Body::cube(1, 1.0));
        assert_eq!(hausdorff_young_check(&f, 2.5, &GridConfig::default()).unwrap_err().name(), "ExponentOutOfRange");
    }
}
