use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::optimize::{run, Eval, Objective, Outcome};
use super::param::mix_generators;
use super::{trend_fit, Candidate, Direction, SearchConfig, SearchError, SearchReport};
use crate::conditions::WeightPair;
use crate::geometry::{mahler_volume, polar_translated, Body, GeometryError, Region, Vector, VolumeMethod};
use crate::mc::derive_seed;
use crate::tolerances::DIVERGENCE_SLOPE;
use crate::weights::{integrate, Exponents, Weight, WeightError};

/// `u(E + μ)^{1/q} · w((E + μ)° + τ)^{1/p'}` with propagated error.
pub fn conjecture_functional(
    pair: &WeightPair,
    exps: &Exponents,
    body: &Body,
    mu: &Vector,
    tau: &Vector,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64), SearchError> {
    let (e, f) = polar_translated(body, mu, tau)?;
    let a = integrate(&pair.u, &Region::Translated(e), &VolumeMethod::Auto { samples, seed: derive_seed(seed, &[40]) })?;
    let b = integrate(&pair.w, &Region::Translated(f), &VolumeMethod::Auto { samples, seed: derive_seed(seed, &[41]) })?;
    let (x, y) = (1.0 / exps.q, 1.0 / exps.p_conj);
    let value = a.value.powf(x) * b.value.powf(y);
    let rel = |v: f64, e: f64| if v > 0.0 { e / v } else { 0.0 };
    Ok((value, value * (x * rel(a.value, a.abs_error) + y * rel(b.value, b.abs_error))))
}

/// Geometry failures mark a proposal infeasible; anything else is fatal.
fn feasible<T>(r: Result<T, SearchError>) -> Result<Option<T>, SearchError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(SearchError::Geometry(_)) | Err(SearchError::Weight(WeightError::Geometry(_))) => Ok(None),
        Err(e) => Err(e),
    }
}

struct Conjecture<'a> {
    pair: &'a WeightPair,
    exps: &'a Exponents,
    config: &'a SearchConfig,
}

impl Conjecture<'_> {
    fn decode(&self, theta: &[f64]) -> Result<Candidate, GeometryError> {
        let p = &self.config.parameterization;
        let n = p.dim();
        let (body, gens) = p.decode(&theta[..p.body_len()])?;
        let rest = &theta[p.body_len()..];
        let k = p.generator_count();
        let mu = if k > 0 && self.config.mu_fraction > 0.0 {
            mix_generators(&gens, &rest[..k + 1], &rest[k + 1..2 * k + 1], self.config.mu_fraction, n)
        } else {
            Vector::zeros(n)
        };
        let tau_raw = &rest[rest.len() - n..];
        let tau = Vector::from_iterator(n, tau_raw.iter().map(|t| self.config.tau_bound * t.tanh()));
        Ok(Candidate { body, mu: mu.iter().copied().collect(), tau: tau.iter().copied().collect() })
    }
}

impl Objective for Conjecture<'_> {
    fn prior(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let p = &self.config.parameterization;
        let mut t = p.prior(rng);
        let k = p.generator_count();
        t.extend((0..2 * k + 1 + p.dim()).map(|_| rng.sample::<f64, _>(StandardNormal)));
        t
    }

    fn eval(&self, theta: &[f64]) -> Result<Option<Eval>, SearchError> {
        let Some(c) = feasible(self.decode(theta).map_err(SearchError::from))? else { return Ok(None) };
        let r = conjecture_functional(
            self.pair,
            self.exps,
            &c.body,
            &Vector::from_vec(c.mu),
            &Vector::from_vec(c.tau),
            self.config.mc_samples,
            self.config.seed,
        );
        Ok(feasible(r)?.map(|(value, error)| Eval { value, error }))
    }
}

struct Mahler<'a> {
    config: &'a SearchConfig,
}

impl Objective for Mahler<'_> {
    fn prior(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.config.parameterization.prior(rng)
    }

    fn eval(&self, theta: &[f64]) -> Result<Option<Eval>, SearchError> {
        let decoded = self.config.parameterization.decode(theta).map_err(SearchError::from);
        let Some((body, _)) = feasible(decoded)? else { return Ok(None) };
        let method = VolumeMethod::Auto { samples: self.config.mc_samples, seed: self.config.seed };
        let r = mahler_volume(&body, &method).map_err(SearchError::from);
        Ok(feasible(r)?.map(|e| Eval { value: e.value, error: e.abs_error }))
    }
}

fn check_kernel(w: &Weight, n: usize) -> Result<(), SearchError> {
    match w.kernel(n) {
        Some((_, alpha)) if alpha <= -(n as f64) => Err(WeightError::NotLocallyIntegrable { alpha, dim: n }.into()),
        _ => Ok(()),
    }
}

fn report(objective: &str, direction: Direction, out: Outcome, best_config: Candidate) -> SearchReport {
    SearchReport {
        objective: objective.into(),
        direction,
        best_value: out.best.value,
        best_error: out.best.error,
        best_config,
        trajectory: out.trajectory,
        evaluations: out.evaluations,
        accepted: out.accepted,
        rejected: out.rejected,
        initial_temperature: out.t0,
        lower_bound_evidence: direction == Direction::Max,
        upper_bound_evidence: direction == Direction::Min,
        integrability: None,
    }
}

/// Maximizes the conjecture functional over the configured family, `−μ ∈ E`
/// and `|τᵢ| ≤ tau_bound`. The best value is a witnessed value, so it is
/// evidence for a lower bound on the supremum only.
pub fn conjecture_sup_search(
    pair: &WeightPair,
    exps: &Exponents,
    config: &SearchConfig,
) -> Result<SearchReport, SearchError> {
    config.validate()?;
    let n = config.parameterization.dim();
    pair.u.validate(n)?;
    pair.w.validate(n)?;
    check_kernel(&pair.u, n)?;
    check_kernel(&pair.w, n)?;
    let objective = Conjecture { pair, exps, config };
    let out = run(&objective, &config.optimizer, Direction::Max, config.seed)?;
    let best = objective.decode(&out.theta)?;
    let mut r = report("conjecture", Direction::Max, out, best);
    r.integrability = Some(Integrability {
        u: integrability_diagnostic(&pair.u, n, config.mc_samples, derive_seed(config.seed, &[50]))?,
        w: integrability_diagnostic(&pair.w, n, config.mc_samples, derive_seed(config.seed, &[51]))?,
    });
    Ok(r)
}

/// Minimizes or maximizes `|E||E°|` over the configured symmetric family in
/// dimension `n`.
pub fn mahler_search(n: usize, config: &SearchConfig, direction: Direction) -> Result<SearchReport, SearchError> {
    config.validate()?;
    if config.parameterization.dim() != n {
        return Err(SearchError::InvalidConfig(format!(
            "parameterization lives in dimension {}, requested {n}",
            config.parameterization.dim()
        )));
    }
    let objective = Mahler { config };
    let out = run(&objective, &config.optimizer, direction, config.seed)?;
    let (body, _) = config.parameterization.decode(&out.theta)?;
    let best = Candidate { body, mu: vec![0.0; n], tau: vec![0.0; n] };
    Ok(report("mahler", direction, out, best))
}

/// The functional along `k ↦ (kE, kμ, τ)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayPoint {
    pub scale: f64,
    pub value: f64,
    pub error: f64,
    /// `u(kE + kμ)^{1/q}`.
    pub u_part: f64,
    /// `w((kE + kμ)° + τ)^{1/p'}`.
    pub w_part: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayReport {
    pub points: Vec<RayPoint>,
    /// Values strictly decrease over the upper half of the scales.
    pub eventually_decreasing: bool,
}

/// Evaluates the functional over dilations of one configuration. Scales
/// must be increasing.
pub fn dilation_ray(
    pair: &WeightPair,
    exps: &Exponents,
    base: &Candidate,
    scales: &[f64],
    samples: usize,
    seed: u64,
) -> Result<RayReport, SearchError> {
    if scales.len() < 2 || scales.windows(2).any(|w| !(w[0] < w[1])) || scales[0] <= 0.0 {
        return Err(SearchError::InvalidConfig("dilation scales must be positive and increasing".into()));
    }
    let n = base.body.dim();
    check_kernel(&pair.w, n)?;
    let mu = Vector::from_row_slice(&base.mu);
    let tau = Vector::from_row_slice(&base.tau);
    let mut points = Vec::with_capacity(scales.len());
    for &k in scales {
        let body = base.body.scaled(k)?;
        let (e, f) = polar_translated(&body, &(&mu * k), &tau)?;
        let a = integrate(&pair.u, &Region::Translated(e), &VolumeMethod::Auto { samples, seed: derive_seed(seed, &[40]) })?;
        let b = integrate(&pair.w, &Region::Translated(f), &VolumeMethod::Auto { samples, seed: derive_seed(seed, &[41]) })?;
        let (x, y) = (1.0 / exps.q, 1.0 / exps.p_conj);
        let (u_part, w_part) = (a.value.powf(x), b.value.powf(y));
        let rel = |v: f64, e: f64| if v > 0.0 { e / v } else { 0.0 };
        let value = u_part * w_part;
        let error = value * (x * rel(a.value, a.abs_error) + y * rel(b.value, b.abs_error));
        points.push(RayPoint { scale: k, value, error, u_part, w_part });
    }
    let tail = &points[points.len() / 2..];
    let eventually_decreasing = tail.len() >= 2 && tail.windows(2).all(|w| w[1].value < w[0].value);
    Ok(RayReport { points, eventually_decreasing })
}

/// Growth of `u([−R, R]^n)` over `R = 2⁰, …, 2^{12}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegrabilityDiagnostic {
    pub radii: Vec<f64>,
    pub masses: Vec<f64>,
    /// Log-log slope over the largest half of the radii.
    pub tail_slope: f64,
    /// The mass has leveled off: `tail_slope` below the divergence threshold.
    pub looks_integrable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Integrability {
    pub u: IntegrabilityDiagnostic,
    pub w: IntegrabilityDiagnostic,
}

/// Heuristic check of `u ∈ L¹`; weights near the boundary of integrability
/// need interpretation by the caller.
pub fn integrability_diagnostic(
    u: &Weight,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<IntegrabilityDiagnostic, SearchError> {
    let radii: Vec<f64> = (0..=12).map(|k| 2f64.powi(k)).collect();
    let mut masses = Vec::with_capacity(radii.len());
    for (i, &r) in radii.iter().enumerate() {
        let method = VolumeMethod::Auto { samples, seed: derive_seed(seed, &[i as u64]) };
        masses.push(integrate(u, &Region::Body(Body::cube(n, r)), &method)?.value);
    }
    let tail: Vec<(f64, f64)> = radii.iter().zip(&masses).skip(radii.len() / 2).map(|(r, m)| (*r, *m)).collect();
    let tail_slope = if tail.iter().all(|p| p.1 > 0.0) { trend_fit(&tail)?.slope } else { 0.0 };
    Ok(IntegrabilityDiagnostic { radii, masses, tail_slope, looks_integrable: tail_slope < DIVERGENCE_SLOPE })
}
