use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{MeasureEstimate, Weight, WeightError};
use crate::geometry::{exact_volume, unit_ball_volume, Body, Estimate, EstimateMethod, Region, Vector, VolumeMethod};
use crate::mc::mean_estimate;
use crate::tolerances::{MAX_MC_DIM, MIN_MC_SAMPLES};

/// Absolute target error for one-dimensional adaptive quadrature, relative to the interval length.
const QUAD_TOL: f64 = 1e-11;

/// `∫_a^b |x − p|^α dx`.
pub fn power_interval(p: f64, alpha: f64, a: f64, b: f64) -> Result<f64, WeightError> {
    if b <= a {
        return Ok(0.0);
    }
    if alpha == 0.0 {
        return Ok(b - a);
    }
    let (s, t) = (a - p, b - p);
    let touches = s <= 0.0 && t >= 0.0;
    if alpha <= -1.0 {
        if touches {
            return Err(WeightError::NonIntegrableSingularity);
        }
        if alpha == -1.0 {
            return Ok((t.abs().ln() - s.abs().ln()).abs());
        }
    }
    let beta = alpha + 1.0;
    let f = |x: f64| x.signum() * x.abs().powf(beta) / beta;
    Ok(f(t) - f(s))
}

/// Draws from the density `∝ |x − p|^α` on `[a, b]`, `α > −1`.
fn sample_power(p: f64, alpha: f64, a: f64, b: f64, u: f64) -> f64 {
    let beta = alpha + 1.0;
    let f = |x: f64| x.signum() * x.abs().powf(beta) / beta;
    let (fa, fb) = (f(a - p), f(b - p));
    let s = fa + u * (fb - fa);
    let t = s.signum() * (s.abs() * beta).powf(1.0 / beta);
    (p + t).clamp(a, b)
}

fn is_identity(m: &crate::geometry::Matrix) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| m[(i, j)] == if i == j { 1.0 } else { 0.0 }))
}

/// Centered ball radius when the region is a Euclidean ball around `center`.
fn ball_radius(region: &Region, center: &Vector) -> Option<f64> {
    let Body::Ellipsoid(e) = region.base() else { return None };
    let c = e.center() + region.offset();
    if (c - center).amax() > 1e-12 {
        return None;
    }
    let a = e.shape();
    let s = a[(0, 0)];
    let n = a.nrows();
    let round = (0..n).all(|i| (0..n).all(|j| (a[(i, j)] - if i == j { s } else { 0.0 }).abs() <= 1e-12 * s));
    round.then(|| 1.0 / s.sqrt())
}

fn singularity_check(u: &Weight, region: &Region) -> Result<(), WeightError> {
    let n = region.dim();
    let (lo, hi) = region.bbox();
    if let Some(s) = u.separable(n) {
        for i in 0..n {
            if s.alphas[i] <= -1.0 && s.center[i] >= lo[i] && s.center[i] <= hi[i] {
                return Err(WeightError::NonIntegrableSingularity);
            }
        }
        return Ok(());
    }
    if let Some((p, alpha)) = u.kernel(n) {
        if alpha <= -(n as f64) && region.contains(&p) {
            return Err(WeightError::NonIntegrableSingularity);
        }
    }
    Ok(())
}

fn exact(u: &Weight, region: &Region) -> Result<Option<f64>, WeightError> {
    let n = region.dim();
    if let Some(r) = u.radial(n) {
        if r.alpha == 0.0 || r.c == 0.0 {
            if let Some(v) = exact_volume(region.base()) {
                return Ok(Some(r.c * v));
            }
        } else if let Some(radius) = ball_radius(region, &r.center) {
            let d = n as f64 + r.alpha;
            return Ok(Some(r.c * n as f64 * unit_ball_volume(n) * radius.powf(d) / d));
        }
    }
    let aligned = n == 1 || matches!(region.base(), Body::Box(b) if is_identity(b.rotation()));
    if aligned {
        if let Some(s) = u.separable(n) {
            let (lo, hi) = region.bbox();
            let mut total = s.c;
            for i in 0..n {
                total *= power_interval(s.center[i], s.alphas[i], lo[i], hi[i])?;
            }
            return Ok(Some(total));
        }
    }
    Ok(None)
}

fn quadrature_1d(u: &Weight, a: f64, b: f64) -> Result<MeasureEstimate, WeightError> {
    let mut cuts: Vec<f64> = u.breakpoints(0).into_iter().filter(|x| *x > a && *x < b).collect();
    if let Some((p, _)) = u.kernel(1) {
        if p[0] > a && p[0] < b {
            cuts.push(p[0]);
        }
    }
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let tol = QUAD_TOL * (b - a).max(1.0);
    let mut value = 0.0;
    let mut err = 0.0;
    for w in cuts.windows(2) {
        let out = quadrature::integrate(|t| u.eval(&Vector::from_element(1, t)), w[0], w[1], tol);
        value += out.integral;
        err += out.error_estimate.abs();
    }
    if !value.is_finite() {
        return Err(WeightError::NonIntegrableSingularity);
    }
    Ok(Estimate { value, abs_error: err, method: EstimateMethod::Quadrature })
}

/// Monte Carlo with an importance density matched to the weight's singular factor.
fn monte_carlo(u: &Weight, region: &Region, samples: usize, seed: u64) -> Result<MeasureEstimate, WeightError> {
    let n = region.dim();
    if samples < MIN_MC_SAMPLES {
        return Err(crate::geometry::GeometryError::SampleBudgetTooSmall(samples).into());
    }
    if n > MAX_MC_DIM {
        return Err(crate::geometry::GeometryError::DimensionTooLarge(n).into());
    }
    let (lo, hi) = region.bbox();
    let side: Vec<f64> = (0..n).map(|i| hi[i] - lo[i]).collect();
    let bbox_volume: f64 = side.iter().product();

    let (mean, err) = if let Some(s) = u.separable(n) {
        let mut norm = s.c;
        let mut powered = vec![false; n];
        for i in 0..n {
            if s.alphas[i] != 0.0 && s.alphas[i] > -1.0 {
                norm *= power_interval(s.center[i], s.alphas[i], lo[i], hi[i])?;
                powered[i] = true;
            } else {
                norm *= side[i];
            }
        }
        let (m, e) = mean_estimate(samples, seed, |rng: &mut ChaCha8Rng| {
            let mut factor = 1.0;
            let x = Vector::from_fn(n, |i, _| {
                if powered[i] {
                    sample_power(s.center[i], s.alphas[i], lo[i], hi[i], rng.gen())
                } else {
                    let t = rng.gen_range(lo[i]..=hi[i]);
                    if s.alphas[i] != 0.0 {
                        factor *= (t - s.center[i]).abs().powf(s.alphas[i]);
                    }
                    t
                }
            });
            if region.contains(&x) {
                factor
            } else {
                0.0
            }
        });
        (m * norm, e * norm)
    } else if let Some((p, alpha)) = u.kernel(n).filter(|(p, a)| {
        let d = n as f64 + a;
        let dist = (0..n).map(|i| (lo[i] - p[i]).max(p[i] - hi[i]).max(0.0).powi(2)).sum::<f64>().sqrt();
        let diam = side.iter().map(|s| s * s).sum::<f64>().sqrt();
        d > 0.0 && dist <= diam
    }) {
        let d = n as f64 + alpha;
        let radius = (0..1usize << n)
            .map(|corner| {
                (0..n)
                    .map(|i| {
                        let c = if corner >> i & 1 == 1 { hi[i] } else { lo[i] };
                        (c - p[i]).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        let norm = n as f64 * unit_ball_volume(n) * radius.powf(d) / d;
        let (m, e) = mean_estimate(samples, seed, |rng: &mut ChaCha8Rng| {
            let dir = crate::geometry::sample_sphere(n, rng);
            let r = radius * rng.gen::<f64>().powf(1.0 / d);
            let x = &p + dir * r;
            if r > 0.0 && region.contains(&x) {
                u.eval(&x) / r.powf(alpha)
            } else {
                0.0
            }
        });
        (m * norm, e * norm)
    } else {
        let (m, e) = mean_estimate(samples, seed, |rng: &mut ChaCha8Rng| {
            let x = Vector::from_fn(n, |i, _| rng.gen_range(lo[i]..=hi[i]));
            if region.contains(&x) {
                u.eval(&x)
            } else {
                0.0
            }
        });
        (m * bbox_volume, e * bbox_volume)
    };
    if !(mean.is_finite() && err.is_finite()) {
        return Err(WeightError::NonIntegrableSingularity);
    }
    Ok(Estimate { value: mean, abs_error: err, method: EstimateMethod::MonteCarlo { samples, seed } })
}

/// `u(E) = ∫_E u`.
///
/// Closed forms are used for power-type weights over centered balls and
/// axis-aligned boxes and for constants over bodies with exact volume; in one
/// dimension everything else goes to adaptive tanh-sinh quadrature split at the
/// weight's breakpoints. The remaining cases use importance-sampled Monte Carlo.
pub fn integrate(u: &Weight, region: &Region, method: &VolumeMethod) -> Result<MeasureEstimate, WeightError> {
    let n = region.dim();
    u.validate_lenient(n)?;
    singularity_check(u, region)?;
    let deterministic = || -> Result<Option<MeasureEstimate>, WeightError> {
        if let Some(v) = exact(u, region)? {
            return Ok(Some(Estimate::exact(v)));
        }
        if n == 1 {
            let (lo, hi) = region.bbox();
            return quadrature_1d(u, lo[0], hi[0]).map(Some);
        }
        Ok(None)
    };
    match *method {
        VolumeMethod::Exact => deterministic()?.ok_or(WeightError::NoExactForm),
        VolumeMethod::MonteCarlo { samples, seed } => monte_carlo(u, region, samples, seed),
        VolumeMethod::Auto { samples, seed } => match deterministic()? {
            Some(e) => Ok(e),
            None => monte_carlo(u, region, samples, seed),
        },
    }
}

/// [`integrate`] over a plain body.
pub fn integrate_body(u: &Weight, body: &Body, method: &VolumeMethod) -> Result<MeasureEstimate, WeightError> {
    integrate(u, &Region::Body(body.clone()), method)
}
