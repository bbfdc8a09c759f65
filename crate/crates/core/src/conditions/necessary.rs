use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{
    check_dual_integrability, per_scale_max, trend_verdict, ConditionError, ConditionReport, Family, Sampling,
    WeightPair, Witness,
};
use crate::geometry::{polar_of_shifted, random_rotation, translate, Body, Estimate, Matrix, Region, Vector, VolumeMethod};
use crate::weights::{integrate, Exponents, Weight};

/// One sampled body `B` at a scale, with the offsets `d` (`−d ∈ B`) whose
/// polars `(B + d)°` are paired with it.
struct Shape {
    scale_idx: usize,
    scale: f64,
    body: Body,
    polars: Vec<(Vector, Body)>,
}

/// Every set of a sweep: the translates `E = B + c` and `F = (B + d)° + τ`.
struct Sweep {
    n: usize,
    shapes: Vec<Shape>,
    centers: Vec<Vec<Vector>>,
    taus: Vec<Vec<Vector>>,
    seed: u64,
    samples: usize,
}

/// Index of one `(shape, center, offset, translation)` configuration.
#[derive(Clone, Copy)]
struct Config {
    shape: usize,
    center: usize,
    offset: usize,
    tau: usize,
}

fn sampling_dim(pair: &WeightPair, sampling: &Sampling) -> usize {
    [&pair.u, &pair.v, &pair.w]
        .iter()
        .find_map(|w| w.dim_hint())
        .unwrap_or(sampling.dim)
}

fn log_normal_axes(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| (0.5 * rng.sample::<f64, _>(StandardNormal)).exp()).collect();
    let gm = raw.iter().map(|a| a.ln()).sum::<f64>() / n as f64;
    raw.iter().map(|a| scale * a / gm.exp()).collect()
}

/// Shape `k` of `family` at linear size `scale`. Shape zero is the cube
/// `[−L, L]^n` (the ball of radius `L` for ellipsoids); others are random with
/// geometric-mean half-width `L`.
fn shape_body(family: Family, n: usize, scale: f64, k: usize, seed: u64) -> Result<Body, ConditionError> {
    if k == 0 {
        return Ok(match family {
            Family::Ellipsoids => Body::ball(n, scale),
            _ => Body::cube(n, scale),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match family {
        Family::Cubes => Body::cube(n, scale),
        Family::Rectanguloids => {
            let axes = log_normal_axes(&mut rng, n, scale);
            let rot = random_rotation(n, &mut rng);
            Body::rotated_box(Vector::zeros(n), Vector::from_vec(axes), rot)?
        }
        Family::Ellipsoids => {
            let axes = log_normal_axes(&mut rng, n, scale);
            let rot = random_rotation(n, &mut rng);
            let diag = Matrix::from_diagonal(&Vector::from_iterator(n, axes.iter().map(|a| a.powi(-2))));
            Body::ellipsoid(Vector::zeros(n), &rot * diag * rot.transpose())?
        }
        Family::SymPolytopes => {
            let m = n + 1 + k % n.max(1);
            loop {
                let gens: Vec<Vector> =
                    (0..m).map(|_| Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))).collect();
                let Ok(body) = Body::sym_polytope(gens) else { continue };
                let (_, hi) = body.bbox();
                let gm = (hi.iter().map(|h| h.ln()).sum::<f64>() / n as f64).exp();
                break body.scaled(scale / gm)?;
            }
        }
    })
}

fn uniform_box(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.gen_range(-half..=half))
}

impl Sweep {
    fn build(family: Family, n: usize, sampling: &Sampling) -> Result<Self, ConditionError> {
        let shapes_per = if family == Family::Cubes { 1 } else { sampling.shapes_per_scale.max(1) };
        let offsets_per = if family == Family::Ellipsoids { 1 } else { sampling.offsets_per_center.max(1) };
        if sampling.scales.is_empty() || sampling.centers_per_scale == 0 || sampling.translations_per_scale == 0 {
            return Err(ConditionError::EmptySampling("no scales, centers or translations".into()));
        }
        if let Some(bad) = sampling.scales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(ConditionError::EmptySampling(format!("scale {bad} is not positive")));
        }
        let seed = sampling.seed;
        let width = sampling.translation_width;
        let mut shapes = Vec::new();
        let mut centers = Vec::new();
        let mut taus = Vec::new();
        for (s, &scale) in sampling.scales.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, &[1, s as u64]));
            centers.push(
                (0..sampling.centers_per_scale)
                    .map(|j| if j == 0 { Vector::zeros(n) } else { uniform_box(&mut rng, n, width * scale) })
                    .collect(),
            );
            let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, &[3, s as u64]));
            taus.push(
                (0..sampling.translations_per_scale)
                    .map(|t| if t == 0 { Vector::zeros(n) } else { uniform_box(&mut rng, n, width / scale) })
                    .collect(),
            );
            for k in 0..shapes_per {
                let body = shape_body(family, n, scale, k, crate::derive_seed(seed, &[0, s as u64, k as u64]))?;
                let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, &[2, s as u64, k as u64]));
                let polars = (0..offsets_per)
                    .map(|m| {
                        let d = if m == 0 { Vector::zeros(n) } else { -body.sample(&mut rng) };
                        let p = polar_of_shifted(&body, &d)?;
                        Ok((d, p))
                    })
                    .collect::<Result<Vec<_>, ConditionError>>()?;
                shapes.push(Shape { scale_idx: s, scale, body, polars });
            }
        }
        Ok(Self { n, shapes, centers, taus, seed, samples: sampling.mc_samples })
    }

    fn configs(&self) -> Vec<Config> {
        let mut out = Vec::new();
        for (k, sh) in self.shapes.iter().enumerate() {
            for j in 0..self.centers[sh.scale_idx].len() {
                for m in 0..sh.polars.len() {
                    for t in 0..self.taus[sh.scale_idx].len() {
                        out.push(Config { shape: k, center: j, offset: m, tau: t });
                    }
                }
            }
        }
        out
    }

    fn e_region(&self, c: &Config) -> Result<Region, ConditionError> {
        let sh = &self.shapes[c.shape];
        Ok(translate(&sh.body, &self.centers[sh.scale_idx][c.center])?.into())
    }

    fn f_region(&self, c: &Config) -> Result<Region, ConditionError> {
        let sh = &self.shapes[c.shape];
        Ok(translate(&sh.polars[c.offset].1, &self.taus[sh.scale_idx][c.tau])?.into())
    }

    /// `weight(E)` for every configuration; integrals depend only on the set and
    /// the `which` tag, so equal sets across checks get equal estimates.
    fn measure_e(&self, weight: &Weight, which: u64, configs: &[Config]) -> Result<Vec<Estimate>, ConditionError> {
        configs
            .par_iter()
            .map(|c| {
                let sh = &self.shapes[c.shape];
                let seed = crate::derive_seed(self.seed, &[10 + which, sh.scale_idx as u64, c.shape as u64, c.center as u64]);
                let method = VolumeMethod::Auto { samples: self.samples, seed };
                Ok(integrate(weight, &self.e_region(c)?, &method)?)
            })
            .collect()
    }

    fn measure_f(&self, weight: &Weight, which: u64, configs: &[Config]) -> Result<Vec<Estimate>, ConditionError> {
        configs
            .par_iter()
            .map(|c| {
                let sh = &self.shapes[c.shape];
                let seed = crate::derive_seed(
                    self.seed,
                    &[20 + which, sh.scale_idx as u64, c.shape as u64, c.offset as u64, c.tau as u64],
                );
                let method = VolumeMethod::Auto { samples: self.samples, seed };
                Ok(integrate(weight, &self.f_region(c)?, &method)?)
            })
            .collect()
    }

    fn witness(&self, product: &str, c: &Config) -> Witness {
        let sh = &self.shapes[c.shape];
        let center = &self.centers[sh.scale_idx][c.center];
        let d = &sh.polars[c.offset].0;
        Witness {
            product: product.into(),
            scale: sh.scale,
            body: sh.body.clone(),
            center: center.iter().copied().collect(),
            mu: (d - center).iter().copied().collect(),
            tau: self.taus[sh.scale_idx][c.tau].iter().copied().collect(),
        }
    }

    /// `max u(√n B) / u(B)` over the sampled shapes.
    fn dilation(&self, weight: &Weight) -> Result<f64, ConditionError> {
        let k = (self.n as f64).sqrt();
        let ratios = self
            .shapes
            .par_iter()
            .enumerate()
            .map(|(i, sh)| {
                let seed = crate::derive_seed(self.seed, &[30, i as u64]);
                dilation_ratio(weight, &sh.body, k, self.samples, seed)
            })
            .collect::<Result<Vec<f64>, ConditionError>>()?;
        Ok(ratios.into_iter().fold(0.0, f64::max))
    }
}

/// `u(kB) / u(B)` for a body `B` about the origin.
pub fn dilation_ratio(u: &Weight, body: &Body, k: f64, samples: usize, seed: u64) -> Result<f64, ConditionError> {
    let inner = integrate(u, &body.clone().into(), &VolumeMethod::Auto { samples, seed })?.value;
    let method = VolumeMethod::Auto { samples, seed: crate::derive_seed(seed, &[1]) };
    let outer = integrate(u, &body.scaled(k)?.into(), &method)?.value;
    Ok(outer / inner)
}

/// `a^x · b^y` with first-order propagated error.
fn product(a: &Estimate, x: f64, b: &Estimate, y: f64) -> (f64, f64) {
    let value = a.value.powf(x) * b.value.powf(y);
    let rel = |e: &Estimate| if e.value > 0.0 { e.abs_error / e.value } else { 0.0 };
    (value, value * (x.abs() * rel(a) + y.abs() * rel(b)))
}

/// Two families of products over the same configurations, each keyed by its own scale.
struct Products<'a> {
    labels: [&'a str; 2],
    values: [Vec<(f64, f64)>; 2],
    keys: [Vec<f64>; 2],
}

fn assemble(
    class: String,
    family: Family,
    sweep: &Sweep,
    configs: &[Config],
    prods: Products<'_>,
    sampling: &Sampling,
    dilation: (f64, f64),
) -> ConditionReport {
    let mut best = (f64::NEG_INFINITY, 0.0, 0usize, 0usize);
    let mut keyed = Vec::new();
    for side in 0..2 {
        for (i, &(v, e)) in prods.values[side].iter().enumerate() {
            keyed.push((prods.keys[side][i], v));
            if v > best.0 {
                best = (v, e, side, i);
            }
        }
    }
    let trend = per_scale_max(keyed);
    let (verdict, analysis) = trend_verdict(&trend, best.0, &sampling.thresholds);
    ConditionReport {
        class,
        family,
        sup_estimate: best.0,
        sup_error: best.1,
        witness: sweep.witness(prods.labels[best.2], &configs[best.3]),
        trend,
        analysis,
        verdict,
        dilation_ratio_u: dilation.0,
        dilation_ratio_w: dilation.1,
        evaluations: 2 * configs.len(),
    }
}

fn class_name(family: Family) -> &'static str {
    match family {
        Family::Cubes => "N_Q",
        Family::Rectanguloids => "N_R",
        Family::Ellipsoids => "N_S",
        Family::SymPolytopes => "N",
    }
}

/// Sampled supremum of `u(F)^{1/q} w(E)^{1/p'}` and of the interchanged
/// `u(E)^{1/q} w(F)^{1/p'}`, where `E = B + c` and `F = (B + d)° + τ` run over
/// the family at every scale.
///
/// The trend is keyed by the linear size of the set carrying `w`: `L` for the
/// first product and `1/L` for the second.
pub fn check_condition(
    pair: &WeightPair,
    exps: &Exponents,
    family: Family,
    sampling: &Sampling,
) -> Result<ConditionReport, ConditionError> {
    let n = sampling_dim(pair, sampling);
    pair.validate(n)?;
    check_dual_integrability(pair, n)?;
    let sweep = Sweep::build(family, n, sampling)?;
    let configs = sweep.configs();
    let (a, b) = (1.0 / exps.q, 1.0 / exps.p_conj);
    let u_e = sweep.measure_e(&pair.u, 0, &configs)?;
    let w_e = sweep.measure_e(&pair.w, 1, &configs)?;
    let u_f = sweep.measure_f(&pair.u, 0, &configs)?;
    let w_f = sweep.measure_f(&pair.w, 1, &configs)?;
    let scale = |c: &Config| sweep.shapes[c.shape].scale;
    let prods = Products {
        labels: ["direct", "interchanged"],
        values: [
            (0..configs.len()).map(|i| product(&u_f[i], a, &w_e[i], b)).collect(),
            (0..configs.len()).map(|i| product(&u_e[i], a, &w_f[i], b)).collect(),
        ],
        keys: [configs.iter().map(scale).collect(), configs.iter().map(|c| 1.0 / scale(c)).collect()],
    };
    let dilation = (sweep.dilation(&pair.u)?, sweep.dilation(&pair.w)?);
    Ok(assemble(class_name(family).into(), family, &sweep, &configs, prods, sampling, dilation))
}

/// Sampled supremum over cubes of `u(E)^{1/q} |F| / v(F)^{1/p}` and of the
/// interchanged `u(F)^{1/q} |E| / v(E)^{1/p}`, with `E`, `F` as in
/// [`check_condition`].
///
/// By Hölder each product is at most the corresponding product of
/// [`check_condition`] on the same configuration.
pub fn check_nqprime(pair: &WeightPair, exps: &Exponents, sampling: &Sampling) -> Result<ConditionReport, ConditionError> {
    let n = sampling_dim(pair, sampling);
    pair.validate(n)?;
    let family = Family::Cubes;
    let sweep = Sweep::build(family, n, sampling)?;
    let configs = sweep.configs();
    let (a, b) = (1.0 / exps.q, -1.0 / exps.p);
    let lebesgue = Weight::lebesgue();
    let u_e = sweep.measure_e(&pair.u, 0, &configs)?;
    let v_e = sweep.measure_e(&pair.v, 2, &configs)?;
    let u_f = sweep.measure_f(&pair.u, 0, &configs)?;
    let v_f = sweep.measure_f(&pair.v, 2, &configs)?;
    let vol_e = sweep.measure_e(&lebesgue, 3, &configs)?;
    let vol_f = sweep.measure_f(&lebesgue, 3, &configs)?;
    let with_volume = |(v, e): (f64, f64), vol: &Estimate| {
        let rel = if vol.value > 0.0 { vol.abs_error / vol.value } else { 0.0 };
        (v * vol.value, e * vol.value + v * vol.value * rel)
    };
    let scale = |c: &Config| sweep.shapes[c.shape].scale;
    let prods = Products {
        labels: ["direct", "interchanged"],
        values: [
            (0..configs.len()).map(|i| with_volume(product(&u_e[i], a, &v_f[i], b), &vol_f[i])).collect(),
            (0..configs.len()).map(|i| with_volume(product(&u_f[i], a, &v_e[i], b), &vol_e[i])).collect(),
        ],
        keys: [configs.iter().map(|c| 1.0 / scale(c)).collect(), configs.iter().map(scale).collect()],
    };
    let dilation = (sweep.dilation(&pair.u)?, sweep.dilation(&pair.v)?);
    Ok(assemble("N_Q'".into(), family, &sweep, &configs, prods, sampling, dilation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{dyadic_scales, Tail, Verdict};

    fn quick(scales: Vec<f64>) -> Sampling {
        Sampling { scales, ..Sampling::default() }
    }

    #[test]
    fn lebesgue_on_the_diagonal_is_constant() {
        let exps = Exponents::new(2.0, 2.0).unwrap();
        let pair = WeightPair::new(Weight::lebesgue(), Weight::lebesgue(), &exps).unwrap();
        let r = check_condition(&pair, &exps, Family::Cubes, &quick(dyadic_scales(-4, 4))).unwrap();
        for p in &r.trend {
            assert!((p.value - 2.0).abs() < 1e-12);
        }
        assert!(matches!(r.verdict, Verdict::Bounded { .. }));
    }

    #[test]
    fn lebesgue_off_the_diagonal_diverges() {
        let exps = Exponents::new(2.0, 3.0).unwrap();
        let pair = WeightPair::new(Weight::lebesgue(), Weight::lebesgue(), &exps).unwrap();
        let r = check_nqprime(&pair, &exps, &quick(dyadic_scales(-10, 10))).unwrap();
        match r.verdict {
            Verdict::Diverging { slope, tail: Tail::Upper } => assert!((slope - 1.0 / 6.0).abs() < 0.01),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn shifted_configurations_stay_inside_their_sets() {
        let sampling = Sampling {
            scales: vec![0.5, 2.0],
            shapes_per_scale: 2,
            centers_per_scale: 2,
            offsets_per_center: 3,
            translations_per_scale: 2,
            ..Sampling::default()
        };
        let sweep = Sweep::build(Family::SymPolytopes, 2, &sampling).unwrap();
        for sh in &sweep.shapes {
            for (d, _) in &sh.polars {
                assert!(sh.body.contains(&-d));
            }
        }
        assert_eq!(sweep.configs().len(), 2 * 2 * 2 * 3 * 2);
    }
}
