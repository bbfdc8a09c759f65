//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use polarity_core::conditions::{
    check_comparability, check_condition, check_nqprime, classify_sufficiency, dyadic_scales, epsilon_of_delta,
    inherited_region, Case, ClassifyConfig, ComparabilitySampling, Family, Sampling, Verdict, WeightPair,
    DEFAULT_DISK_RADIUS,
};
use polarity_core::fourier::{
    lower_bound_check, restricted_weak_type, rwt_sweep, strong_type_ratio, GridConfig, LevelSetConfig, SimpleFunction,
};
use polarity_core::geometry::{
    loewner_john, mahler_volume, polar, random_rotation, Body, Matrix, Vector, VolumeMethod,
};
use polarity_core::search::{
    conjecture_sup_search, dilation_ray, Candidate, Optimizer, Parameterization, SearchConfig,
};
use polarity_core::weights::{CubeFamily, Exponents, GridWeight, Weight};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Criterion = (usize, &'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "polar duality suite", 10, polar_duality),
        (2, "Mahler constants", 30, mahler_constants),
        (3, "John sandwich", 20, john_sandwich),
        (4, "reverse Hölder exponent closed form", 1, epsilon_map),
        (5, "Lebesgue dichotomy on cubes", 10, lebesgue_dichotomy),
        (6, "pointwise lower bound on the polar", 30, lower_bound),
        (7, "Plancherel anchor", 20, plancherel_anchor),
        (8, "power-weight pair end to end", 120, power_weight_pair),
        (9, "inherited region geometry", 1, region_geometry),
        (10, "conjecture exploration", 120, conjecture_exploration),
        (11, "comparability oracle", 10, comparability_oracle),
    ];
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        let t = Instant::now();
        let o = f();
        let elapsed = t.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.2}s / {limit}s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Symmetric polytope, rotated box or ellipsoid, in turn.
fn random_body(i: usize, n: usize, rng: &mut ChaCha8Rng) -> Body {
    match i % 3 {
        0 => {
            let k = n + 1 + rng.gen_range(0..4);
            Body::sym_polytope((0..k).map(|_| gaussian(n, rng)).collect()).unwrap()
        }
        1 => {
            let half = Vector::from_fn(n, |_, _| rng.gen_range(0.2..3.0));
            Body::rotated_box(Vector::zeros(n), half, random_rotation(n, rng)).unwrap()
        }
        _ => {
            let r = random_rotation(n, rng);
            let d = Matrix::from_diagonal(&Vector::from_fn(n, |_, _| rng.gen_range(0.1f64..4.0).powi(2)));
            Body::ellipsoid(Vector::zeros(n), &r * d * r.transpose()).unwrap()
        }
    }
}

/// A body containing `a`.
fn enlarge(a: &Body, rng: &mut ChaCha8Rng) -> Body {
    match a {
        Body::SymPolytopeV(p) => {
            let n = a.dim();
            let mut g = p.generators().to_vec();
            g.extend((0..2).map(|_| 1.5 * gaussian(n, rng)));
            Body::sym_polytope(g).unwrap()
        }
        Body::Box(b) => {
            let grow = Vector::from_fn(a.dim(), |_, _| rng.gen_range(1.0..2.0));
            Body::rotated_box(b.center().clone(), b.half_extents().component_mul(&grow), b.rotation().clone()).unwrap()
        }
        Body::Ellipsoid(e) => {
            // Shrinking the shape along one direction enlarges the body.
            let n = a.dim();
            let u = gaussian(n, rng).normalize();
            let s = e.shape();
            let su = s * &u;
            let t = 0.5 / u.dot(&su);
            let shape = s - (&su * su.transpose()) * t;
            Body::ellipsoid(Vector::zeros(n), shape).unwrap()
        }
        _ => unreachable!(),
    }
}

fn polar_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let points = 10_000;
    let (mut inclusion, mut scaling, mut reversal) = (0, 0, 0);
    for i in 0..100 {
        let n = 2 + i % 2;
        let e = random_body(i, n, &mut rng);
        let dual = polar(&e).unwrap();
        let bidual = polar(&dual).unwrap();
        let k = rng.gen_range(0.25..4.0);
        let lhs = polar(&e.scaled(k).unwrap()).unwrap();
        let rhs = dual.scaled(1.0 / k).unwrap();
        let b = enlarge(&e, &mut rng);
        let b_dual = polar(&b).unwrap();
        let (lo, hi) = rhs.bbox();
        for _ in 0..points {
            let x = e.sample(&mut rng);
            if !bidual.contains(&x) {
                inclusion += 1;
            }
            let z = Vector::from_fn(n, |j, _| 1.2 * rng.gen_range(lo[j]..=hi[j]));
            if lhs.contains(&z) != rhs.contains(&z) {
                scaling += 1;
            }
            let w = b_dual.sample(&mut rng);
            if !dual.contains(&w) {
                reversal += 1;
            }
        }
    }
    outcome(
        inclusion + scaling + reversal == 0,
        format!("violations E⊂E°° {inclusion}, (kE)°=E°/k {scaling}, order reversal {reversal} over 100 bodies × 1e4 points"),
    )
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn mahler_constants() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 1..=3 {
        let cube = Body::cube(n, 1.0);
        let target = 4f64.powi(n as i32) / factorial(n);
        let exact = mahler_volume(&cube, &VolumeMethod::Exact).unwrap();
        let exact_ok = (exact.value - target).abs() <= 4.0 * f64::EPSILON * target;
        let mc = mahler_volume(&cube, &VolumeMethod::MonteCarlo { samples: 1_000_000, seed: n as u64 }).unwrap();
        let mc_ok = (mc.value - target).abs() <= mc.abs_error;
        ok &= exact_ok && mc_ok;
        parts.push(format!("n={n} exact {} mc {:.4}±{:.4}", exact.value, mc.value, mc.abs_error));
    }
    let disk = mahler_volume(&Body::ball(2, 1.0), &VolumeMethod::Auto { samples: 1_000_000, seed: 0 }).unwrap();
    let disk_ok = (disk.value / (PI * PI) - 1.0).abs() < 0.01;
    parts.push(format!("disk {:.6} vs π² {:.6}", disk.value, PI * PI));
    outcome(ok && disk_ok, parts.join("; "))
}

fn john_sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bound = 2f64.sqrt() * (1.0 + 1e-3);
    let mut worst: f64 = 0.0;
    let mut escapes = 0;
    for _ in 0..50 {
        let k = rng.gen_range(2..9);
        let p = Body::sym_polytope((0..k).map(|_| gaussian(2, &mut rng)).collect()).unwrap();
        let s = loewner_john(&p).unwrap();
        let Body::Ellipsoid(inner) = &s.inner else { return outcome(false, "inner body is not an ellipsoid") };
        // Boundary of S must lie in P.
        for j in 0..720 {
            let t = j as f64 * PI / 360.0;
            let x = inner.from_ball() * DVector::from_vec(vec![t.cos(), t.sin()]);
            if !p.contains(&x) {
                escapes += 1;
            }
        }
        let a = inner.shape();
        for v in p.vertices().unwrap() {
            worst = worst.max(v.dot(&(a * &v)).sqrt());
        }
    }
    outcome(
        escapes == 0 && worst <= bound,
        format!("S⊄P boundary points {escapes}; max vertex gauge {worst:.6} vs √2(1+1e-3) {bound:.6}"),
    )
}

fn epsilon_map() -> Outcome {
    let mut err: f64 = 0.0;
    for d in [0.1, 0.5, 1.0, 2.0, 10.0] {
        err = err.max((epsilon_of_delta(d, 1.0, 1).unwrap() - 0.5 * d / (d + 1.0)).abs());
    }
    let grid: Vec<f64> = (1..=100).map(|i| 0.05 * i as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&d| epsilon_of_delta(d, 1.0, 1).unwrap()).collect();
    let increasing = vals.windows(2).all(|w| w[1] > w[0]);
    outcome(err <= 1e-12 && increasing, format!("max error {err:.2e}, strictly increasing on 100 points: {increasing}"))
}

fn lebesgue_dichotomy() -> Outcome {
    let one = Weight::lebesgue();
    let sampling = Sampling { scales: dyadic_scales(-10, 10), ..Sampling::default() };
    let diag = Exponents::new(2.0, 2.0).unwrap();
    let pair = WeightPair::new(one.clone(), one.clone(), &diag).unwrap();
    let r = check_condition(&pair, &diag, Family::Cubes, &sampling).unwrap();
    let dev = r.trend.iter().map(|p| (p.value - 2.0).abs()).fold(0.0, f64::max);
    let flat = r.trend.len() == 21 && dev <= 1e-6;
    let off = Exponents::new(2.0, 3.0).unwrap();
    let pair = WeightPair::new(one.clone(), one, &off).unwrap();
    let r = check_condition(&pair, &off, Family::Cubes, &sampling).unwrap();
    let fit = r.analysis.fit.unwrap();
    let diverging = matches!(r.verdict, Verdict::Diverging { .. });
    let slope_ok = (fit.slope - 1.0 / 6.0).abs() <= 0.01 && fit.r_squared > 0.99;
    outcome(
        flat && slope_ok && diverging,
        format!(
            "p'=q=2: {} scales, max |value−2| {dev:.1e}; p=2,q=3: slope {:.6} r² {:.6} diverging {diverging}",
            r.trend.len(),
            fit.slope,
            fit.r_squared
        ),
    )
}

fn lower_bound() -> Outcome {
    let bodies = [("interval", Body::cube(1, 1.0)), ("square", Body::cube(2, 1.0)), ("disk", Body::ball(2, 1.0))];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, e) in bodies {
        let r = lower_bound_check(&e, 1000, 3, &GridConfig::default()).unwrap();
        ok &= r.min_ratio >= 1.0 - 1e-3;
        parts.push(format!("{name} min ratio {:.6}", r.min_ratio));
    }
    outcome(ok, parts.join(", "))
}

fn plancherel_anchor() -> Outcome {
    let exps = Exponents::new(2.0, 2.0).unwrap();
    let pair = WeightPair::new(Weight::lebesgue(), Weight::lebesgue(), &exps).unwrap();
    let interval = Body::cube(1, 1.0);
    let f = SimpleFunction::indicator(interval.clone());
    let st = strong_type_ratio(&pair, &exps, &[f], &GridConfig::default()).unwrap();
    let target = (2.0 * PI).sqrt();
    let st_ok = (st.max_ratio / target - 1.0).abs() < 0.01;
    let rwt = restricted_weak_type(&pair, &exps, &interval.into(), &LevelSetConfig::default()).unwrap();
    let cap = (4.0 * PI).sqrt() * 1.01;
    outcome(
        st_ok && rwt.ratio <= cap,
        format!("strong type {:.6} vs √(2π) {target:.6}; weak type {:.6} ≤ {cap:.6}", st.max_ratio, rwt.ratio),
    )
}

fn power_weight_pair() -> Outcome {
    let exps = Exponents::new(2.0, 4.0).unwrap();
    let pair = WeightPair::new(Weight::lebesgue(), Weight::power(0.5), &exps).unwrap();
    let sampling = Sampling { scales: dyadic_scales(-8, 8), ..Sampling::default() };
    let cubes = CubeFamily {
        centers: vec![vec![0.0], vec![0.75], vec![-3.0], vec![10.0]],
        half_sides: dyadic_scales(-4, 4),
        samples: 100_000,
        seed: 0,
    };
    let config = ClassifyConfig { condition: sampling.clone(), comparability: ComparabilitySampling::new(cubes) };
    let c = classify_sufficiency(&pair, &exps, &config).unwrap();
    let classified = c.applicable && c.which_case == Case::B;
    let nq = check_condition(&pair, &exps, Family::Cubes, &sampling).unwrap();
    let nqp = check_nqprime(&pair, &exps, &sampling).unwrap();
    let bounded = |v: &Verdict| matches!(v, Verdict::Bounded { .. });
    let sweep = rwt_sweep(&pair, &exps, &Body::cube(1, 1.0), &dyadic_scales(-5, 5), &LevelSetConfig::default()).unwrap();
    outcome(
        classified && bounded(&nq.verdict) && bounded(&nqp.verdict) && sweep.variation < 0.1,
        format!(
            "applicable {} case {:?}; N_Q sup {:.4} {}; NQ' sup {:.4} {}; weak-type variation {:.4}",
            c.applicable,
            c.which_case,
            nq.sup_estimate,
            verdict_name(&nq.verdict),
            nqp.sup_estimate,
            verdict_name(&nqp.verdict),
            sweep.variation
        ),
    )
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::Bounded { .. } => "bounded",
        Verdict::Diverging { .. } => "diverging",
        Verdict::Inconclusive { .. } => "inconclusive",
    }
}

fn region_geometry() -> Outcome {
    let r = inherited_region(&Exponents::new(2.0, 4.0).unwrap(), Case::B, DEFAULT_DISK_RADIUS).unwrap();
    let line_ok = (r.line.slope + 1.5).abs() < 1e-12 && (r.line.intercept - 1.0).abs() < 1e-12;
    let through = (r.line.at(0.5) - 0.25).abs() < 1e-12;
    let open = matches!(r.segment, Some([a, b]) if b[0] - a[0] > 0.0);
    let values = [1.25, 1.5, 2.0, 3.0, 4.0, 6.0];
    let (mut checked, mut wrong) = (0, 0);
    for &p in &values {
        for &q in &values {
            let exps = Exponents::new(p, q).unwrap();
            for case in [Case::A, Case::B] {
                let Ok(spec) = inherited_region(&exps, case, DEFAULT_DISK_RADIUS) else { continue };
                let expect = match case {
                    Case::A => p == 2.0,
                    Case::B => q == 2.0,
                };
                checked += 1;
                if spec.degenerate != expect {
                    wrong += 1;
                }
            }
        }
    }
    outcome(
        line_ok && through && open && wrong == 0 && checked > 0,
        format!(
            "line y = {}x + {}, through (0.5, 0.25) {through}, open segment {open}; degenerate flag wrong on {wrong} of {checked}",
            r.line.slope, r.line.intercept
        ),
    )
}

fn conjecture_exploration() -> Outcome {
    let exps = Exponents::new(2.0, 2.0).unwrap();
    let one = Weight::lebesgue();
    let pair = WeightPair { u: one.clone(), v: one.clone(), w: one };
    let cfg = SearchConfig {
        parameterization: Parameterization::Box { dim: 1 },
        optimizer: Optimizer::Annealing { steps: 2000, cooling: 0.995, step_size: 0.25, t0: None },
        seed: 7,
        ..SearchConfig::default()
    };
    let a = conjecture_sup_search(&pair, &exps, &cfg).unwrap();
    let b = conjecture_sup_search(&pair, &exps, &cfg).unwrap();
    let converged = (a.best_value / 2.0 - 1.0).abs() < 0.01;
    let bitwise = a.trajectory == b.trajectory && a.best_value.to_bits() == b.best_value.to_bits();
    let g = Weight::Grid(GridWeight::from_fn(vec![-6.0], vec![6.0], vec![1201], |x| (-0.5 * x[0] * x[0]).exp()));
    let gauss = WeightPair { u: g.clone(), v: g.clone(), w: g };
    let base = Candidate { body: Body::cube(1, 1.0), mu: vec![0.0], tau: vec![0.0] };
    let scales: Vec<f64> = (-6..=10).map(|k| 2f64.powi(k)).collect();
    let ray = dilation_ray(&gauss, &exps, &base, &scales, 20_000, 0).unwrap();
    outcome(
        converged && bitwise && ray.eventually_decreasing,
        format!(
            "sup {:.9} after {} evaluations; bitwise rerun {bitwise}; Gaussian ray eventually decreasing {} (last value {:.3e})",
            a.best_value,
            a.evaluations,
            ray.eventually_decreasing,
            ray.points.last().map_or(f64::NAN, |p| p.value)
        ),
    )
}

fn comparability_oracle() -> Outcome {
    let cubes = CubeFamily {
        centers: vec![vec![0.3], vec![-2.0], vec![5.0]],
        half_sides: vec![0.25, 1.0, 4.0],
        samples: 100_000,
        seed: 0,
    };
    let s = ComparabilitySampling::new(cubes);
    let mut self_ok = true;
    for w in [Weight::lebesgue(), Weight::power(0.5), Weight::power(-0.5)] {
        self_ok &= check_comparability(&w, &w, 1.0, &s).unwrap().c_estimate == 1.0;
    }
    let corners = CubeFamily { centers: vec![vec![1.0], vec![-1.0]], half_sides: vec![1.0], samples: 100_000, seed: 0 };
    let r = check_comparability(&Weight::lebesgue(), &Weight::power(1.0), 0.5, &ComparabilitySampling::new(corners))
        .unwrap();
    let c_ok = (r.c_estimate - 1.0).abs() <= 1e-9;
    outcome(self_ok && c_ok, format!("C(μ, μ, 1) = 1 exactly {self_ok}; (dx, |x|) at δ=1/2: C = {:.12}", r.c_estimate))
}
