//! Closed forms and brute-force references computed independently of the library.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use num_complex::Complex64;

use polarity_core::fourier::{transform_at, QuadratureSpec, SimpleFunction, Term};
use polarity_core::geometry::{mahler_volume, polar, volume, Body, Region, Vector, VolumeMethod};
use polarity_core::weights::{integrate, power_interval, Weight};

fn v(x: &[f64]) -> Vector {
    Vector::from_vec(x.to_vec())
}

/// Shoelace area of a convex polygon from its vertices, sorted by angle.
fn shoelace(mut pts: Vec<Vector>) -> f64 {
    pts.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
    let n = pts.len();
    0.5 * (0..n).map(|i| pts[i][0] * pts[(i + 1) % n][1] - pts[(i + 1) % n][0] * pts[i][1]).sum::<f64>().abs()
}

/// Composite midpoint rule.
fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[test]
fn polar_of_a_box_is_the_cross_polytope() {
    let p = polar(&Body::aligned_box(v(&[0.0, 0.0]), v(&[2.0, 0.5])).unwrap()).unwrap();
    for (x, inside) in [([0.5, 0.0], true), ([0.0, 2.0], true), ([0.25, 1.0], true), ([0.3, 1.0], false)] {
        assert_eq!(p.contains(&v(&x)), inside, "{x:?}");
    }
}

#[test]
fn hexagon_volumes_match_the_shoelace_formula() {
    let gens = vec![v(&[1.0, 0.0]), v(&[0.5, 3f64.sqrt() / 2.0]), v(&[-0.5, 3f64.sqrt() / 2.0])];
    let hex = Body::sym_polytope(gens).unwrap();
    let area = volume(&hex, &VolumeMethod::Exact).unwrap().value;
    assert_relative_eq!(area, shoelace(hex.vertices().unwrap()), max_relative = 1e-12);
    assert_relative_eq!(area, 3.0 * 3f64.sqrt() / 2.0, max_relative = 1e-12);
    // The polar is a hexagon with inradius 1 rotated by 30°, area 2√3.
    let dual = polar(&hex).unwrap();
    assert_relative_eq!(volume(&dual, &VolumeMethod::Exact).unwrap().value, 2.0 * 3f64.sqrt(), max_relative = 1e-12);
    assert_relative_eq!(mahler_volume(&hex, &VolumeMethod::Exact).unwrap().value, 9.0, max_relative = 1e-12);
}

#[test]
fn monte_carlo_volume_brackets_the_truth() {
    let body = Body::axis_ellipsoid(&[1.0, 2.0, 0.5]).unwrap();
    let truth = 4.0 / 3.0 * PI;
    let est = volume(&body, &VolumeMethod::MonteCarlo { samples: 200_000, seed: 5 }).unwrap();
    assert!((est.value - truth).abs() <= est.abs_error, "{} ± {}", est.value, est.abs_error);
}

#[test]
fn power_weight_integral_matches_quadrature() {
    for (alpha, a, b) in [(0.5, 0.0, 2.0), (-0.5, -1.0, 3.0), (2.0, -2.0, -0.5)] {
        let reference = midpoint(|x: f64| x.abs().powf(alpha), a, b, 2_000_000);
        let exact = power_interval(0.0, alpha, a, b).unwrap();
        assert_relative_eq!(exact, reference, max_relative = 1e-3);
        let region: Region = Body::aligned_box(v(&[0.5 * (a + b)]), v(&[0.5 * (b - a)])).unwrap().into();
        let m = integrate(&Weight::power(alpha), &region, &VolumeMethod::Exact).unwrap();
        assert_relative_eq!(m.value, exact, max_relative = 1e-12);
    }
}

#[test]
fn interval_transform_is_a_sinc() {
    let f = SimpleFunction::indicator(Body::cube(1, 1.0));
    for z in [0.0, 0.3, 1.0, 2.5, 10.0] {
        let expect = if z == 0.0 { 2.0 } else { 2.0 * f64::sin(z) / z };
        let got = transform_at(&f, &v(&[z]), &QuadratureSpec::default()).unwrap();
        assert!((got.re - expect).abs() < 1e-12 && got.im.abs() < 1e-12, "z {z}: {got}");
    }
}

#[test]
fn shifted_interval_picks_up_a_phase() {
    let f = SimpleFunction::indicator(Body::aligned_box(v(&[1.0]), v(&[0.5])).unwrap());
    for z in [0.7, 3.0] {
        // ∫_{0.5}^{1.5} e^{-ixz} dx
        let expect = (Complex64::new(0.0, -1.5 * z).exp() - Complex64::new(0.0, -0.5 * z).exp()) / Complex64::new(0.0, -z);
        let got = transform_at(&f, &v(&[z]), &QuadratureSpec::default()).unwrap();
        assert!((got - expect).norm() < 1e-12, "{got} vs {expect}");
    }
}

#[test]
fn polygon_transform_matches_brute_force() {
    let parallelogram = Body::sym_polytope(vec![v(&[1.0, 0.2]), v(&[-0.3, 0.9])]).unwrap();
    let f = SimpleFunction::new(vec![Term { coefficient: Complex64::new(2.0, -1.0), region: parallelogram.clone().into() }])
        .unwrap();
    let z = v(&[1.3, -0.7]);
    let got = transform_at(&f, &z, &QuadratureSpec::default()).unwrap();
    let (lo, hi) = parallelogram.bbox();
    let n = 1200;
    let (hx, hy) = ((hi[0] - lo[0]) / n as f64, (hi[1] - lo[1]) / n as f64);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let x = v(&[lo[0] + (i as f64 + 0.5) * hx, lo[1] + (j as f64 + 0.5) * hy]);
            if parallelogram.contains(&x) {
                acc += Complex64::new(0.0, -x.dot(&z)).exp();
            }
        }
    }
    let expect = acc * hx * hy * Complex64::new(2.0, -1.0);
    assert!((got - expect).norm() < 5e-3 * expect.norm(), "{got} vs {expect}");
}
