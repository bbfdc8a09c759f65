use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polarity_core::conditions::epsilon_of_delta;
use polarity_core::geometry::{mahler_volume, polar, random_rotation, volume, Body, Matrix, Vector, VolumeMethod};
use polarity_core::search::{mahler_search, Direction, Optimizer, Parameterization, SearchConfig};
use polarity_core::weights::{dual_weight, Exponents, Weight};

fn box_strategy() -> impl Strategy<Value = Body> {
    (prop::collection::vec(0.1f64..5.0, 2), any::<u64>()).prop_map(|(h, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Body::rotated_box(Vector::zeros(2), Vector::from_vec(h), random_rotation(2, &mut rng)).unwrap()
    })
}

fn polygon_strategy() -> impl Strategy<Value = Body> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..7).prop_filter_map("spanning", |g| {
        Body::sym_polytope(g.into_iter().map(|(a, b)| Vector::from_vec(vec![a, b])).collect()).ok()
    })
}

fn ellipse_strategy() -> impl Strategy<Value = Body> {
    (0.2f64..3.0, 0.2f64..3.0, 0.0f64..std::f64::consts::PI).prop_map(|(a, b, t)| {
        let (c, s) = (t.cos(), t.sin());
        let r = Matrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let d = Matrix::from_diagonal(&Vector::from_vec(vec![1.0 / (a * a), 1.0 / (b * b)]));
        Body::ellipsoid(Vector::zeros(2), &r * d * r.transpose()).unwrap()
    })
}

fn any_body() -> impl Strategy<Value = Body> {
    prop_oneof![box_strategy(), polygon_strategy(), ellipse_strategy()]
}

/// Directions on the unit circle.
fn directions(k: usize) -> Vec<Vector> {
    (0..k)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            Vector::from_vec(vec![t.cos(), t.sin()])
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bipolar_has_the_same_support(e in any_body()) {
        let bb = polar(&polar(&e).unwrap()).unwrap();
        for z in directions(24) {
            let (a, b) = (e.support(&z).unwrap(), bb.support(&z).unwrap());
            prop_assert!((a - b).abs() <= 1e-7 * a.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn polar_of_a_dilate_is_the_inverse_dilate(e in any_body(), k in 0.1f64..10.0) {
        let lhs = polar(&e.scaled(k).unwrap()).unwrap();
        let rhs = polar(&e).unwrap().scaled(1.0 / k).unwrap();
        for z in directions(16) {
            let (a, b) = (lhs.support(&z).unwrap(), rhs.support(&z).unwrap());
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
    }

    #[test]
    fn support_of_polar_is_reciprocal_gauge(e in any_body()) {
        // h_{E°}(z) = 1 / max{t : t z ∈ E} for unit z, read off by bisection on membership.
        let dual = polar(&e).unwrap();
        for z in directions(12) {
            let (mut lo, mut hi) = (0.0, 1e3);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if e.contains(&(&z * mid)) { lo = mid } else { hi = mid }
            }
            let h = dual.support(&z).unwrap();
            prop_assert!((h * lo - 1.0).abs() < 1e-6, "h {h} radius {lo}");
        }
    }

    #[test]
    fn mahler_volume_is_dilation_invariant(e in prop_oneof![box_strategy(), polygon_strategy()], k in 0.1f64..10.0) {
        let a = mahler_volume(&e, &VolumeMethod::Exact).unwrap().value;
        let b = mahler_volume(&e.scaled(k).unwrap(), &VolumeMethod::Exact).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn planar_mahler_volume_between_the_extremes(e in any_body()) {
        let m = mahler_volume(&e, &VolumeMethod::Exact).unwrap().value;
        prop_assert!(m >= 8.0 - 1e-9 && m <= std::f64::consts::PI.powi(2) + 1e-9, "{m}");
    }

    #[test]
    fn volume_scales_with_the_dimension_power(e in any_body(), k in 0.1f64..10.0) {
        let a = volume(&e, &VolumeMethod::Exact).unwrap().value;
        let b = volume(&e.scaled(k).unwrap(), &VolumeMethod::Exact).unwrap().value;
        prop_assert!((b - k * k * a).abs() <= 1e-9 * b);
    }

    #[test]
    fn exponent_conjugates_are_involutive(p in 1.01f64..50.0, q in 1.01f64..50.0) {
        let e = Exponents::new(p, q).unwrap();
        prop_assert!((1.0 / e.p + 1.0 / e.p_conj - 1.0).abs() < 1e-12);
        let back = e.conjugate_swapped().conjugate_swapped();
        prop_assert!((back.p - p).abs() <= 1e-9 * p && (back.q - q).abs() <= 1e-9 * q);
    }

    #[test]
    fn dual_of_a_power_weight(alpha in -0.9f64..3.0, p in 1.1f64..6.0, x in 0.01f64..20.0) {
        let e = Exponents::new(p, p).unwrap();
        let w = dual_weight(&Weight::power(alpha), &e).unwrap();
        let expect = x.powf(-alpha * e.p_conj / p);
        let got = w.eval(&Vector::from_vec(vec![x]));
        prop_assert!((got - expect).abs() <= 1e-9 * expect, "{got} vs {expect}");
    }

    #[test]
    fn epsilon_is_increasing_in_delta_and_bounded(c in 1.0f64..20.0, n in 1usize..4, d in 0.01f64..50.0) {
        let a = epsilon_of_delta(d, c, n).unwrap();
        let b = epsilon_of_delta(d * 1.1, c, n).unwrap();
        prop_assert!(a > 0.0 && a < b && b <= 0.5 / n as f64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mahler_search_stays_in_the_planar_range(seed in any::<u64>(), max in any::<bool>(), k in 2usize..6) {
        let direction = if max { Direction::Max } else { Direction::Min };
        let config = SearchConfig {
            parameterization: Parameterization::SymPolygon { k },
            optimizer: Optimizer::Annealing { steps: 150, cooling: 0.99, step_size: 0.25, t0: None },
            seed,
            ..SearchConfig::default()
        };
        let r = mahler_search(2, &config, direction).unwrap();
        prop_assert!(r.best_value >= 8.0 - 1e-9 && r.best_value <= std::f64::consts::PI.powi(2));
        // The recorded running best is monotone in the search direction.
        for w in r.trajectory.windows(2) {
            if w[0].start == w[1].start {
                let improves = if max { w[1].value >= w[0].value } else { w[1].value <= w[0].value };
                prop_assert!(improves);
            }
        }
        prop_assert_eq!(r.trajectory.last().unwrap().value, r.best_value);
        let again = mahler_search(2, &config, direction).unwrap();
        prop_assert_eq!(again.trajectory, r.trajectory);
    }
}
