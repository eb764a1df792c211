//! Property tests of structural invariants.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use plurilab::domains::first_exit;
use plurilab::geodesics::{ball_distance, ball_geodesic, disc_distance, dini_check, hl_extend, log_test_function, Majorant};
use plurilab::kobayashi::{graham_bounds, upper_disc, ModulusOfContinuity};
use plurilab::mappings::{boundary_extend, kappa_for, HoloMap};
use plurilab::monge_ampere::{complex_hessian, ma_density, min_eigenvalue, reinhardt_envelope_solve, BoundaryData, EnvelopeConfig, HESSIAN_STEP};
use plurilab::numerics::{self, c};
use plurilab::DomainSpec;
use proptest::prelude::*;

fn unit_ball_point(dim: usize, scale: f64, seed: u64) -> Vec<Complex64> {
    numerics::random_in_ball(&mut numerics::seeded_rng(seed), &vec![c(0.0, 0.0); dim], scale)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn first_exit_lands_on_the_sphere(seed in 0u64..10_000, radius in 0.5f64..3.0) {
        let ball = DomainSpec::ball(2, radius).unwrap();
        let z = unit_ball_point(2, 0.9 * radius, seed);
        let u = numerics::random_unit(&mut numerics::seeded_rng(seed + 1), 2);
        let t = first_exit(&ball, &z, &u, 1e-13).unwrap();
        let hit = numerics::along(&z, c(t, 0.0), &u);
        prop_assert!((numerics::norm(&hit) - radius).abs() < 1e-9 * radius);
        prop_assert!(ball.contains(&numerics::along(&z, c(0.999 * t, 0.0), &u)));
    }

    #[test]
    fn ball_geodesics_are_isometries(seed in 0u64..10_000, a in 0.0f64..0.95, b in 0.0f64..0.95, ta in 0.0f64..TAU, tb in 0.0f64..TAU) {
        let p = unit_ball_point(2, 0.8, seed);
        let q = unit_ball_point(2, 0.8, seed + 7);
        prop_assume!(numerics::norm(&numerics::sub(&p, &q)) > 1e-3);
        let disc = ball_geodesic(&p, &q).unwrap();
        let (za, zb) = (Complex64::from_polar(a, ta), Complex64::from_polar(b, tb));
        let defect = (ball_distance(1.0, &disc.eval(za), &disc.eval(zb)) - disc_distance(za, zb)).abs();
        prop_assert!(defect < 1e-8, "defect {}", defect);
    }

    #[test]
    fn graham_bracket_contains_the_poincare_metric(x in -0.99f64..0.99, y in -0.99f64..0.99) {
        prop_assume!(x * x + y * y < 0.98);
        let disc = DomainSpec::ball(1, 1.0).unwrap();
        let z = [c(x, y)];
        let b = graham_bounds(&disc, &z, &[c(1.0, 0.0)]).unwrap();
        let exact = 1.0 / (1.0 - z[0].norm_sqr());
        prop_assert!(b.lower <= exact * (1.0 + 1e-9) && exact <= b.upper * (1.0 + 1e-9));
        prop_assert!(upper_disc(&disc, &z, &[c(1.0, 0.0)]).unwrap().upper >= b.lower);
    }

    #[test]
    fn hardy_littlewood_extension_ignores_the_start_radius(theta in 0.0f64..TAU, r0 in 0.2f64..0.8) {
        let g = log_test_function();
        let majorant = Majorant::Log { c: 2.5 };
        let a = hl_extend(&g, &majorant, &[theta], r0, 1e-11).unwrap();
        let b = hl_extend(&g, &majorant, &[theta], 0.5, 1e-11).unwrap();
        prop_assert!((a.values[0] - b.values[0]).norm() < 1e-8);
    }

    #[test]
    fn dini_integral_scales_inversely_with_c(sigma in 0.05f64..1.0, c_val in 0.1f64..10.0, s in 0.2f64..1.0) {
        let modulus = ModulusOfContinuity::power(1.0, sigma).unwrap();
        let one = dini_check(&modulus, 1.0, s, 1.0).unwrap();
        let scaled = dini_check(&modulus, 1.0, s, c_val).unwrap();
        prop_assert!(one.passes && scaled.passes);
        let (i1, ic) = (one.integral.unwrap(), scaled.integral.unwrap());
        prop_assert!((ic * c_val - i1).abs() < 1e-10 * i1);
    }

    #[test]
    fn kappa_halves_its_power_when_m_star_doubles(eps in 1e-3f64..1.0, m_star in 0.01f64..100.0, s_tilde in 0.0f64..0.99) {
        let k1 = kappa_for(eps, m_star, s_tilde).unwrap();
        let k2 = kappa_for(eps, 2.0 * m_star, s_tilde).unwrap();
        let ratio = k2.powf(1.0 - s_tilde) / k1.powf(1.0 - s_tilde);
        prop_assert!((ratio - 0.5).abs() < 1e-9);
    }

    #[test]
    fn extension_of_a_polynomial_map_is_its_value(seed in 0u64..10_000, t_prime in 0.05f64..0.5, s_tilde in 0.0f64..0.95) {
        let xi = numerics::random_unit(&mut numerics::seeded_rng(seed), 2);
        let inward = numerics::scale(&xi, c(-1.0, 0.0));
        let map = HoloMap::squares(2);
        let ext = boundary_extend(&map, &xi, &inward, t_prime, s_tilde).unwrap();
        let direct = map.eval(&xi).unwrap();
        prop_assert!(numerics::norm(&numerics::sub(&ext.value, &direct)) < 1e-10);
    }

    #[test]
    fn hermitian_quadratic_forms_have_nonnegative_density(a in 0.0f64..3.0, b in 0.0f64..3.0, re in -1.0f64..1.0, im in -1.0f64..1.0, seed in 0u64..1000) {
        // u = a|z1|² + b|z2|² + 2 Re(w z1 conj z2) with |w|² ≤ ab is psh.
        let w = c(re, im) * (a * b).sqrt() / c(re, im).norm().max(1.0);
        let u = move |z: &[Complex64]| a * z[0].norm_sqr() + b * z[1].norm_sqr() + 2.0 * (w * z[0] * z[1].conj()).re;
        let z = unit_ball_point(2, 1.0, seed);
        let h = complex_hessian(&u, &z, HESSIAN_STEP);
        prop_assert!(ma_density(&h) >= -1e-8);
        prop_assert!(min_eigenvalue(&h) >= -1e-8);
        prop_assert!((ma_density(&h) - 2.0 * (a * b - w.norm_sqr())).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn envelope_invariants_hold_for_radial_data(a in 0.2f64..3.0, b in 0.2f64..3.0) {
        let g: BoundaryData = Arc::new(move |z: &[Complex64]| -(a * z[0].norm_sqr() + b * z[1].norm_sqr()));
        let env = reinhardt_envelope_solve(&DomainSpec::polydisc(2).unwrap(), g, &EnvelopeConfig::coarse()).unwrap();
        let report = env.check_invariants();
        prop_assert!(report.ok, "{:?}", report);
        // On the polydisc the solution lies below the data and is at least its minimum.
        let value = env.eval(&[c(0.3, 0.0), c(0.0, 0.4)]);
        prop_assert!(value <= -(a * 0.09 + b * 0.16) + 1e-9);
        prop_assert!(value >= -(a + b) - 1e-9);
    }
}
