//! Property-based invariants across modules.

mod common;

use frac_orlicz::grid::{gradient_modular, modular};
use frac_orlicz::limit_density::tilde_eval;
use frac_orlicz::{
    energy, fractional_modular, solve, DirichletProblem, GridFunction, LimitDensity, OrliczFunction,
    QuadratureConfig, Scaling, SolveOptions,
};
use proptest::prelude::*;

fn builtin(k: usize) -> OrliczFunction {
    let p2 = OrliczFunction::power(2.0).unwrap();
    let p3 = OrliczFunction::power(3.0).unwrap();
    match k % 5 {
        0 => OrliczFunction::power(1.5).unwrap(),
        1 => p2,
        2 => OrliczFunction::power_log(3.0).unwrap(),
        3 => OrliczFunction::pointwise_max(vec![p2, p3]).unwrap(),
        _ => OrliczFunction::weighted_sum(vec![p2, p3], vec![0.3, 0.7]).unwrap(),
    }
}

fn w0(values: &[f64]) -> GridFunction {
    let mut v = vec![0.0];
    v.extend_from_slice(values);
    v.push(0.0);
    GridFunction::new(-1.0, 1.0, v).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orlicz_functions_are_convex_and_doubling(k in 0usize..5, a in 1e-3f64..50.0, b in 1e-3f64..50.0, l in 0.0f64..1.0) {
        let g = builtin(k);
        let mid = g.value(l * a + (1.0 - l) * b);
        prop_assert!(mid <= l * g.value(a) + (1.0 - l) * g.value(b) + 1e-12 * mid.max(1.0));
        prop_assert!(g.value(2.0 * a) <= g.doubling_constant() * g.value(a) * (1.0 + 1e-12));
        prop_assert!(g.derivative(a) * a <= g.upper_exponent() * g.value(a) * (1.0 + 1e-12));
    }

    #[test]
    fn young_inequality_with_conjugate(k in 0usize..5, a in 0.0f64..20.0, t in 0.0f64..5.0) {
        let g = builtin(k);
        let conj = g.conjugate(a).unwrap();
        prop_assert!(a * t <= g.value(t) + conj + 1e-9 * (a * t).max(1.0));
    }

    #[test]
    fn tilde_of_power_is_homogeneous(p in 1.1f64..4.0, n in 1usize..4, a in 0.1f64..3.0, lambda in 0.2f64..5.0) {
        let g = OrliczFunction::power(p).unwrap();
        let lhs = tilde_eval(&g, n, lambda * a).unwrap();
        let rhs = lambda.powf(p) * tilde_eval(&g, n, a).unwrap();
        prop_assert!(close(lhs, rhs, 1e-9), "{lhs} vs {rhs}");
    }

    #[test]
    fn limit_density_is_increasing(k in 0usize..5, n in 1usize..4, a in 0.05f64..4.0, d in 0.01f64..1.0) {
        let t = LimitDensity::new(builtin(k), n).unwrap();
        prop_assert!(t.value(a).unwrap() < t.value(a + d).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fractional_modular_is_even_and_nonnegative(
        k in 0usize..5,
        s in 0.05f64..0.95,
        values in prop::collection::vec(-2.0f64..2.0, 15),
    ) {
        let g = builtin(k);
        let cfg = QuadratureConfig::default();
        let u = w0(&values);
        let v = fractional_modular(&g, s, &u, &cfg).unwrap();
        let w = fractional_modular(&g, s, &u.scaled(-1.0), &cfg).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert_eq!(v, w);
    }

    #[test]
    fn fractional_modular_grows_along_rays(
        k in 0usize..5,
        s in 0.05f64..0.95,
        lambda in 0.0f64..1.0,
        values in prop::collection::vec(-2.0f64..2.0, 15),
    ) {
        let g = builtin(k);
        let cfg = QuadratureConfig::default();
        let u = w0(&values);
        let small = fractional_modular(&g, s, &u.scaled(lambda), &cfg).unwrap();
        let big = fractional_modular(&g, s, &u, &cfg).unwrap();
        prop_assert!(small <= big * (1.0 + 1e-12));
        // convexity along the ray: Phi(lambda u) <= lambda Phi(u)
        prop_assert!(small <= lambda * big * (1.0 + 1e-10) + 1e-300);
    }

    #[test]
    fn power_modular_is_homogeneous(
        p in 1.2f64..3.5,
        s in 0.1f64..0.9,
        lambda in 0.1f64..4.0,
        values in prop::collection::vec(-1.0f64..1.0, 11),
    ) {
        let g = OrliczFunction::power(p).unwrap();
        let cfg = QuadratureConfig::default();
        let u = w0(&values);
        let lhs = fractional_modular(&g, s, &u.scaled(lambda), &cfg).unwrap();
        let rhs = lambda.powf(p) * fractional_modular(&g, s, &u, &cfg).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10), "{lhs} vs {rhs}");
    }

    #[test]
    fn modular_is_invariant_under_translation_of_the_domain(
        k in 0usize..5,
        s in 0.1f64..0.9,
        shift in -3.0f64..3.0,
        values in prop::collection::vec(-1.0f64..1.0, 11),
    ) {
        let g = builtin(k);
        let cfg = QuadratureConfig::default();
        let u = w0(&values);
        let v = GridFunction::new(-1.0 + shift, 1.0 + shift, u.values().to_vec()).unwrap();
        let a = fractional_modular(&g, s, &u, &cfg).unwrap();
        let b = fractional_modular(&g, s, &v, &cfg).unwrap();
        prop_assert!(close(a, b, 1e-9), "{a} vs {b}");
    }

    #[test]
    fn power_modular_scales_with_the_domain(
        s in 0.1f64..0.9,
        r in 0.25f64..4.0,
        values in prop::collection::vec(-1.0f64..1.0, 11),
    ) {
        // u_r(x) = u(x / r) on (-r, r): Phi_{s,t^2}(u_r) = r^{1 - 2s} Phi_{s,t^2}(u).
        let g = OrliczFunction::power(2.0).unwrap();
        let cfg = QuadratureConfig::default();
        let u = w0(&values);
        let ur = GridFunction::new(-r, r, u.values().to_vec()).unwrap();
        let a = fractional_modular(&g, s, &ur, &cfg).unwrap();
        let b = r.powf(1.0 - 2.0 * s) * fractional_modular(&g, s, &u, &cfg).unwrap();
        prop_assert!(close(a, b, 1e-9), "{a} vs {b}");
    }

    #[test]
    fn pointwise_modulars_are_even_and_convex(
        k in 0usize..5,
        lambda in 0.0f64..1.0,
        values in prop::collection::vec(-2.0f64..2.0, 20),
    ) {
        let g = builtin(k);
        let u = w0(&values);
        prop_assert!(close(modular(&g, &u), modular(&g, &u.scaled(-1.0)), 1e-13));
        prop_assert!(modular(&g, &u.scaled(lambda)) <= lambda * modular(&g, &u) * (1.0 + 1e-12) + 1e-300);
        prop_assert!(gradient_modular(&g, &u.scaled(lambda)) <= lambda * gradient_modular(&g, &u) * (1.0 + 1e-12) + 1e-300);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn minimiser_beats_perturbations(
        k in 0usize..5,
        s in 0.2f64..0.95,
        amplitude in 0.5f64..3.0,
        bumps in prop::collection::vec(-0.05f64..0.05, 15),
    ) {
        let g = builtin(k);
        let problem = DirichletProblem::new(g, s, Scaling::BbmScaled, (-1.0, 1.0), 17, |x| amplitude * (1.0 - x * x))
            .unwrap();
        let r = solve(&problem, &SolveOptions::default()).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.energy_history.windows(2).all(|w| w[1] <= w[0]));
        let perturbed = r.u.combine(1.0, &w0(&bumps), 1.0).unwrap();
        prop_assert!(r.energy <= energy(&problem, &perturbed).unwrap() + 1e-12);
    }

    #[test]
    fn minimiser_is_odd_in_the_load(k in 0usize..5, s in 0.2f64..0.95, c in 0.2f64..2.0) {
        let g = builtin(k);
        let plus = DirichletProblem::new(g.clone(), s, Scaling::Unscaled, (0.0, 1.0), 17, |x| c * x).unwrap();
        let minus = DirichletProblem::new(g, s, Scaling::Unscaled, (0.0, 1.0), 17, |x| -c * x).unwrap();
        let opts = SolveOptions::default();
        let a = solve(&plus, &opts).unwrap();
        let b = solve(&minus, &opts).unwrap();
        for (x, y) in a.u.values().iter().zip(b.u.values()) {
            prop_assert!((x + y).abs() <= 1e-7 * x.abs().max(1e-3), "{x} vs {y}");
        }
    }
}

#[test]
fn brute_force_agrees_on_a_hat() {
    let u = GridFunction::hat(-1.0, 1.0, 33, 1.0).unwrap();
    let g = OrliczFunction::power(2.0).unwrap();
    let exact = 8.0 * std::f64::consts::LN_2;
    let oracle = common::brute_force_modular(&g, 0.5, &u, 400, 512);
    assert!((oracle - exact).abs() / exact < 1e-3, "{oracle} vs {exact}");
    let fast = fractional_modular(&g, 0.5, &u, &QuadratureConfig::default()).unwrap();
    assert!((fast - exact).abs() / exact < 1e-8);
}
