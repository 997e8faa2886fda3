//! Acceptance criteria 1-9. One test runs them in sequence (so the runtime budgets are
//! measured without competing threads) and prints one PASS/FAIL line per criterion.

mod common;

use std::time::{Duration, Instant};

use frac_orlicz::limit_density::{tilde_closed_form, tilde_eval};
use frac_orlicz::properties::{builtin_functions, modular_suite, orlicz_suite, random_w0, ModularSuiteOptions};
use frac_orlicz::{
    bbm_curve, energy, energy_gradient, fractional_modular, gamma_run, poincare_check, solve, ClosedForm,
    DirichletProblem, GridFunction, OrliczFunction, QuadratureConfig, Scaling, SolveOptions, SolveResult,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn power(p: f64) -> OrliczFunction {
    OrliczFunction::power(p).unwrap()
}

fn max23() -> OrliczFunction {
    OrliczFunction::pointwise_max(vec![power(2.0), power(3.0)]).unwrap()
}

fn within_budget(elapsed: Duration, budget: Duration) -> (bool, String) {
    (elapsed <= budget, format!("{:.1} s of {} s", elapsed.as_secs_f64(), budget.as_secs()))
}

/// 1. Limit density: quadrature vs closed forms, 1e-6 relative, < 10 s.
fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut functions = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        functions.push(power(p));
        functions.push(OrliczFunction::power_abs_log(p).unwrap());
        functions.push(OrliczFunction::power_log(p).unwrap());
    }
    functions.push(max23());
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for g in &functions {
        let kind = ClosedForm::detect(g).expect("closed form");
        for n in 1..=3 {
            for a in [0.25, 0.5, 1.0, 2.0, 4.0] {
                let quad = tilde_eval(g, n, a).unwrap();
                let exact = tilde_closed_form(kind, n, a).unwrap();
                worst = worst.max((quad - exact).abs() / exact.abs());
                cases += 1;
            }
        }
    }
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(10));
    Verdict {
        passed: worst <= 1e-6 && fast,
        detail: format!("{cases} cases, max rel diff {worst:.2e} (<= 1e-6), {time}"),
    }
}

/// 2. BBM limit of the unit hat at N = 1025 from s = 0.9, 0.95, 0.99.
fn criterion_2() -> Verdict {
    let u = GridFunction::hat(-1.0, 1.0, 1025, 1.0).unwrap();
    let cfg = QuadratureConfig::default();
    let mut passed = true;
    let mut parts = Vec::new();
    for (g, tol, exact_target) in [(power(2.0), 0.02, Some(2.0)), (power(3.0), 0.05, None), (max23(), 0.05, None)] {
        let start = Instant::now();
        let curve = bbm_curve(&g, &u, &[0.9, 0.95, 0.99], &cfg).unwrap();
        let target = exact_target.unwrap_or(curve.target);
        let gap = (curve.extrapolated_limit - target).abs() / target;
        let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(120));
        passed &= gap <= tol && fast;
        parts.push(format!(
            "{g}: {:.5} vs {target:.5}, gap {gap:.2e} (<= {tol}), {time}",
            curve.extrapolated_limit
        ));
    }
    Verdict {
        passed,
        detail: parts.join("; "),
    }
}

/// 3. Pointwise inequalities, 1000 inputs per built-in function, zero violations.
fn criterion_3() -> Verdict {
    let mut checks = 0;
    let mut failures = Vec::new();
    for g in builtin_functions().unwrap() {
        for o in orlicz_suite(&g, 1000, 2024).unwrap() {
            checks += 1;
            if !o.passed() {
                failures.push(o.to_string());
            }
        }
    }
    Verdict {
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{checks} property/function pairs, 0 violations")
        } else {
            failures.join("; ")
        },
    }
}

/// 4. Modular transform bounds, 50 functions at N = 257, s in {0.3, 0.6, 0.9}, < 5 min.
fn criterion_4() -> Verdict {
    let start = Instant::now();
    let functions = [
        power(1.5),
        power(2.0),
        power(3.0),
        OrliczFunction::weighted_sum(vec![power(2.0), power(3.0)], vec![0.5, 0.5]).unwrap(),
        max23(),
    ];
    let opts = ModularSuiteOptions::default();
    assert_eq!((opts.functions, opts.nodes), (50, 257));
    let mut checks = 0;
    let mut failures = Vec::new();
    for g in &functions {
        for o in modular_suite(g, &opts).unwrap() {
            checks += 1;
            if !o.passed() {
                failures.push(o.to_string());
            }
        }
    }
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(300));
    Verdict {
        passed: failures.is_empty() && fast,
        detail: format!(
            "{checks} property/function pairs over {} functions, {} failing{}, {time}",
            functions.len(),
            failures.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!(" ({})", failures.join("; "))
            }
        ),
    }
}

/// 5. Fractional modular vs a dense brute-force double sum, 1%.
fn criterion_5() -> Verdict {
    let cfg = QuadratureConfig::default();
    let mut rng = common::rng(55);
    let functions = [power(2.0), power(1.5), max23()];
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let u = common::random_w0(&mut rng, -1.0, 1.0, 129);
        let g = &functions[k % functions.len()];
        for s in [0.25, 0.5, 0.75] {
            let fast = fractional_modular(g, s, &u, &cfg).unwrap();
            let oracle = common::brute_force_modular(g, s, &u, 400, 1024);
            worst = worst.max((fast - oracle).abs() / oracle);
        }
    }
    Verdict {
        passed: worst <= 0.01,
        detail: format!("30 cases, max rel diff {worst:.2e} (<= 1e-2)"),
    }
}

/// Central differences of the energy along every interior node.
fn fd_gradient(problem: &DirichletProblem, u: &GridFunction) -> Vec<f64> {
    let n = u.node_count();
    (1..n - 1)
        .map(|i| {
            let h = 1e-5 * u.values()[i].abs().max(1.0);
            let mut plus = u.clone();
            plus.values_mut()[i] += h;
            let mut minus = u.clone();
            minus.values_mut()[i] -= h;
            (energy(problem, &plus).unwrap() - energy(problem, &minus).unwrap()) / (2.0 * h)
        })
        .collect()
}

/// 6. Analytic energy gradient vs central differences, 50 states, max relative error 1e-5.
fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let nodes = 33;
    let mut worst: f64 = 0.0;
    let mut states = 0;
    for g in [power(2.0), power(3.0)] {
        for s in [0.5, 0.9] {
            let problem = DirichletProblem::new(g.clone(), s, Scaling::BbmScaled, (0.0, 1.0), nodes, |x| {
                (std::f64::consts::PI * x).sin()
            })
            .unwrap();
            for _ in 0..50 {
                let mut u = GridFunction::zeros(0.0, 1.0, nodes).unwrap();
                for v in &mut u.values_mut()[1..nodes - 1] {
                    *v = rng.random_range(-1.0..1.0);
                }
                let exact = energy_gradient(&problem, &u).unwrap();
                let fd = fd_gradient(&problem, &u);
                let scale = exact.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let err = exact.iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                worst = worst.max(err / scale);
                states += 1;
            }
        }
    }
    Verdict {
        passed: worst <= 1e-5,
        detail: format!("{states} states at N = {nodes}, max relative error {worst:.2e} (<= 1e-5)"),
    }
}

/// 7. Local limit of the minimisers for G = t^2, f = 1 on (0, 1), N = 513. Also returns
/// every minimiser for criterion 8.
fn criterion_7() -> (Verdict, Vec<(String, SolveResult)>) {
    let start = Instant::now();
    let opts = SolveOptions::default();
    let base = DirichletProblem::new(power(2.0), 1.0, Scaling::BbmScaled, (0.0, 1.0), 513, |_| 1.0).unwrap();
    let local = solve(&base, &opts).unwrap();
    let mid = local.u.eval(0.5);
    let s_list = [0.6, 0.8, 0.9, 0.99];
    let template = base.with_s(0.6).unwrap();
    let report = gamma_run(&template, &s_list, &opts).unwrap();
    let mut solutions = vec![("s = 1".to_string(), local.clone()), ("G~ local".to_string(), report.local.clone())];
    let entries = report.successes();
    let gaps: Vec<f64> = entries.iter().map(|e| e.norm_gap).collect();
    let decreasing = entries.len() == s_list.len() && gaps.windows(2).all(|w| w[1] < w[0]);
    let mid99 = entries.last().map_or(f64::NAN, |e| e.result.u.eval(0.5));
    for e in &entries {
        solutions.push((format!("s = {}", e.s), e.result.clone()));
    }
    let (fast, time) = within_budget(start.elapsed(), Duration::from_secs(600));
    let passed = (mid - 0.0625).abs() <= 1e-4 && decreasing && (mid99 - 0.0625).abs() <= 0.1 * 0.0625 && fast;
    let gaps_text: Vec<String> = gaps.iter().map(|g| format!("{g:.3e}")).collect();
    (
        Verdict {
            passed,
            detail: format!(
                "u(1/2) = {mid:.7} (0.0625 +- 1e-4), gaps [{}] strictly decreasing: {decreasing}, s = 0.99 midpoint {mid99:.6} (within 10%), {time}",
                gaps_text.join(", ")
            ),
        },
        solutions,
    )
}

/// 8. Weak residual at every returned minimiser is at most 10x the gradient tolerance.
fn criterion_8(mut solutions: Vec<(String, SolveResult)>) -> Verdict {
    let opts = SolveOptions::default();
    let extra = [
        (power(3.0), 0.5, 65),
        (max23(), 0.7, 65),
        (OrliczFunction::power_log(3.0).unwrap(), 0.4, 33),
        (power(1.5), 0.8, 65),
    ];
    for (g, s, nodes) in extra {
        let name = format!("{g}, s = {s}");
        let problem = DirichletProblem::new(g, s, Scaling::BbmScaled, (-1.0, 1.0), nodes, |x| {
            1.0 + (3.0 * x).sin()
        })
        .unwrap();
        solutions.push((name, solve(&problem, &opts).unwrap()));
    }
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (name, r) in &solutions {
        let ratio = r.weak_residual / r.tolerance;
        worst = worst.max(ratio);
        if !r.converged || r.weak_residual > 10.0 * r.tolerance {
            bad.push(format!("{name}: residual {:.2e}, converged {}", r.weak_residual, r.converged));
        }
    }
    Verdict {
        passed: bad.is_empty(),
        detail: format!(
            "{} minimisers, max residual/tolerance {worst:.2e} (<= 10){}",
            solutions.len(),
            if bad.is_empty() { String::new() } else { format!(" failing: {}", bad.join("; ")) }
        ),
    }
}

/// 9. Poincare ratio within the explicit budget, 100 random functions, s in {0.3, 0.6, 0.9}.
fn criterion_9() -> Verdict {
    let cfg = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let functions = builtin_functions().unwrap();
    let mut checks = 0;
    let mut violations = 0;
    let mut tightest: f64 = 0.0;
    for k in 0..100 {
        let g = &functions[k % functions.len()];
        let left = rng.random_range(-2.0..0.0);
        let len = rng.random_range(0.25..4.0);
        let u = random_w0(&mut rng, left, left + len, 65).unwrap();
        for s in [0.3, 0.6, 0.9] {
            let r = poincare_check(g, s, &u, &cfg).unwrap();
            checks += 1;
            tightest = tightest.max(r.ratio / r.budget);
            if !r.holds() {
                violations += 1;
            }
        }
    }
    Verdict {
        passed: violations == 0,
        detail: format!("{checks} checks, {violations} violations, largest ratio/budget {tightest:.3e}"),
    }
}

#[test]
fn acceptance() {
    let mut verdicts = Vec::new();
    let mut record = |k: usize, v: Verdict| {
        println!("criterion {k}: {} - {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        verdicts.push((k, v.passed));
    };
    record(1, criterion_1());
    record(2, criterion_2());
    record(3, criterion_3());
    record(4, criterion_4());
    record(5, criterion_5());
    record(6, criterion_6());
    let (v7, solutions) = criterion_7();
    record(7, v7);
    record(8, criterion_8(solutions));
    record(9, criterion_9());
    let failed: Vec<usize> = verdicts.iter().filter(|(_, ok)| !ok).map(|(k, _)| *k).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
