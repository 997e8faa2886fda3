//! Seeded randomized checks of the inequalities satisfied by Orlicz functions and
//! by the modulars of grid functions. Each check reports how many sampled inputs
//! violated it and the worst offender, instead of stopping at the first failure.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{self, GridFunction};
use crate::nonlocal::{fractional_modular, QuadratureConfig};
use crate::orlicz::OrliczFunction;

/// Relative roundoff slack for pointwise inequalities: `lhs <= rhs + ROUNDOFF max(1, |lhs|, |rhs|)`.
pub const ROUNDOFF: f64 = 1e-12;

/// Relative slack for inequalities between quadrature-evaluated modulars.
pub const QUADRATURE_SLACK: f64 = 1e-3;

/// Outcome of one inequality over many random inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: String,
    pub function: String,
    pub trials: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` seen (1 means equality).
    pub worst_ratio: f64,
    /// Inputs at the largest ratio.
    pub worst_input: Vec<f64>,
}

impl PropertyOutcome {
    fn new(name: &str, g: &OrliczFunction) -> Self {
        Self {
            name: name.to_string(),
            function: g.to_string(),
            trials: 0,
            violations: 0,
            worst_ratio: f64::NEG_INFINITY,
            worst_input: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn record(&mut self, lhs: f64, rhs: f64, slack: f64, input: &[f64]) {
        self.trials += 1;
        let ok = lhs.is_finite() && rhs.is_finite() && lhs <= rhs + slack;
        if !ok {
            self.violations += 1;
        }
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if !ok || ratio > self.worst_ratio {
            if !ok && self.violations > 1 && ratio <= self.worst_ratio {
                return;
            }
            self.worst_ratio = if lhs.is_finite() && rhs.is_finite() { ratio } else { f64::NAN };
            self.worst_input = input.to_vec();
        }
    }

    fn pointwise(&mut self, lhs: f64, rhs: f64, input: &[f64]) {
        let slack = ROUNDOFF * lhs.abs().max(rhs.abs()).max(1.0);
        self.record(lhs, rhs, slack, input);
    }

    fn modular(&mut self, lhs: f64, rhs: f64, input: &[f64]) {
        self.record(lhs, rhs, QUADRATURE_SLACK * rhs.abs(), input);
    }
}

impl std::fmt::Display for PropertyOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} [{}]: {} / {} violations, worst lhs/rhs = {:.6}",
            self.name, self.function, self.violations, self.trials, self.worst_ratio
        )
    }
}

/// `C_delta = C^k` with `k = ceil(log2(1 + 1/delta))`.
pub fn triangle_constant(doubling: f64, delta: f64) -> f64 {
    doubling.powf((1.0 + 1.0 / delta).log2().ceil())
}

/// Pointwise inequalities of an Orlicz function on `trials` random inputs each:
/// quasi-subadditivity, contraction, power bounds, the quasi-triangle inequality,
/// the lower bound `min(a, a^{2q}) <= G(a)` (for `G` normalised to `G(1) = 1`),
/// Young's inequality and `G*(g(t)) <= (p-1) G(t)`.
pub fn orlicz_suite(g: &OrliczFunction, trials: usize, seed: u64) -> Result<Vec<PropertyOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = g.doubling_constant();
    let p = g.upper_exponent();
    let q = g.lower_exponent();
    let normalized = if g.is_normalized() { g.clone() } else { g.normalize()? };

    let mut subadditive = PropertyOutcome::new("subadditivity G(a+b) <= C/2 (G(a)+G(b))", g);
    let mut contraction = PropertyOutcome::new("contraction G(ab) <= b G(a), b < 1", g);
    let mut power_upper = PropertyOutcome::new("power bound G(ab) <= a^p G(b), a >= 1", g);
    let mut triangle: Vec<(f64, PropertyOutcome)> = [0.1, 1.0, 10.0]
        .iter()
        .map(|&d| (d, PropertyOutcome::new(&format!("triangle G(a+b) <= C_d G(a) + (1+d)^p G(b), d = {d}"), g)))
        .collect();
    let mut scaling = PropertyOutcome::new("scaling t^{2q} G(a) <= G(at), t <= 1", g);
    let mut lower = PropertyOutcome::new("lower bound min(a, a^{2q}) <= G(a), G(1) = 1", g);
    let mut young = PropertyOutcome::new("Young a t <= G(t) + G*(a)", g);
    let mut conj = PropertyOutcome::new("G*(g(t)) <= (p-1) G(t)", g);

    for _ in 0..trials {
        let a = rng.random_range(0.0..100.0);
        let b = rng.random_range(0.0..100.0);
        subadditive.pointwise(g.value(a + b), c / 2.0 * (g.value(a) + g.value(b)), &[a, b]);

        let a = 10f64.powf(rng.random_range(-3.0..2.0));
        let b = rng.random_range(0.0f64..1.0);
        contraction.pointwise(g.value(a * b), b * g.value(a), &[a, b]);

        let a: f64 = rng.random_range(1.0..10.0);
        let b = rng.random_range(0.0..10.0);
        power_upper.pointwise(g.value(a * b), a.powf(p) * g.value(b), &[a, b]);

        let a = rng.random_range(0.0..100.0);
        let b = rng.random_range(0.0..100.0);
        for (d, out) in triangle.iter_mut() {
            let rhs = triangle_constant(c, *d) * g.value(a) + (1.0 + *d).powf(p) * g.value(b);
            out.pointwise(g.value(a + b), rhs, &[a, b]);
        }

        let a = 10f64.powf(rng.random_range(-3.0..2.0));
        let t = 1.0 - rng.random_range(0.0f64..1.0);
        scaling.pointwise(t.powf(2.0 * q) * g.value(a), g.value(a * t), &[a, t]);

        let a: f64 = rng.random_range(0.0..10.0);
        lower.pointwise(a.min(a.powf(2.0 * q)), normalized.value(a), &[a]);

        let a = rng.random_range(0.0..20.0);
        let t = rng.random_range(0.0..5.0);
        young.pointwise(a * t, g.value(t) + g.conjugate(a)?, &[a, t]);

        let t = 10f64.powf(rng.random_range(-2.0..1.0));
        conj.pointwise(g.conjugate(g.derivative(t))?, (p - 1.0) * g.value(t), &[t]);
    }
    let mut out = vec![subadditive, contraction, power_upper];
    out.extend(triangle.into_iter().map(|(_, o)| o));
    out.extend([scaling, lower, young, conj]);
    Ok(out)
}

/// Random function in the discrete `W_0` cone on `(left, right)`: a sum of one to
/// three signed hats of random centre and width, plus small nodal noise.
pub fn random_w0(rng: &mut ChaCha8Rng, left: f64, right: f64, nodes: usize) -> Result<GridFunction> {
    let len = right - left;
    let count = rng.random_range(1..4);
    let bumps: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            (
                left + len * rng.random_range(0.2..0.8),
                len * rng.random_range(0.1..0.4),
                rng.random_range(-2.0..2.0),
            )
        })
        .collect();
    let noise: Vec<f64> = (0..nodes).map(|_| rng.random_range(-0.05..0.05)).collect();
    let mut u = GridFunction::from_fn(left, right, nodes, |x| {
        bumps.iter().map(|&(c, w, a)| a * (1.0 - ((x - c) / w).abs()).max(0.0)).sum::<f64>()
    })?;
    for (v, n) in u.values_mut().iter_mut().zip(noise) {
        *v += n;
    }
    let v = u.values_mut();
    v[0] = 0.0;
    v[nodes - 1] = 0.0;
    Ok(u)
}

/// Settings of [`modular_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModularSuiteOptions {
    pub functions: usize,
    pub nodes: usize,
    pub s_samples: Vec<f64>,
    pub mollifier_eps: f64,
    pub truncation_radii: Vec<f64>,
    pub seed: u64,
    pub quadrature: QuadratureConfig,
}

impl Default for ModularSuiteOptions {
    fn default() -> Self {
        Self {
            functions: 50,
            nodes: 257,
            s_samples: vec![0.3, 0.6, 0.9],
            mollifier_eps: 0.1,
            truncation_radii: vec![0.5],
            seed: 7,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// Inequalities between modulars of random functions on `(-1, 1)` (one dimension,
/// `n omega_n = 2`): mollification and truncation bounds, the translation estimate
/// for `|h| < 1/2`, the bound by the gradient and the function, and the comparison
/// of two fractional orders. Each function is checked at every `s` (pairs of `s` for
/// the comparison).
pub fn modular_suite(g: &OrliczFunction, opts: &ModularSuiteOptions) -> Result<Vec<PropertyOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let c = g.doubling_constant();
    let cfg = &opts.quadrature;
    let mut moll = PropertyOutcome::new("mollification Phi_s(u_eps) <= Phi_s(u)", g);
    let mut trunc = PropertyOutcome::new(
        "truncation Phi_s(u_k) <= Phi_s(u) + C^2 (1/s + 1/(k(1-s))) Phi_G(u)",
        g,
    );
    let mut transl = PropertyOutcome::new("translation Phi_G(u(.+h) - u) <= 2^{1+s} C |h|^s Phi_s(u)", g);
    let mut gradient = PropertyOutcome::new("Phi_s(u) <= 2/(1-s) Phi_G(|u'|) + 4C/s Phi_G(u)", g);
    let mut orders = PropertyOutcome::new(
        "(1-s1) Phi_s1 <= 2^{1-s1} (1-s2) Phi_s2 + 4C (1-s1)/s1 Phi_G(u)",
        g,
    );
    for _ in 0..opts.functions {
        let u = random_w0(&mut rng, -1.0, 1.0, opts.nodes)?;
        let phi = grid::modular(g, &u);
        let phi_grad = grid::gradient_modular(g, &u);
        let u_eps = grid::mollify(&u, opts.mollifier_eps)?;
        let truncated: Vec<(f64, GridFunction)> = opts
            .truncation_radii
            .iter()
            .map(|&k| Ok((k, grid::truncate(&u, k)?)))
            .collect::<Result<_>>()?;
        let mut phi_s = Vec::with_capacity(opts.s_samples.len());
        for &s in &opts.s_samples {
            let ps = fractional_modular(g, s, &u, cfg)?;
            phi_s.push(ps);
            moll.modular(fractional_modular(g, s, &u_eps, cfg)?, ps, &[s]);
            for (k, uk) in &truncated {
                let rhs = ps + c * c * (1.0 / s + 1.0 / (k * (1.0 - s))) * phi;
                trunc.modular(fractional_modular(g, s, uk, cfg)?, rhs, &[s, *k]);
            }
            let h = rng.random_range(-0.5..0.5);
            let lhs = grid::translation_modular(g, &u, h);
            transl.modular(lhs, 2f64.powf(1.0 + s) * c * h.abs().powf(s) * ps, &[s, h]);
            gradient.modular(ps, 2.0 / (1.0 - s) * phi_grad + 4.0 * c / s * phi, &[s]);
        }
        for i in 0..opts.s_samples.len() {
            for j in i + 1..opts.s_samples.len() {
                let (s1, s2) = (opts.s_samples[i], opts.s_samples[j]);
                let lhs = (1.0 - s1) * phi_s[i];
                let rhs = 2f64.powf(1.0 - s1) * (1.0 - s2) * phi_s[j] + 4.0 * c * (1.0 - s1) / s1 * phi;
                orders.modular(lhs, rhs, &[s1, s2]);
            }
        }
    }
    Ok(vec![moll, trunc, transl, gradient, orders])
}

/// Built-in Orlicz functions that satisfy every hypothesis on the screening grid.
pub fn builtin_functions() -> Result<Vec<OrliczFunction>> {
    let p2 = OrliczFunction::power(2.0)?;
    let p3 = OrliczFunction::power(3.0)?;
    Ok(vec![
        OrliczFunction::power(1.5)?,
        p2.clone(),
        p3.clone(),
        OrliczFunction::power_log(3.0)?,
        OrliczFunction::pointwise_max(vec![p2.clone(), p3.clone()])?,
        OrliczFunction::weighted_sum(vec![p2.clone(), p3], vec![0.5, 0.5])?,
        OrliczFunction::composition(p2, OrliczFunction::power_log(3.0)?)?,
    ])
}
