//! The limit density `G~(a) = \int_{S^{n-1}} I_G(a |z_n|) dS_z`, with
//! `I_G(c) = \int_0^1 G(c t) dt / t`, and the sphere moments used by its closed forms.
//!
//! Sphere integrals of functions of `|z_n|` reduce to one dimension:
//!
//! * `n = 1`: `S^0 = {-1, 1}`, so `\int F = 2 F(1)`;
//! * `n = 2`: `\int F = 4 \int_0^{pi/2} F(sin t) dt`;
//! * `n = 3`: `\int F = 4 pi \int_0^1 F(x) dx` (Archimedes: `|z_3|` is uniform).

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{invalid_param, Error, Result};
use crate::orlicz::{CustomFunction, OrliczFunction, OrliczKind};
use crate::quadrature;

const SPHERE_TOL: f64 = 1e-12;
const RADIAL_TOL: f64 = 1e-12;

fn check_dimension(n: usize) -> Result<()> {
    if (1..=3).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// Volume of the unit ball, `omega_n`.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    check_dimension(n)?;
    Ok([2.0, PI, 4.0 * PI / 3.0][n - 1])
}

/// Surface area of the unit sphere, `n omega_n`.
pub fn sphere_area(n: usize) -> Result<f64> {
    Ok(n as f64 * unit_ball_volume(n)?)
}

/// `\int_{S^{n-1}} F(|z_n|) dS` where `F` may have kinks at `breaks` (in `|z_n|`).
pub fn sphere_integral<F: FnMut(f64) -> f64>(n: usize, mut f: F, breaks: &[f64]) -> Result<f64> {
    check_dimension(n)?;
    match n {
        1 => Ok(2.0 * f(1.0)),
        2 => {
            let angles: Vec<f64> = breaks
                .iter()
                .filter(|b| **b > 0.0 && **b < 1.0)
                .map(|b| b.asin())
                .collect();
            Ok(4.0 * quadrature::integrate(|t| f(t.sin()), 0.0, PI / 2.0, &angles, SPHERE_TOL)?)
        }
        _ => Ok(4.0 * PI * quadrature::integrate(f, 0.0, 1.0, breaks, SPHERE_TOL)?),
    }
}

/// `K_{n,p} = \int_{S^{n-1}} |z_n|^p dS`.
pub fn sphere_moment(n: usize, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(invalid_param(format!("moment exponent must be finite and >= 0 (got {p})")));
    }
    match n {
        1 => Ok(2.0),
        3 => Ok(4.0 * PI / (p + 1.0)),
        _ => sphere_integral(n, |x| x.powf(p), &[]),
    }
}

/// `\int_{S^{n-1}} |z_n|^p |log |z_n|| dS`.
pub fn sphere_log_moment(n: usize, p: f64) -> Result<f64> {
    partial_moments(n, p, 0.0, f64::INFINITY).map(|(_, l)| -l)
}

/// `(\int |z|^p dS, \int |z|^p log|z| dS)` over the band `lo <= |z_n| < hi`.
fn partial_moments(n: usize, p: f64, lo: f64, hi: f64) -> Result<(f64, f64)> {
    check_dimension(n)?;
    match n {
        1 => Ok(if lo <= 1.0 && 1.0 < hi { (2.0, 0.0) } else { (0.0, 0.0) }),
        3 => {
            let (lo, hi) = (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0));
            let q = p + 1.0;
            let pow = |x: f64| x.powf(q) / q;
            let log = |x: f64| if x == 0.0 { 0.0 } else { x.powf(q) * (x.ln() / q - 1.0 / (q * q)) };
            Ok((4.0 * PI * (pow(hi) - pow(lo)), 4.0 * PI * (log(hi) - log(lo))))
        }
        _ => {
            let (a, b) = (lo.clamp(0.0, 1.0).asin(), hi.clamp(0.0, 1.0).asin());
            let m = quadrature::integrate(|t| t.sin().powf(p), a, b, &[], SPHERE_TOL)?;
            let l = quadrature::integrate(
                |t| {
                    let x = t.sin();
                    if x == 0.0 {
                        0.0
                    } else {
                        x.powf(p) * x.ln()
                    }
                },
                a,
                b,
                &[],
                SPHERE_TOL,
            )?;
            Ok((4.0 * m, 4.0 * l))
        }
    }
}

fn check_amplitude(a: f64) -> Result<()> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(invalid_param(format!("amplitude must be finite and >= 0 (got {a})")));
    }
    Ok(())
}

/// `I_G(c) = \int_0^1 G(c t) dt / t` by adaptive quadrature (kinks of `G` split the interval).
fn radial_integral(g: &OrliczFunction, kinks: &[f64], c: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(0.0);
    }
    let breaks: Vec<f64> = kinks.iter().map(|k| k / c).collect();
    quadrature::integrate(|t| if t > 0.0 { g.value(c * t) / t } else { 0.0 }, 0.0, 1.0, &breaks, RADIAL_TOL)
}

/// Kinks of `x -> I_G(a x)` or `G(a x)` in the variable `x = |z_n|`.
fn sphere_breaks(kinks: &[f64], a: f64) -> Vec<f64> {
    kinks.iter().map(|k| k / a).filter(|x| *x > 0.0 && *x < 1.0).collect()
}

/// `G~(a)` by nested quadrature of the substituted form
/// `\int_0^1 \int_{S^{n-1}} G(a |z_n| t) dS dt / t`.
pub fn tilde_eval(g: &OrliczFunction, n: usize, a: f64) -> Result<f64> {
    check_dimension(n)?;
    check_amplitude(a)?;
    if a == 0.0 {
        return Ok(0.0);
    }
    let kinks = g.kinks();
    let mut failure = None;
    let value = sphere_integral(
        n,
        |x| match radial_integral(g, &kinks, a * x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        &sphere_breaks(&kinks, a),
    );
    match failure {
        Some(e) => Err(e),
        None => value,
    }
}

/// The pre-limit quantity `(1-s) \int_0^1 \int_{S^{n-1}} G(a |z_n| r^{1-s}) dS dr / r`,
/// integrated in `r` without the substitution that removes `s`.
///
/// With `r = e^{-v}` the integrand becomes `F(e^{-(1-s) v})`, `F(c) = \int_S G(a c |z_n|)`,
/// which decays at least like `e^{-(1-s) v}`; the `v`-range is cut where the bound
/// `F(c) <= |S| small_slope_sup a c` makes the remaining tail negligible.
pub fn tilde_prelimit(g: &OrliczFunction, n: usize, a: f64, s: f64) -> Result<f64> {
    check_dimension(n)?;
    check_amplitude(a)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid_param(format!("s must lie in (0, 1) (got {s})")));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let kinks = g.kinks();
    let area = sphere_area(n)?;
    let sphere_at = |c: f64| -> Result<f64> {
        sphere_integral(n, |x| g.value(a * c * x), &sphere_breaks(&kinks, a * c))
    };
    let scale = sphere_at(1.0)?.max(f64::MIN_POSITIVE);
    let slope = if g.small_slope_sup().is_finite() {
        g.small_slope_sup().max(g.value(1.0))
    } else {
        g.value(1.0)
    };
    // tail(V) <= area * slope * a * e^{-(1-s)V} / (1-s)
    let t = 1.0 - s;
    let bound = (area * slope * a / (t * 1e-14 * scale)).max(1.0);
    let v_max = bound.ln() / t;

    let mut breaks = Vec::new();
    for k in &kinks {
        // G(a c x) has a kink in c at c = k/(a x) for some x <= 1, i.e. c >= k/a.
        let c = k / a;
        if c < 1.0 {
            breaks.push(-c.ln() / t);
        }
    }
    let mut failure = None;
    let opts = quadrature::AdaptiveOptions {
        rel_tol: 1e-11,
        abs_tol: 1e-300,
        max_intervals: 20_000,
    };
    let est = quadrature::adaptive(
        |v| match sphere_at((-t * v).exp()) {
            Ok(x) => x,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        v_max,
        &breaks,
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(t * est?.value)
}

/// Families with explicit limit densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// `t^p`
    Power { p: f64 },
    /// `t^p |log t|`
    PowerAbsLog { p: f64 },
    /// `t^p (|log t| + 1)`
    PowerLog { p: f64 },
    /// `max(t^q, t^p)` with `1 < q < p`
    MaxPowers { q: f64, p: f64 },
}

impl ClosedForm {
    /// Recognises the families above among built-in functions.
    pub fn detect(g: &OrliczFunction) -> Option<Self> {
        match g.kind() {
            OrliczKind::Power { p } => Some(Self::Power { p: *p }),
            OrliczKind::PowerAbsLog { p } => Some(Self::PowerAbsLog { p: *p }),
            OrliczKind::PowerLog { p } => Some(Self::PowerLog { p: *p }),
            OrliczKind::PointwiseMax { parts } if parts.len() == 2 => {
                match (parts[0].kind(), parts[1].kind()) {
                    (OrliczKind::Power { p: a }, OrliczKind::Power { p: b }) if a != b => Some(Self::MaxPowers {
                        q: a.min(*b),
                        p: a.max(*b),
                    }),
                    _ => None,
                }
            }
            _ => None,
        }
    }
}

/// `G~(a)` from the explicit formulas of each family, in terms of full and partial
/// sphere moments.
///
/// For `a <= 1` these are `a^p K_{n,p}/p` (power),
/// `a^p/p (K_{n,p} |log a| + K_{log,n,p} + K_{n,p}/p)` (`t^p |log t|`) and
/// `K_{n,q} a^q / q` (max). For `a > 1` the sphere splits at `|z_n| = 1/a`, where
/// the argument `a |z_n|` crosses the kink of `G`.
pub fn tilde_closed_form(kind: ClosedForm, n: usize, a: f64) -> Result<f64> {
    check_dimension(n)?;
    check_amplitude(a)?;
    if a == 0.0 {
        return Ok(0.0);
    }
    let check_p = |p: f64| {
        if p.is_finite() && p > 1.0 {
            Ok(())
        } else {
            Err(invalid_param(format!("exponent must be > 1 (got {p})")))
        }
    };
    match kind {
        ClosedForm::Power { p } => {
            check_p(p)?;
            Ok(a.powf(p) * sphere_moment(n, p)? / p)
        }
        ClosedForm::PowerAbsLog { p } => {
            check_p(p)?;
            abs_log_closed_form(n, p, a)
        }
        ClosedForm::PowerLog { p } => {
            check_p(p)?;
            Ok(abs_log_closed_form(n, p, a)? + a.powf(p) * sphere_moment(n, p)? / p)
        }
        ClosedForm::MaxPowers { q, p } => {
            check_p(q)?;
            if !(p > q && p.is_finite()) {
                return Err(invalid_param(format!("max closed form needs 1 < q < p (got q = {q}, p = {p})")));
            }
            let t = 1.0 / a;
            let (low, _) = partial_moments(n, q, 0.0, t)?;
            let (high, _) = partial_moments(n, p, t, f64::INFINITY)?;
            let (area, _) = partial_moments(n, 0.0, t, f64::INFINITY)?;
            Ok(a.powf(q) * low / q + a.powf(p) * high / p + (1.0 / q - 1.0 / p) * area)
        }
    }
}

/// With `c = a |z|`, `I(c) = c^p (-log c)/p + c^p/p^2` for `c < 1` and
/// `c^p log c / p - c^p/p^2 + 2/p^2` for `c >= 1`.
fn abs_log_closed_form(n: usize, p: f64, a: f64) -> Result<f64> {
    let t = 1.0 / a;
    let la = a.ln();
    let ap = a.powf(p);
    let (m1, l1) = partial_moments(n, p, 0.0, t)?;
    let (m2, l2) = partial_moments(n, p, t, f64::INFINITY)?;
    let (area2, _) = partial_moments(n, 0.0, t, f64::INFINITY)?;
    let inner = ap * (-(la * m1 + l1) / p + m1 / (p * p));
    let outer = ap * ((la * m2 + l2) / p - m2 / (p * p)) + 2.0 / (p * p) * area2;
    Ok(inner + outer)
}

/// How a [`LimitDensity`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backing {
    ClosedForm(ClosedForm),
    Quadrature,
}

/// `G~` for a fixed base function and dimension.
#[derive(Debug, Clone)]
pub struct LimitDensity {
    base: OrliczFunction,
    dimension: usize,
    backing: Backing,
}

impl LimitDensity {
    pub fn new(base: OrliczFunction, dimension: usize) -> Result<Self> {
        check_dimension(dimension)?;
        let backing = match ClosedForm::detect(&base) {
            Some(c) => Backing::ClosedForm(c),
            None => Backing::Quadrature,
        };
        Ok(Self {
            base,
            dimension,
            backing,
        })
    }

    pub fn base(&self) -> &OrliczFunction {
        &self.base
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn backing(&self) -> Backing {
        self.backing
    }

    pub fn value(&self, a: f64) -> Result<f64> {
        let a = a.abs();
        if self.dimension == 1 {
            // S^0 = {-1, 1}: G~ = 2 I_G, and I_G has closed forms for most kinds.
            return Ok(2.0 * self.base.log_integral(a)?);
        }
        match self.backing {
            Backing::ClosedForm(c) => tilde_closed_form(c, self.dimension, a),
            Backing::Quadrature => tilde_eval(&self.base, self.dimension, a),
        }
    }

    /// `G~'(a) = a^{-1} \int_S G(a |z_n|) dS`.
    pub fn derivative(&self, a: f64) -> Result<f64> {
        let a = a.abs();
        if a == 0.0 {
            return Ok(0.0);
        }
        let g = &self.base;
        let breaks = sphere_breaks(&g.kinks(), a);
        Ok(sphere_integral(self.dimension, |x| g.value(a * x), &breaks)? / a)
    }

    /// `G~''(a) = a^{-1} \int_S g(a |z_n|) |z_n| dS - a^{-1} G~'(a)`.
    pub fn second_derivative(&self, a: f64) -> Result<f64> {
        let a = a.abs();
        let g = &self.base;
        if a == 0.0 {
            return Ok(sphere_integral(self.dimension, |x| g.second_derivative(0.0) * x * x, &[])?);
        }
        let breaks = sphere_breaks(&g.kinks(), a);
        let first = sphere_integral(self.dimension, |x| g.derivative(a * x) * x, &breaks)?;
        Ok((first - self.derivative(a)?) / a)
    }

    /// `G~` as an Orlicz function: exact weighted powers when the base is a sum of
    /// powers, otherwise a custom function backed by this density.
    pub fn to_orlicz(&self) -> Result<OrliczFunction> {
        if let Some(terms) = self.base.as_power_sum() {
            let mut parts = Vec::with_capacity(terms.len());
            let mut weights = Vec::with_capacity(terms.len());
            for (w, p) in terms {
                parts.push(OrliczFunction::power(p)?);
                weights.push(w * sphere_moment(self.dimension, p)? / p);
            }
            if parts.len() == 1 && weights[0] == 1.0 {
                return Ok(parts.pop().unwrap());
            }
            return OrliczFunction::weighted_sum(parts, weights);
        }
        let (v, d, dd) = (self.clone(), self.clone(), self.clone());
        OrliczFunction::custom(CustomFunction {
            name: format!("tilde[{}; n={}]", self.base, self.dimension),
            value: Arc::new(move |a| v.value(a).unwrap_or(f64::NAN)),
            derivative: Some(Arc::new(move |a| d.derivative(a).unwrap_or(f64::NAN))),
            second_derivative: Some(Arc::new(move |a| dd.second_derivative(a).unwrap_or(f64::NAN))),
            kinks: self.base.kinks(),
        })
    }
}

/// Lower equivalence constant `c_1 = K_{n,2q} / (2q)` with `q` the lower exponent of `G`.
pub fn equivalence_lower_constant(g: &OrliczFunction, n: usize) -> Result<f64> {
    let q = g.lower_exponent();
    Ok(sphere_moment(n, 2.0 * q)? / (2.0 * q))
}
