//! Orlicz functions: construction, evaluation, conjugates and structural constants.
//!
//! An [`OrliczFunction`] is an immutable, cheaply clonable evaluator for a convex
//! increasing `G` with `G(0) = 0`, together with the constants every downstream
//! inequality depends on:
//!
//! * the doubling constant `C` with `G(2x) <= C G(x)`,
//! * the upper exponent `p` with `x g(x) <= p G(x)` (`g = G'`),
//! * the lower exponent `q = log2 C`, so that `t^{2q} G(a) <= G(a t)` for `t <= 1`,
//! * the small-slope supremum `sup_{x in (0,1)} G(x)/x`.
//!
//! Pure powers carry exact constants. Every other kind estimates them by
//! maximising the defining ratios on a log-spaced grid that also contains the
//! function's kinks, then inflates `C` and `p` by [`SAFETY_FACTOR`].

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid_param, Error, Result};
use crate::quadrature;

/// Inflation applied to grid-estimated doubling constants and exponents.
pub const SAFETY_FACTOR: f64 = 1.01;

/// Number of log-spaced points on `(1e-6, 1e6)` used for constant estimation.
pub const ESTIMATION_GRID: usize = 512;

const GRID_MIN: f64 = 1e-6;
const GRID_MAX: f64 = 1e6;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied Orlicz function. Derivatives fall back to finite differences.
#[derive(Clone)]
pub struct CustomFunction {
    pub name: String,
    pub value: ScalarFn,
    pub derivative: Option<ScalarFn>,
    pub second_derivative: Option<ScalarFn>,
    /// Points where `g` may jump.
    pub kinks: Vec<f64>,
}

impl fmt::Debug for CustomFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFunction")
            .field("name", &self.name)
            .field("kinks", &self.kinks)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum OrliczKind {
    /// `t^p`
    Power { p: f64 },
    /// `t^p (|log t| + 1)`
    PowerLog { p: f64 },
    /// `t^p |log t|`; not monotone near `t = 1`, kept for screening and the
    /// limit-density closed forms.
    PowerAbsLog { p: f64 },
    WeightedSum {
        parts: Vec<OrliczFunction>,
        weights: Vec<f64>,
    },
    PointwiseMax { parts: Vec<OrliczFunction> },
    /// `outer(inner(t))`
    Composition {
        outer: OrliczFunction,
        inner: OrliczFunction,
    },
    Custom(CustomFunction),
}

/// Structural constants of an Orlicz function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralConstants {
    pub doubling: f64,
    pub upper_exponent: f64,
    pub lower_exponent: f64,
    pub small_slope_sup: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    Sum,
    Max,
}

#[derive(Debug, Clone)]
pub struct OrliczFunction {
    kind: Arc<OrliczKind>,
    constants: StructuralConstants,
    normalized: bool,
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(invalid_param(format!(
            "exponent must be finite and > 1 (got {p}); G(x)/x would not vanish at 0"
        )));
    }
    Ok(())
}

impl OrliczFunction {
    /// `G(t) = t^p` with exact constants `C = 2^p`, `p`, `q = p`, small-slope sup 1.
    pub fn power(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self {
            kind: Arc::new(OrliczKind::Power { p }),
            constants: StructuralConstants {
                doubling: 2f64.powf(p),
                upper_exponent: p,
                lower_exponent: p,
                small_slope_sup: 1.0,
            },
            normalized: true,
        })
    }

    /// `G(t) = t^p (|log t| + 1)`, constants estimated on the grid.
    pub fn power_log(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Self::from_kind(OrliczKind::PowerLog { p })
    }

    /// `G(t) = t^p |log t|`.
    ///
    /// This is not an Orlicz function (it decreases on `(e^{-1/p}, 1)` and vanishes
    /// at 1), so its doubling constant and exponents are infinite. It exists for
    /// [`verify_orlicz`] screening and for the limit-density closed forms.
    pub fn power_abs_log(p: f64) -> Result<Self> {
        check_exponent(p)?;
        let e = std::f64::consts::E;
        Ok(Self {
            kind: Arc::new(OrliczKind::PowerAbsLog { p }),
            constants: StructuralConstants {
                doubling: f64::INFINITY,
                upper_exponent: f64::INFINITY,
                lower_exponent: f64::INFINITY,
                small_slope_sup: 1.0 / ((p - 1.0) * e),
            },
            normalized: false,
        })
    }

    pub fn weighted_sum(parts: Vec<OrliczFunction>, weights: Vec<f64>) -> Result<Self> {
        if parts.is_empty() {
            return Err(invalid_param("weighted sum needs at least one part"));
        }
        if weights.len() != parts.len() {
            return Err(invalid_param(format!(
                "{} weights given for {} parts",
                weights.len(),
                parts.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid_param("weights must be finite and nonnegative"));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(invalid_param("weights must not all be zero"));
        }
        Self::from_kind(OrliczKind::WeightedSum { parts, weights })
    }

    /// Pointwise maximum; rejected when the result fails the H1 screen.
    pub fn pointwise_max(parts: Vec<OrliczFunction>) -> Result<Self> {
        if parts.is_empty() {
            return Err(invalid_param("pointwise max needs at least one part"));
        }
        let candidate = Self::from_kind_unchecked(OrliczKind::PointwiseMax { parts });
        let report = verify_orlicz(&candidate, 64)?;
        if !report.h1.passed {
            return Err(Error::InvalidFunction(format!(
                "pointwise max is not convex and increasing: {}",
                report.h1.detail
            )));
        }
        candidate.with_estimated_constants()
    }

    pub fn composition(outer: OrliczFunction, inner: OrliczFunction) -> Result<Self> {
        Self::from_kind(OrliczKind::Composition { outer, inner })
    }

    pub fn custom(custom: CustomFunction) -> Result<Self> {
        Self::from_kind(OrliczKind::Custom(custom))
    }

    /// Weighted sum or pointwise maximum of `parts`. Weights are ignored for `Max`.
    pub fn combination(mode: CombineMode, parts: Vec<OrliczFunction>, weights: Vec<f64>) -> Result<Self> {
        match mode {
            CombineMode::Sum => Self::weighted_sum(parts, weights),
            CombineMode::Max => Self::pointwise_max(parts),
        }
    }

    /// `G / G(1)`.
    pub fn normalize(&self) -> Result<Self> {
        let g1 = self.value(1.0);
        if !(g1 > 0.0 && g1.is_finite()) {
            return Err(Error::InvalidFunction(format!("cannot normalize: G(1) = {g1}")));
        }
        if self.normalized {
            return Ok(self.clone());
        }
        Self::weighted_sum(vec![self.clone()], vec![1.0 / g1])
    }

    fn from_kind_unchecked(kind: OrliczKind) -> Self {
        let mut out = Self {
            kind: Arc::new(kind),
            constants: StructuralConstants {
                doubling: f64::NAN,
                upper_exponent: f64::NAN,
                lower_exponent: f64::NAN,
                small_slope_sup: f64::NAN,
            },
            normalized: false,
        };
        out.normalized = (out.value(1.0) - 1.0).abs() <= 1e-12;
        out
    }

    fn with_estimated_constants(mut self) -> Result<Self> {
        self.constants = estimate_constants(&self)?;
        Ok(self)
    }

    fn from_kind(kind: OrliczKind) -> Result<Self> {
        Self::from_kind_unchecked(kind).with_estimated_constants()
    }

    pub fn kind(&self) -> &OrliczKind {
        &self.kind
    }

    pub fn constants(&self) -> StructuralConstants {
        self.constants
    }

    pub fn doubling_constant(&self) -> f64 {
        self.constants.doubling
    }

    pub fn upper_exponent(&self) -> f64 {
        self.constants.upper_exponent
    }

    pub fn lower_exponent(&self) -> f64 {
        self.constants.lower_exponent
    }

    pub fn small_slope_sup(&self) -> f64 {
        self.constants.small_slope_sup
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `G(|t|)`.
    pub fn value(&self, t: f64) -> f64 {
        let t = t.abs();
        if t == 0.0 {
            return 0.0;
        }
        match &*self.kind {
            OrliczKind::Power { p } => t.powf(*p),
            OrliczKind::PowerLog { p } => t.powf(*p) * (t.ln().abs() + 1.0),
            OrliczKind::PowerAbsLog { p } => t.powf(*p) * t.ln().abs(),
            OrliczKind::WeightedSum { parts, weights } => parts
                .iter()
                .zip(weights)
                .map(|(g, w)| if *w == 0.0 { 0.0 } else { w * g.value(t) })
                .sum(),
            OrliczKind::PointwiseMax { parts } => parts
                .iter()
                .map(|g| g.value(t))
                .fold(f64::NEG_INFINITY, f64::max),
            OrliczKind::Composition { outer, inner } => outer.value(inner.value(t)),
            OrliczKind::Custom(c) => (c.value)(t),
        }
    }

    /// Right derivative `g(t)` for `t >= 0`.
    pub fn derivative(&self, t: f64) -> f64 {
        let t = t.abs();
        match &*self.kind {
            OrliczKind::Power { p } => {
                if t == 0.0 {
                    0.0
                } else {
                    p * t.powf(p - 1.0)
                }
            }
            OrliczKind::PowerLog { p } => {
                if t == 0.0 {
                    return 0.0;
                }
                let l = t.ln();
                if t < 1.0 {
                    t.powf(p - 1.0) * (p * (1.0 - l) - 1.0)
                } else {
                    t.powf(p - 1.0) * (p * (1.0 + l) + 1.0)
                }
            }
            OrliczKind::PowerAbsLog { p } => {
                if t == 0.0 {
                    return 0.0;
                }
                let l = t.ln();
                let core = t.powf(p - 1.0) * (p * l + 1.0);
                if t < 1.0 {
                    -core
                } else {
                    core
                }
            }
            OrliczKind::WeightedSum { parts, weights } => parts
                .iter()
                .zip(weights)
                .map(|(g, w)| if *w == 0.0 { 0.0 } else { w * g.derivative(t) })
                .sum(),
            OrliczKind::PointwiseMax { parts } => self.active_part(parts, t).derivative(t),
            OrliczKind::Composition { outer, inner } => {
                outer.derivative(inner.value(t)) * inner.derivative(t)
            }
            OrliczKind::Custom(c) => match &c.derivative {
                Some(d) => d(t),
                None => finite_difference(|x| (c.value)(x), t),
            },
        }
    }

    /// Derivative of `g`, i.e. `G''(t)` (right-sided at kinks).
    pub fn second_derivative(&self, t: f64) -> f64 {
        let t = t.abs();
        match &*self.kind {
            OrliczKind::Power { p } => {
                if t == 0.0 {
                    if *p < 2.0 {
                        f64::INFINITY
                    } else if *p == 2.0 {
                        2.0
                    } else {
                        0.0
                    }
                } else {
                    p * (p - 1.0) * t.powf(p - 2.0)
                }
            }
            OrliczKind::PowerLog { p } => {
                let l = t.ln();
                if t < 1.0 {
                    t.powf(p - 2.0) * ((p - 1.0) * (p * (1.0 - l) - 1.0) - p)
                } else {
                    t.powf(p - 2.0) * ((p - 1.0) * (p * (1.0 + l) + 1.0) + p)
                }
            }
            OrliczKind::PowerAbsLog { p } => {
                let l = t.ln();
                let core = t.powf(p - 2.0) * ((p - 1.0) * (p * l + 1.0) + p);
                if t < 1.0 {
                    -core
                } else {
                    core
                }
            }
            OrliczKind::WeightedSum { parts, weights } => parts
                .iter()
                .zip(weights)
                .map(|(g, w)| if *w == 0.0 { 0.0 } else { w * g.second_derivative(t) })
                .sum(),
            OrliczKind::PointwiseMax { parts } => self.active_part(parts, t).second_derivative(t),
            OrliczKind::Composition { outer, inner } => {
                let gi = inner.derivative(t);
                let x = inner.value(t);
                outer.second_derivative(x) * gi * gi + outer.derivative(x) * inner.second_derivative(t)
            }
            OrliczKind::Custom(c) => match (&c.second_derivative, &c.derivative) {
                (Some(d2), _) => d2(t),
                (None, Some(d)) => finite_difference(|x| d(x), t),
                (None, None) => {
                    let f = |x: f64| finite_difference(|y| (c.value)(y), x);
                    finite_difference(f, t)
                }
            },
        }
    }

    /// The part attaining the maximum at `t`; ties go to the larger right derivative.
    fn active_part<'a>(&self, parts: &'a [OrliczFunction], t: f64) -> &'a OrliczFunction {
        let top = parts
            .iter()
            .map(|g| g.value(t))
            .fold(f64::NEG_INFINITY, f64::max);
        let tie = 1e-13 * top.abs().max(f64::MIN_POSITIVE);
        parts
            .iter()
            .filter(|g| (g.value(t) - top).abs() <= tie)
            .max_by(|a, b| a.derivative(t).total_cmp(&b.derivative(t)))
            .unwrap_or(&parts[0])
    }

    /// Points in `(0, inf)` where `g` may be discontinuous.
    pub fn kinks(&self) -> Vec<f64> {
        let mut out = match &*self.kind {
            OrliczKind::Power { .. } => vec![],
            OrliczKind::PowerLog { .. } | OrliczKind::PowerAbsLog { .. } => vec![1.0],
            OrliczKind::WeightedSum { parts, .. } => parts.iter().flat_map(|g| g.kinks()).collect(),
            OrliczKind::PointwiseMax { parts } => {
                let mut k: Vec<f64> = parts.iter().flat_map(|g| g.kinks()).collect();
                k.extend(crossovers(parts));
                k
            }
            OrliczKind::Composition { outer, inner } => {
                let mut k = inner.kinks();
                for y in outer.kinks() {
                    if let Some(x) = preimage(inner, y) {
                        k.push(x);
                    }
                }
                k
            }
            OrliczKind::Custom(c) => c.kinks.clone(),
        };
        out.retain(|x| x.is_finite() && *x > 0.0);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
        out
    }

    /// `[(weight, exponent)]` when `G` is a nonnegative combination of pure powers.
    pub fn as_power_sum(&self) -> Option<Vec<(f64, f64)>> {
        match &*self.kind {
            OrliczKind::Power { p } => Some(vec![(1.0, *p)]),
            OrliczKind::WeightedSum { parts, weights } => {
                let mut out = Vec::new();
                for (g, w) in parts.iter().zip(weights) {
                    for (c, p) in g.as_power_sum()? {
                        out.push((w * c, p));
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// `I_G(z) = \int_0^z G(x)/x dx`, the radial integral behind both the limit
    /// density and the exterior part of the fractional modular.
    pub fn log_integral(&self, z: f64) -> Result<f64> {
        let z = z.abs();
        if z == 0.0 {
            return Ok(0.0);
        }
        Ok(match &*self.kind {
            OrliczKind::Power { p } => z.powf(*p) / p,
            OrliczKind::PowerLog { p } => z.powf(*p) / p + abs_log_integral(*p, z),
            OrliczKind::PowerAbsLog { p } => abs_log_integral(*p, z),
            OrliczKind::WeightedSum { parts, weights } => {
                let mut acc = 0.0;
                for (g, w) in parts.iter().zip(weights) {
                    if *w != 0.0 {
                        acc += w * g.log_integral(z)?;
                    }
                }
                acc
            }
            _ => {
                let kinks = self.kinks();
                quadrature::integrate(|x| if x > 0.0 { self.value(x) / x } else { 0.0 }, 0.0, z, &kinks, 1e-13)?
            }
        })
    }

    /// Complementary function `G*(a) = sup_{t>0} (a t - G(t))`.
    ///
    /// The maximiser is bracketed by doubling `t` from 1 until `a t - G(t)`
    /// decreases, then located by golden-section search to relative tolerance
    /// `1e-10`.
    pub fn conjugate(&self, a: f64) -> Result<f64> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(invalid_param(format!("conjugate argument must be finite and >= 0 (got {a})")));
        }
        if a == 0.0 {
            return Ok(0.0);
        }
        let f = |t: f64| a * t - self.value(t);
        let mut prev2 = 0.0;
        let mut prev = 0.0;
        let mut f_prev = 0.0;
        let mut t = 1.0;
        let mut best = 0.0f64;
        loop {
            let ft = f(t);
            best = best.max(ft);
            if ft < f_prev {
                break;
            }
            if t >= 2f64.powi(64) {
                return Err(Error::NumericOverflow(format!(
                    "a t - G(t) still increasing at t = 2^64 for a = {a}; G is not superlinear"
                )));
            }
            prev2 = prev;
            prev = t;
            f_prev = ft;
            t *= 2.0;
        }
        let (mut lo, mut hi) = (prev2, t);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = f(x1);
        let mut f2 = f(x2);
        for _ in 0..400 {
            best = best.max(f1).max(f2);
            let scale = x1.abs().max(x2.abs()).max(f64::MIN_POSITIVE);
            if hi - lo <= 1e-10 * scale {
                break;
            }
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = f(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = f(x1);
            }
        }
        Ok(best.max(f1).max(f2).max(0.0))
    }

    /// Screens strict convexity: `g` strictly increasing on a log grid.
    pub fn is_strictly_convex(&self) -> bool {
        let grid = log_grid(128, 1e-4, 1e4);
        grid.windows(2)
            .all(|w| self.derivative(w[1]) > self.derivative(w[0]))
    }
}

impl fmt::Display for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.kind {
            OrliczKind::Power { p } => write!(f, "power({p})"),
            OrliczKind::PowerLog { p } => write!(f, "power_log({p})"),
            OrliczKind::PowerAbsLog { p } => write!(f, "power_abs_log({p})"),
            OrliczKind::WeightedSum { parts, weights } => {
                write!(f, "sum(")?;
                for (i, (g, w)) in parts.iter().zip(weights).enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{w}*{g}")?;
                }
                write!(f, ")")
            }
            OrliczKind::PointwiseMax { parts } => {
                write!(f, "max(")?;
                for (i, g) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, ")")
            }
            OrliczKind::Composition { outer, inner } => write!(f, "compose({outer}, {inner})"),
            OrliczKind::Custom(c) => write!(f, "custom({})", c.name),
        }
    }
}

/// `\int_0^z x^{p-1} |log x| dx`.
fn abs_log_integral(p: f64, z: f64) -> f64 {
    let zp = z.powf(p);
    let l = z.ln();
    if z <= 1.0 {
        -zp * l / p + zp / (p * p)
    } else {
        zp * l / p - zp / (p * p) + 2.0 / (p * p)
    }
}

fn finite_difference<F: Fn(f64) -> f64>(f: F, t: f64) -> f64 {
    let h = 1e-6 * t.max(1e-6);
    if t > h {
        (f(t + h) - f(t - h)) / (2.0 * h)
    } else {
        (f(t + h) - f(t)) / h
    }
}

pub(crate) fn log_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Solves `inner(x) = y` by bisection; `inner` is increasing.
fn preimage(inner: &OrliczFunction, y: f64) -> Option<f64> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while inner.value(hi) < y {
        hi *= 2.0;
        if hi > 1e300 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inner.value(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Points where two parts of a pointwise max exchange the lead.
fn crossovers(parts: &[OrliczFunction]) -> Vec<f64> {
    let grid = log_grid(ESTIMATION_GRID, GRID_MIN, GRID_MAX);
    let mut out = Vec::new();
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            let diff = |x: f64| parts[i].value(x) - parts[j].value(x);
            for w in grid.windows(2) {
                let (d0, d1) = (diff(w[0]), diff(w[1]));
                if d0 == 0.0 {
                    out.push(w[0]);
                } else if d0.signum() != d1.signum() && d1 != 0.0 {
                    let (mut lo, mut hi) = (w[0], w[1]);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if diff(mid).signum() == d0.signum() {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    out.push(0.5 * (lo + hi));
                }
            }
        }
    }
    out
}

/// Estimation grid: log-spaced points plus every kink `k` and `k/2` (so that the
/// doubling ratio sees kinks at both `x` and `2x`), each with one-sided neighbours.
fn estimation_grid(g: &OrliczFunction) -> Vec<f64> {
    let mut grid = log_grid(ESTIMATION_GRID, GRID_MIN, GRID_MAX);
    for k in g.kinks() {
        for c in [k, 0.5 * k] {
            grid.extend([c, c * (1.0 - 1e-9), c * (1.0 + 1e-9)]);
        }
    }
    grid.push(1.0);
    grid.retain(|x| *x > 0.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Grid estimates of `(C, p, q, sup G(x)/x)` with the safety factor applied.
pub fn estimate_constants(g: &OrliczFunction) -> Result<StructuralConstants> {
    let grid = estimation_grid(g);
    let mut doubling = 0.0f64;
    let mut exponent = 0.0f64;
    let mut slope = 0.0f64;
    for &x in &grid {
        let gx = g.value(x);
        let g2x = g.value(2.0 * x);
        let dx = g.derivative(x);
        let ratio = g2x / gx;
        let index = x * dx / gx;
        if !(gx.is_finite() && g2x.is_finite() && dx.is_finite() && ratio.is_finite() && index.is_finite()) {
            return Err(Error::InvalidFunction(format!(
                "non-finite ratio at x = {x:e} (G = {gx:e}, G(2x) = {g2x:e}, g = {dx:e})"
            )));
        }
        doubling = doubling.max(ratio);
        exponent = exponent.max(index);
        if x <= 1.0 {
            slope = slope.max(gx / x);
        }
    }
    let doubling = SAFETY_FACTOR * doubling;
    Ok(StructuralConstants {
        doubling,
        upper_exponent: SAFETY_FACTOR * exponent,
        lower_exponent: doubling.log2(),
        small_slope_sup: slope,
    })
}

/// Outcome of one hypothesis screen.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub passed: bool,
    /// Sample point with the largest violation (or the tightest margin when passing).
    pub worst_point: Option<f64>,
    pub detail: String,
}

/// Screening report for the three defining hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczReport {
    /// Continuity, convexity, monotonicity and `G(0) = 0`.
    pub h1: HypothesisCheck,
    /// Doubling condition with the stored constant.
    pub h2: HypothesisCheck,
    /// Superlinearity at zero.
    pub h3: HypothesisCheck,
}

impl OrliczReport {
    pub fn all_passed(&self) -> bool {
        self.h1.passed && self.h2.passed && self.h3.passed
    }
}

/// Numerical screen of the Orlicz hypotheses on `grid_size` log-spaced points on
/// `(1e-6, 1e6)` plus `grid_size` uniform points on `(0, 4]`.
pub fn verify_orlicz(g: &OrliczFunction, grid_size: usize) -> Result<OrliczReport> {
    if grid_size < 16 {
        return Err(invalid_param(format!("grid_size must be >= 16 (got {grid_size})")));
    }
    let mut grid = log_grid(grid_size, GRID_MIN, GRID_MAX);
    grid.extend((1..=grid_size).map(|i| 4.0 * i as f64 / grid_size as f64));
    for k in g.kinks() {
        grid.extend([k, k * (1.0 - 1e-6), k * (1.0 + 1e-6)]);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    Ok(OrliczReport {
        h1: screen_h1(g, &grid),
        h2: screen_h2(g, &grid),
        h3: screen_h3(g),
    })
}

fn screen_h1(g: &OrliczFunction, grid: &[f64]) -> HypothesisCheck {
    let g0 = g.value(0.0);
    if g0 != 0.0 {
        return HypothesisCheck {
            passed: false,
            worst_point: Some(0.0),
            detail: format!("G(0) = {g0}"),
        };
    }
    let vals: Vec<f64> = grid.iter().map(|&x| g.value(x)).collect();
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        return HypothesisCheck {
            passed: false,
            worst_point: Some(grid[i]),
            detail: "non-finite value".into(),
        };
    }
    // Monotonicity, including the segment from 0.
    let mut worst_drop = 0.0f64;
    let mut worst_drop_at = None;
    let mut prev = 0.0;
    for (x, v) in grid.iter().zip(&vals) {
        let drop = prev - v;
        if drop > 1e-12 * prev.abs() && drop > worst_drop {
            worst_drop = drop;
            worst_drop_at = Some(*x);
        }
        prev = *v;
    }
    if let Some(x) = worst_drop_at {
        return HypothesisCheck {
            passed: false,
            worst_point: Some(x),
            detail: format!("G decreases by {worst_drop:e} at x = {x:e}"),
        };
    }
    // Convexity on consecutive triples.
    let mut worst_excess = 0.0f64;
    let mut worst_at = None;
    for i in 1..grid.len() - 1 {
        let (x0, x1, x2) = (grid[i - 1], grid[i], grid[i + 1]);
        let lam = (x2 - x1) / (x2 - x0);
        let chord = lam * vals[i - 1] + (1.0 - lam) * vals[i + 1];
        let excess = vals[i] - chord;
        if excess > 1e-12 * chord.abs() && excess / chord.abs().max(f64::MIN_POSITIVE) > worst_excess {
            worst_excess = excess / chord.abs().max(f64::MIN_POSITIVE);
            worst_at = Some(x1);
        }
    }
    match worst_at {
        Some(x) => HypothesisCheck {
            passed: false,
            worst_point: Some(x),
            detail: format!("G lies above its chord by {worst_excess:e} (relative) at x = {x:e}"),
        },
        None => HypothesisCheck {
            passed: true,
            worst_point: None,
            detail: "nondecreasing and convex on grid".into(),
        },
    }
}

fn screen_h2(g: &OrliczFunction, grid: &[f64]) -> HypothesisCheck {
    let c = g.doubling_constant();
    let mut worst = 0.0f64;
    let mut worst_at = None;
    for &x in grid {
        let ratio = g.value(2.0 * x) / g.value(x);
        let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
        if ratio > worst {
            worst = ratio;
            worst_at = Some(x);
        }
    }
    let passed = c.is_finite() && worst.is_finite() && worst <= c * (1.0 + 1e-12);
    HypothesisCheck {
        passed,
        worst_point: worst_at,
        detail: format!("max G(2x)/G(x) = {worst:e} against C = {c:e}"),
    }
}

fn screen_h3(g: &OrliczFunction) -> HypothesisCheck {
    let ratios: Vec<f64> = (1..=8).map(|k| {
        let x = 10f64.powi(-k);
        g.value(x) / x
    }).collect();
    for k in 1..ratios.len() {
        if !(ratios[k] < ratios[k - 1]) {
            let x = 10f64.powi(-(k as i32 + 1));
            return HypothesisCheck {
                passed: false,
                worst_point: Some(x),
                detail: format!("G(x)/x does not decrease at x = {x:e} ({} -> {})", ratios[k - 1], ratios[k]),
            };
        }
    }
    HypothesisCheck {
        passed: true,
        worst_point: Some(1e-8),
        detail: format!("G(1e-8)/1e-8 = {:e}", ratios[7]),
    }
}
