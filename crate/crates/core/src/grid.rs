//! Piecewise-linear functions on a uniform mesh of `[left, right]`, extended by
//! zero to the whole line, together with their local modulars, Luxemburg norms and
//! the mollification, truncation and translation transforms.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::error::{invalid_param, Error, Result};
use crate::orlicz::OrliczFunction;
use crate::quadrature;

/// Gauss order for element integrals of `G(|u|)`.
const ELEMENT_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    left: f64,
    right: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(left: f64, right: f64, values: Vec<f64>) -> Result<Self> {
        if !(left.is_finite() && right.is_finite() && left < right) {
            return Err(Error::InvalidInput(format!("need finite left < right (got {left}, {right})")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 nodes (got {})", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("value at node {i} is not finite")));
        }
        Ok(Self { left, right, values })
    }

    pub fn zeros(left: f64, right: f64, nodes: usize) -> Result<Self> {
        Self::new(left, right, vec![0.0; nodes])
    }

    /// Samples `f` at the nodes.
    pub fn from_fn<F: FnMut(f64) -> f64>(left: f64, right: f64, nodes: usize, mut f: F) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 nodes (got {nodes})")));
        }
        let h = (right - left) / (nodes - 1) as f64;
        Self::new(left, right, (0..nodes).map(|i| f(left + i as f64 * h)).collect())
    }

    /// Tent of height `peak` over `(left, right)`, vanishing at both ends.
    pub fn hat(left: f64, right: f64, nodes: usize, peak: f64) -> Result<Self> {
        let mid = 0.5 * (left + right);
        let half = 0.5 * (right - left);
        let mut u = Self::from_fn(left, right, nodes, |x| peak * (1.0 - (x - mid).abs() / half).max(0.0))?;
        let n = u.values.len();
        u.values[0] = 0.0;
        u.values[n - 1] = 0.0;
        Ok(u)
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn spacing(&self) -> f64 {
        (self.right - self.left) / (self.values.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.values.len() {
            self.right
        } else {
            self.left + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.node(i)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Zero boundary values: the function lies in the discrete `W_0` cone.
    pub fn is_w0(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.values.len() - 1] == 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Element slopes `(u_{i+1} - u_i) / h`.
    pub fn slopes(&self) -> Vec<f64> {
        let h = self.spacing();
        self.values.windows(2).map(|w| (w[1] - w[0]) / h).collect()
    }

    /// Point value of the zero extension.
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.left || x > self.right {
            return 0.0;
        }
        let h = self.spacing();
        let n = self.values.len();
        let i = (((x - self.left) / h).floor() as usize).min(n - 2);
        let t = ((x - self.node(i)) / h).clamp(0.0, 1.0);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    pub fn same_mesh(&self, other: &Self) -> bool {
        self.left == other.left && self.right == other.right && self.values.len() == other.values.len()
    }

    fn check_mesh(&self, other: &Self) -> Result<()> {
        if self.same_mesh(other) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "mesh mismatch: ({}, {}, {}) vs ({}, {}, {})",
                self.left,
                self.right,
                self.values.len(),
                other.left,
                other.right,
                other.values.len()
            )))
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    /// `a self + b other` on a shared mesh.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_mesh(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect(),
            ..self.clone()
        })
    }

    /// Nodal interpolant of the zero extension on another uniform mesh.
    pub fn resample(&self, left: f64, right: f64, nodes: usize) -> Result<Self> {
        Self::from_fn(left, right, nodes, |x| self.eval(x))
    }

    /// CSV with header `x,u` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,u\n");
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{:.16e},{:.16e}", self.node(i), v);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_csv())
    }

    /// Parses the format written by [`GridFunction::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for (k, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("line {}: expected `x,u`", k + 1)))
            };
            xs.push(parse(it.next())?);
            us.push(parse(it.next())?);
        }
        if xs.len() < 2 {
            return Err(Error::InvalidInput("need at least 2 rows".into()));
        }
        Self::new(xs[0], xs[xs.len() - 1], us)
    }
}

/// `\int G(|w|)` over one segment where `w` is linear from `w0` to `w1`.
///
/// Changing variables to `w` gives `(x1 - x0) / (w1 - w0) \int_{w0}^{w1} G(|w|) dw`,
/// exact for sums of powers and split at zero and the kinks otherwise.
fn segment_modular(g: &OrliczFunction, x0: f64, x1: f64, w0: f64, w1: f64) -> f64 {
    let len = x1 - x0;
    if w0 == w1 {
        return len * g.value(w0);
    }
    if (w1 - w0).abs() <= 1e-9 * w0.abs().max(w1.abs()) {
        return quadrature::gauss(|t| g.value(w0 + (w1 - w0) * t), 0.0, 1.0, ELEMENT_ORDER) * len;
    }
    let primitive = |a: f64, b: f64| -> f64 {
        if let Some(terms) = g.as_power_sum() {
            let f = |w: f64| -> f64 {
                terms.iter().map(|&(c, p)| c * w.signum() * w.abs().powf(p + 1.0) / (p + 1.0)).sum()
            };
            return f(b) - f(a);
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let mut breaks = vec![lo, hi, 0.0];
        for k in g.kinks() {
            breaks.push(k);
            breaks.push(-k);
        }
        breaks.retain(|x| *x >= lo && *x <= hi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let total: f64 = breaks
            .windows(2)
            .map(|w| quadrature::gauss(|t| g.value(t), w[0], w[1], ELEMENT_ORDER))
            .sum();
        if b >= a {
            total
        } else {
            -total
        }
    };
    len / (w1 - w0) * primitive(w0, w1)
}

/// `\int G(|w|)` for a piecewise-linear `w` with breakpoints `xs` and values `ws`.
fn piecewise_linear_modular(g: &OrliczFunction, xs: &[f64], ws: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ws.windows(2))
        .map(|(x, w)| segment_modular(g, x[0], x[1], w[0], w[1]))
        .sum()
}

/// `Phi_G(u) = \int G(|u|)`.
pub fn modular(g: &OrliczFunction, u: &GridFunction) -> f64 {
    piecewise_linear_modular(g, &u.nodes(), &u.values)
}

/// `Phi_G(|u'|) = \sum_e h G(|slope_e|)`.
pub fn gradient_modular(g: &OrliczFunction, u: &GridFunction) -> f64 {
    let h = u.spacing();
    u.slopes().iter().map(|m| h * g.value(*m)).sum()
}

/// Luxemburg gauge `inf{lambda > 0 : Phi(u / lambda) <= 1}` of any modular.
///
/// The bracket is grown or shrunk by factors of two from `lambda = 1`, then bisected
/// to an absolute width of `1e-10` times its initial width. The returned value is
/// the upper end of the final bracket, so `Phi(u / lambda) <= 1` holds at it.
pub fn luxemburg_norm<F>(mut phi: F, u: &GridFunction) -> Result<f64>
where
    F: FnMut(&GridFunction) -> Result<f64>,
{
    if u.is_zero() {
        return Ok(0.0);
    }
    let mut at = |lambda: f64| phi(&u.scaled(1.0 / lambda));
    let limit = 2f64.powi(64);
    let (mut lo, mut hi);
    if at(1.0)? > 1.0 {
        hi = 2.0;
        while at(hi)? > 1.0 {
            hi *= 2.0;
            if hi > limit {
                return Err(Error::DivergentModular);
            }
        }
        lo = hi / 2.0;
    } else {
        lo = 0.5;
        while at(lo)? <= 1.0 {
            lo /= 2.0;
            if lo < 1.0 / limit {
                return Ok(lo);
            }
        }
        hi = 2.0 * lo;
    }
    let tol = 1e-10 * (hi - lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if at(mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `tau_h u (x) = u(x + h)` on a uniform mesh covering `supp u` and `supp u - h`,
/// interpolated where the shifted nodes do not align.
pub fn translate(u: &GridFunction, shift: f64) -> Result<GridFunction> {
    let width = u.right - u.left;
    if !(shift.is_finite() && shift.abs() < width) {
        return Err(invalid_param(format!("|h| must be below the interval length {width} (got {shift})")));
    }
    if shift == 0.0 {
        return Ok(u.clone());
    }
    let left = u.left.min(u.left - shift);
    let right = u.right.max(u.right - shift);
    let h = u.spacing();
    let cells = ((right - left) / h - 1e-9).ceil() as usize;
    GridFunction::from_fn(left, right, cells + 1, |x| u.eval(x + shift))
}

/// `Phi_G(tau_h u - u)` integrated exactly between the kinks of both functions.
pub fn translation_modular(g: &OrliczFunction, u: &GridFunction, shift: f64) -> f64 {
    let mut xs: Vec<f64> = u.nodes();
    xs.extend(u.nodes().iter().map(|x| x - shift));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let ws: Vec<f64> = xs.iter().map(|&x| u.eval(x + shift) - u.eval(x)).collect();
    piecewise_linear_modular(g, &xs, &ws)
}

fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// Convolution with `rho_eps(x) = eps^{-1} rho(x / eps)`, `rho ~ exp(-1/(1-x^2))`, sampled
/// on the mesh and renormalised to unit discrete mass. The result lives on the mesh
/// extended by `ceil(eps/h)` nodes on each side, so it stays in the `W_0` cone and
/// preserves `\int u` exactly.
///
/// For `eps` below one mesh spacing the kernel degenerates to a point mass; a
/// warning is logged and `u` is returned unchanged.
pub fn mollify(u: &GridFunction, eps: f64) -> Result<GridFunction> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid_param(format!("eps must be positive (got {eps})")));
    }
    let h = u.spacing();
    if eps < h {
        log::warn!("mollifier radius {eps} is below the mesh spacing {h}; returning u unchanged");
        return Ok(u.clone());
    }
    let m = (eps / h).ceil() as usize;
    let mut weights: Vec<f64> = (-(m as i64)..=m as i64).map(|k| bump(k as f64 * h / eps)).collect();
    let mass: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= mass);

    let n = u.node_count();
    let total = n + 2 * m;
    let padded = |i: i64| -> f64 {
        let j = i - m as i64;
        if j < 0 || j >= n as i64 {
            0.0
        } else {
            u.values[j as usize]
        }
    };
    let values = (0..total as i64)
        .map(|i| {
            weights
                .iter()
                .enumerate()
                .map(|(k, w)| w * padded(i - (k as i64 - m as i64)))
                .sum()
        })
        .collect();
    GridFunction::new(u.left - m as f64 * h, u.right + m as f64 * h, values)
}

/// Cut-off `eta_k`: 1 on `[-k, k]`, linear down to 0 at `|x| = 2k`, so `|eta_k'| = 1/k <= 2/k`.
pub fn cutoff(k: f64, x: f64) -> f64 {
    (2.0 - x.abs() / k).clamp(0.0, 1.0)
}

/// `u_k = eta_k u`, taken nodally.
pub fn truncate(u: &GridFunction, k: f64) -> Result<GridFunction> {
    if !(k.is_finite() && k > 0.0) {
        return Err(invalid_param(format!("k must be positive (got {k})")));
    }
    let values = u
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * cutoff(k, u.node(i)))
        .collect();
    GridFunction::new(u.left, u.right, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> OrliczFunction {
        OrliczFunction::power(2.0).unwrap()
    }

    #[test]
    fn construction_rejects_bad_meshes() {
        assert!(GridFunction::new(1.0, 0.0, vec![0.0, 0.0]).is_err());
        assert!(GridFunction::new(0.0, 1.0, vec![0.0]).is_err());
        assert!(GridFunction::new(0.0, 1.0, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn hat_modular() {
        let u = GridFunction::hat(-1.0, 1.0, 1025, 1.0).unwrap();
        assert!((modular(&square(), &u) - 2.0 / 3.0).abs() < 1e-12);
        assert!((gradient_modular(&square(), &u) - 2.0).abs() < 1e-12);
        let z = GridFunction::zeros(-1.0, 1.0, 9).unwrap();
        assert_eq!(modular(&square(), &z), 0.0);
        assert_eq!(gradient_modular(&square(), &z), 0.0);
    }

    #[test]
    fn plateau_modular_tends_to_height_squared() {
        let c = 0.7;
        let mut prev = f64::INFINITY;
        for n in [11, 101, 1001] {
            let mut u = GridFunction::from_fn(0.0, 1.0, n, |_| c).unwrap();
            let last = u.node_count() - 1;
            u.values_mut()[0] = 0.0;
            u.values_mut()[last] = 0.0;
            let gap = (modular(&square(), &u) - c * c).abs();
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn gradient_modular_of_parabola() {
        let u = GridFunction::from_fn(0.0, 1.0, 2049, |x| x * (1.0 - x) / 4.0).unwrap();
        // \int ((1 - 2x)/4)^2 = 1/48
        assert!((gradient_modular(&square(), &u) - 1.0 / 48.0).abs() < 1e-5);
    }

    #[test]
    fn modular_splits_at_sign_changes() {
        let u = GridFunction::new(0.0, 1.0, vec![-1.0, 1.0]).unwrap();
        let g = OrliczFunction::power(1.5).unwrap();
        // \int_0^1 |2x - 1|^{1.5} dx = 2/5
        assert!((modular(&g, &u) - 0.4).abs() < 1e-14);
    }

    #[test]
    fn luxemburg_of_powers_is_lp_norm() {
        let u = GridFunction::hat(-1.0, 1.0, 1025, 1.0).unwrap();
        let g = square();
        let n = luxemburg_norm(|v| Ok(modular(&g, v)), &u).unwrap();
        assert!((n - (2.0f64 / 3.0).sqrt()).abs() < 1e-9);
        let unit = u.scaled(1.0 / n);
        let n1 = luxemburg_norm(|v| Ok(modular(&g, v)), &unit).unwrap();
        assert!((n1 - 1.0).abs() < 1e-8);
        let z = GridFunction::zeros(0.0, 1.0, 5).unwrap();
        assert_eq!(luxemburg_norm(|v| Ok(modular(&g, v)), &z).unwrap(), 0.0);
    }

    #[test]
    fn luxemburg_reports_divergence() {
        let u = GridFunction::hat(-1.0, 1.0, 5, 1.0).unwrap();
        assert!(matches!(luxemburg_norm(|_| Ok(2.0), &u), Err(Error::DivergentModular)));
    }

    #[test]
    fn translation_by_mesh_multiples() {
        let u = GridFunction::hat(-1.0, 1.0, 9, 1.0).unwrap();
        assert_eq!(translate(&u, 0.0).unwrap(), u);
        let h = u.spacing();
        let t = translate(&u, h).unwrap();
        assert_eq!(t.node_count(), 10);
        for i in 0..9 {
            assert!((t.values()[i] - u.values()[i]).abs() < 1e-15);
        }
        assert!(translate(&u, 2.5).is_err());
    }

    #[test]
    fn translation_modular_of_hat() {
        // tau_h u - u for the unit hat and h = 0.5 is piecewise linear with
        // \int (tau_h u - u)^2 = 1/4 + ... computed from its breakpoints.
        let u = GridFunction::hat(-1.0, 1.0, 5, 1.0).unwrap();
        let direct = quadrature::integrate(
            |x| (u.eval(x + 0.5) - u.eval(x)).powi(2),
            -1.5,
            1.0,
            &[-1.0, -0.5, 0.0, 0.5],
            1e-13,
        )
        .unwrap();
        assert!((translation_modular(&square(), &u, 0.5) - direct).abs() < 1e-13);
    }

    #[test]
    fn mollify_preserves_mass() {
        let u = GridFunction::hat(-1.0, 1.0, 129, 1.0).unwrap();
        let v = mollify(&u, 0.1).unwrap();
        let mass = |w: &GridFunction| w.values().iter().sum::<f64>() * w.spacing();
        assert!((mass(&v) - mass(&u)).abs() < 1e-12);
        assert!(v.is_w0());
        let z = mollify(&GridFunction::zeros(-1.0, 1.0, 65).unwrap(), 0.1).unwrap();
        assert!(z.is_zero());
        assert_eq!(mollify(&u, 1e-5).unwrap(), u);
    }

    #[test]
    fn truncation() {
        let u = GridFunction::hat(-1.0, 1.0, 65, 1.0).unwrap();
        assert_eq!(truncate(&u, 2.0).unwrap(), u);
        let t = truncate(&u, 0.5).unwrap();
        assert_eq!(t.eval(0.0), 1.0);
        assert_eq!(t.eval(-1.0), 0.0);
        assert!((t.eval(0.75) - 0.25 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let u = GridFunction::from_fn(0.0, 1.0, 7, |x| (3.0 * x).sin() / 7.0).unwrap();
        let back = GridFunction::from_csv(&u.to_csv()).unwrap();
        assert_eq!(back.values(), u.values());
        assert!(u.to_csv().starts_with("x,u\n0.0000000000000000e0,"));
    }
}
