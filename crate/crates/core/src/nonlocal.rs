//! Block quadrature of the fractional modular
//! `Phi_{s,G}(u) = \iint G(|u(x)-u(y)| / |x-y|^s) dx dy / |x-y|` in one dimension,
//! and of its first and second derivatives with respect to the nodal values.
//!
//! For a piecewise-linear `u` vanishing outside `Omega = (L, R)` the double integral
//! splits exactly into
//!
//! * same-element blocks, where `u(x)-u(y) = m (x-y)` and the block collapses to
//!   `2 h q Psi(|m| h^{1-s})` with `q = 1/(1-s)` and
//!   `Psi(C) = \int_0^1 (1 - z^q) G(C z) dz / z`;
//! * neighbouring elements, split into two Duffy triangles whose radial integral is
//!   `J(D) = q \int_0^1 G(D z) z^{q-1} dz`, leaving a smooth integral in the
//!   triangle angle;
//! * well-separated elements, by tensor Gauss rules whose order falls with distance;
//! * pairs with one point outside `Omega`, where the outer variable integrates in
//!   closed form to `(1/s) I_G(|u(x)| / dist^s)`, `I_G(c) = \int_0^c G(t) dt / t`.
//!
//! Every piece is a sum of terms `w P(|l u|)` with a sparse linear functional `l`
//! and a one-variable profile `P`, so value, gradient, Hessian and the operator
//! pairing share one traversal. Rows (elements) are processed in parallel and
//! reduced in a fixed order, so results do not depend on the thread count.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{invalid_param, Error, Result};
use crate::grid::GridFunction;
use crate::orlicz::OrliczFunction;
use crate::quadrature;

/// Accuracy knobs for [`fractional_modular`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss points in the Duffy angle for neighbouring elements.
    pub near_diagonal_order: usize,
    /// Relative tolerance of adaptive inner integrals.
    pub rel_tol: f64,
    /// Absolute tolerance of adaptive inner integrals.
    pub abs_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            near_diagonal_order: 12,
            rel_tol: 1e-10,
            abs_tol: 1e-14,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=64).contains(&self.near_diagonal_order) {
            return Err(invalid_param(format!(
                "near_diagonal_order must lie in 2..=64 (got {})",
                self.near_diagonal_order
            )));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(invalid_param("quadrature tolerances must be positive"));
        }
        Ok(())
    }
}

/// Which one-variable profile a term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `Psi`, same element.
    Diagonal,
    /// `J`, neighbouring elements.
    Adjacent,
    /// `G`, separated elements.
    Far,
    /// `I_G`, one point outside the domain.
    Exterior,
    /// `G`, local gradient modular.
    Local,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    weight: f64,
    kernel: Kernel,
    len: usize,
    idx: [usize; 4],
    coef: [f64; 4],
}

impl Term {
    fn new(weight: f64, kernel: Kernel, pairs: &[(usize, f64)]) -> Self {
        let mut idx = [0; 4];
        let mut coef = [0.0; 4];
        for (k, &(i, c)) in pairs.iter().enumerate() {
            idx[k] = i;
            coef[k] = c;
        }
        Self {
            weight,
            kernel,
            len: pairs.len(),
            idx,
            coef,
        }
    }

    fn apply(&self, u: &[f64]) -> f64 {
        (0..self.len).map(|k| self.coef[k] * u[self.idx[k]]).sum()
    }

    fn coefficient_of(&self, node: usize) -> f64 {
        (0..self.len).filter(|&k| self.idx[k] == node).map(|k| self.coef[k]).sum()
    }
}

/// Gauss order for separated elements `gap` cells apart (`gap >= 2`).
fn far_order(gap: usize) -> usize {
    match gap {
        0..=2 => 8,
        3..=4 => 6,
        5..=16 => 4,
        17..=64 => 3,
        _ => 2,
    }
}

fn unit_rule(order: usize) -> Vec<(f64, f64)> {
    quadrature::gauss_on(order, 0.0, 1.0).collect()
}

/// Panels `[2^{-k-1}, 2^{-k}]` plus `[0, 2^{-levels}]`, 8 Gauss points each.
fn graded_rule(levels: i32) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut hi = 1.0;
    for _ in 0..levels {
        let lo = hi / 2.0;
        out.extend(quadrature::gauss_on(8, lo, hi));
        hi = lo;
    }
    out.extend(quadrature::gauss_on(8, 0.0, hi));
    out
}

/// Node of the composite profile rule, with `t^q` cached.
#[derive(Debug, Clone, Copy)]
struct ProfileNode {
    t: f64,
    w: f64,
    tq: f64,
}

/// Gauss panel `[lo, hi]` of the composite profile rule.
#[derive(Debug, Clone)]
struct Panel {
    lo: f64,
    nodes: Vec<ProfileNode>,
}

/// Profiles `P`, `P'`, `P''` of every kernel for a fixed `G` and `s`.
#[derive(Debug, Clone)]
struct Profiles {
    g: OrliczFunction,
    q: f64,
    powers: Option<Vec<(f64, f64)>>,
    kinks: Vec<f64>,
    base_breaks: Vec<f64>,
    /// Composite rule on `base_breaks` (panels from `t = 1` down to 0), used whenever
    /// no kink of `G(z .)` falls inside.
    table: Vec<Panel>,
}

const ZERO_GRADING: i32 = 40;

impl Profiles {
    fn new(g: &OrliczFunction, s: f64) -> Self {
        let q = if s < 1.0 { 1.0 / (1.0 - s) } else { f64::INFINITY };
        let mut base = vec![0.0, 1.0];
        base.extend((1..=ZERO_GRADING).map(|k| 2f64.powi(-k)));
        if q.is_finite() {
            let top = (q.log2().ceil() as i32 + 4).max(2);
            base.extend((2..=top).map(|k| 1.0 - 2f64.powi(-k)));
        }
        base.sort_by(f64::total_cmp);
        base.dedup();
        let table = Self::nodes(&base, q);
        Self {
            g: g.clone(),
            q,
            powers: g.as_power_sum(),
            kinks: g.kinks(),
            base_breaks: base,
            table,
        }
    }

    fn nodes(breaks: &[f64], q: f64) -> Vec<Panel> {
        breaks
            .windows(2)
            .rev()
            .map(|w| Panel {
                lo: w[0],
                nodes: quadrature::gauss_on(8, w[0], w[1])
                    .map(|(t, w)| ProfileNode {
                        t,
                        w,
                        tq: if q.is_finite() { t.powf(q) } else { 0.0 },
                    })
                    .collect(),
            })
            .collect()
    }

    fn power_coefficient(&self, kernel: Kernel, p: f64) -> f64 {
        let q = self.q;
        match kernel {
            Kernel::Diagonal => 1.0 / p - 1.0 / (p + q),
            Kernel::Adjacent => q / (p + q),
            Kernel::Far | Kernel::Local => 1.0,
            Kernel::Exterior => 1.0 / p,
        }
    }

    /// `[P(z), P'(z), P''(z)]` for `z >= 0`; entries beyond `want` are left at 0.
    fn eval(&self, kernel: Kernel, z: f64, want: usize) -> Result<[f64; 3]> {
        let z = z.abs();
        if let Some(terms) = &self.powers {
            let mut out = [0.0; 3];
            for &(c, p) in terms {
                let a = c * self.power_coefficient(kernel, p);
                if z == 0.0 {
                    if want >= 2 {
                        out[2] += if p < 2.0 {
                            f64::INFINITY
                        } else if p == 2.0 {
                            2.0 * a
                        } else {
                            0.0
                        };
                    }
                    continue;
                }
                let zp2 = z.powf(p - 2.0);
                out[0] += a * zp2 * z * z;
                if want >= 1 {
                    out[1] += a * p * zp2 * z;
                }
                if want >= 2 {
                    out[2] += a * p * (p - 1.0) * zp2;
                }
            }
            return Ok(out);
        }
        let g = &self.g;
        let q = self.q;
        let mut out = [0.0; 3];
        match kernel {
            Kernel::Far | Kernel::Local => {
                out[0] = g.value(z);
                if want >= 1 {
                    out[1] = g.derivative(z);
                }
                if want >= 2 {
                    out[2] = g.second_derivative(z);
                }
            }
            Kernel::Exterior => {
                out[0] = self.composite(z, 0, |n| 1.0 / n.t)?;
                if z == 0.0 {
                    out[2] = 0.5 * g.second_derivative(0.0);
                } else if want >= 1 {
                    let (gz, dz) = (g.value(z), g.derivative(z));
                    out[1] = gz / z;
                    out[2] = (z * dz - gz) / (z * z);
                }
            }
            Kernel::Diagonal => {
                out[0] = self.composite(z, 0, |n| (1.0 - n.tq) / n.t)?;
                if want >= 1 {
                    out[1] = self.composite(z, 1, |n| 1.0 - n.tq)?;
                }
                if want >= 2 {
                    out[2] = self.composite(z, 2, |n| (1.0 - n.tq) * n.t)?;
                }
            }
            Kernel::Adjacent => {
                out[0] = self.composite(z, 0, |n| q * n.tq / n.t)?;
                if want >= 1 {
                    out[1] = self.composite(z, 1, |n| q * n.tq)?;
                }
                if want >= 2 {
                    out[2] = self.composite(z, 2, |n| q * n.tq * n.t)?;
                }
            }
        }
        for (i, v) in out.iter_mut().enumerate() {
            if i > want {
                *v = 0.0;
            }
        }
        Ok(out)
    }

    /// `\int_0^1 weight(t) G^{(order)}(z t) dt` on graded panels split at the kinks,
    /// where `G^{(0)} = G`, `G^{(1)} = g`, `G^{(2)} = g'`. Every weight is bounded by
    /// `max(1, q) t^(order - 1)`, so by convexity the part over `[0, t0]` is at most
    /// `max(1, q)` times `G(z t0)`, `t0 g(z t0)` or `t0 g(z t0) / z`; the grading towards 0
    /// stops once that bound is negligible.
    fn composite<F: Fn(&ProfileNode) -> f64>(&self, z: f64, order: usize, weight: F) -> Result<f64> {
        let g = &self.g;
        if z == 0.0 {
            if order < 2 {
                return Ok(0.0);
            }
            let d2 = g.second_derivative(0.0);
            let total: f64 = self.table.iter().flat_map(|p| &p.nodes).map(|n| n.w * weight(n)).sum();
            return Ok(d2 * total);
        }
        let eval = |x: f64| match order {
            0 => g.value(x),
            1 => g.derivative(x),
            _ => g.second_derivative(x),
        };
        let tail = |t0: f64| {
            let c = self.q.max(1.0);
            match order {
                0 => c * g.value(z * t0),
                1 => c * t0 * g.derivative(z * t0),
                _ => c * t0 * g.derivative(z * t0) / z,
            }
        };
        let inner: Vec<f64> = self
            .kinks
            .iter()
            .map(|k| k / z)
            .filter(|t| *t > 0.0 && *t < 1.0)
            .collect();
        let split;
        let panels = if inner.is_empty() {
            &self.table
        } else {
            let mut breaks = self.base_breaks.clone();
            breaks.extend(inner);
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            split = Self::nodes(&breaks, self.q);
            &split
        };
        let mut acc = 0.0;
        for panel in panels {
            acc += panel.nodes.iter().map(|n| n.w * weight(n) * eval(z * n.t)).sum::<f64>();
            if panel.lo <= 0.25 && tail(panel.lo) <= 1e-17 * acc.abs() {
                break;
            }
        }
        if !acc.is_finite() {
            return Err(Error::ToleranceNotMet {
                estimate: acc,
                error: f64::INFINITY,
            });
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Order {
    Local,
    Fractional(f64),
}

/// The modular `Phi_{s,G}` (or `Phi_G(|u'|)` when `s = 1`) of piecewise-linear functions
/// on a fixed mesh, as a function of the full nodal vector.
#[derive(Debug, Clone)]
pub struct ModularForm {
    order: Order,
    left: f64,
    right: f64,
    nodes: usize,
    h: f64,
    profiles: Profiles,
    duffy: Vec<(f64, f64)>,
    interior: Vec<(f64, f64)>,
    graded: Vec<(f64, f64)>,
    /// Gauss rules on `[0, 1]` indexed by order.
    far_rules: Vec<Vec<(f64, f64)>>,
}

impl ModularForm {
    /// Fractional modular for `0 < s < 1`.
    pub fn fractional(
        g: &OrliczFunction,
        s: f64,
        left: f64,
        right: f64,
        nodes: usize,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid_param(format!("s must lie in (0, 1) (got {s})")));
        }
        cfg.validate()?;
        Self::build(g, Order::Fractional(s), left, right, nodes, cfg)
    }

    /// Local gradient modular `\sum_e h G(|slope_e|)`.
    pub fn local(g: &OrliczFunction, left: f64, right: f64, nodes: usize) -> Result<Self> {
        Self::build(g, Order::Local, left, right, nodes, &QuadratureConfig::default())
    }

    /// `s < 1` gives the fractional form, `s = 1` the local one.
    pub fn for_order(
        g: &OrliczFunction,
        s: f64,
        left: f64,
        right: f64,
        nodes: usize,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        if s == 1.0 {
            Self::local(g, left, right, nodes)
        } else {
            Self::fractional(g, s, left, right, nodes, cfg)
        }
    }

    fn build(g: &OrliczFunction, order: Order, left: f64, right: f64, nodes: usize, cfg: &QuadratureConfig) -> Result<Self> {
        if !(left.is_finite() && right.is_finite() && left < right) {
            return Err(Error::InvalidInput(format!("need finite left < right (got {left}, {right})")));
        }
        if nodes < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 nodes (got {nodes})")));
        }
        let s = match order {
            Order::Fractional(s) => s,
            Order::Local => 1.0,
        };
        Ok(Self {
            order,
            left,
            right,
            nodes,
            h: (right - left) / (nodes - 1) as f64,
            profiles: Profiles::new(g, s),
            duffy: unit_rule(cfg.near_diagonal_order),
            interior: unit_rule(8),
            graded: graded_rule(ZERO_GRADING),
            far_rules: (0..=8).map(|o| if o >= 2 { unit_rule(o) } else { Vec::new() }).collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn s(&self) -> f64 {
        match self.order {
            Order::Fractional(s) => s,
            Order::Local => 1.0,
        }
    }

    fn elements(&self) -> usize {
        self.nodes - 1
    }

    fn node_x(&self, i: usize) -> f64 {
        self.left + i as f64 * self.h
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.nodes {
            return Err(Error::InvalidInput(format!(
                "expected {} nodal values, got {}",
                self.nodes,
                u.len()
            )));
        }
        Ok(())
    }

    /// Terms of the pair of elements `a <= b`.
    fn pair_terms<F: FnMut(&Term)>(&self, a: usize, b: usize, f: &mut F) {
        let s = match self.order {
            Order::Fractional(s) => s,
            Order::Local => {
                if a == b {
                    let inv = 1.0 / self.h;
                    f(&Term::new(self.h, Kernel::Local, &[(a, -inv), (a + 1, inv)]));
                }
                return;
            }
        };
        let h = self.h;
        let hs = h.powf(-s);
        if a == b {
            let q = self.profiles.q;
            f(&Term::new(2.0 * h * q, Kernel::Diagonal, &[(a, -hs), (a + 1, hs)]));
        } else if b == a + 1 {
            let c = b;
            for &(eta, w) in &self.duffy {
                let scale = hs / (1.0 + eta).powf(s);
                let weight = 2.0 * h * w / (1.0 + eta);
                f(&Term::new(
                    weight,
                    Kernel::Adjacent,
                    &[(c - 1, -scale), (c, scale * (1.0 - eta)), (c + 1, scale * eta)],
                ));
                f(&Term::new(
                    weight,
                    Kernel::Adjacent,
                    &[(c - 1, -scale * eta), (c, scale * (eta - 1.0)), (c + 1, scale)],
                ));
            }
        } else {
            let rule = &self.far_rules[far_order(b - a)];
            let (xa, xb) = (self.node_x(a), self.node_x(b));
            for &(ta, wa) in rule {
                for &(tb, wb) in rule {
                    let d = (xb + tb * h) - (xa + ta * h);
                    let ds = d.powf(-s);
                    f(&Term::new(
                        2.0 * wa * wb * h * h / d,
                        Kernel::Far,
                        &[(b, (1.0 - tb) * ds), (b + 1, tb * ds), (a, -(1.0 - ta) * ds), (a + 1, -ta * ds)],
                    ));
                }
            }
        }
    }

    /// Terms pairing element `e` with the exterior of the domain.
    fn exterior_terms<F: FnMut(&Term)>(&self, e: usize, f: &mut F) {
        let s = match self.order {
            Order::Fractional(s) => s,
            Order::Local => return,
        };
        let elements = self.elements();
        let last = elements - 1;
        let h = self.h;
        let mut emit = |t: f64, w: f64| {
            // Distances from the local coordinate: `x - L` would round to 0 next to `L`.
            let to_left = (e as f64 + t) * h;
            let to_right = ((elements - e - 1) as f64 + (1.0 - t)) * h;
            for dist in [to_left, to_right] {
                let ds = dist.powf(-s);
                f(&Term::new(2.0 * w * h / s, Kernel::Exterior, &[(e, (1.0 - t) * ds), (e + 1, t * ds)]));
            }
        };
        match (e == 0, e == last) {
            (false, false) => self.interior.iter().for_each(|&(t, w)| emit(t, w)),
            (true, false) => self.graded.iter().for_each(|&(t, w)| emit(t, w)),
            (false, true) => self.graded.iter().for_each(|&(t, w)| emit(1.0 - t, w)),
            (true, true) => {
                self.graded.iter().for_each(|&(t, w)| emit(0.5 * t, 0.5 * w));
                self.graded.iter().for_each(|&(t, w)| emit(1.0 - 0.5 * t, 0.5 * w));
            }
        }
    }

    /// All terms owned by row `e`: its own block, the pairs `(e, j > e)` and its exterior part.
    fn row_terms<F: FnMut(&Term)>(&self, e: usize, f: &mut F) {
        self.pair_terms(e, e, f);
        if matches!(self.order, Order::Fractional(_)) {
            for j in e + 1..self.elements() {
                self.pair_terms(e, j, f);
            }
            self.exterior_terms(e, f);
        }
    }

    /// Row chunks fixed by the mesh alone, so reductions are thread-count independent.
    fn chunks(&self) -> Vec<(usize, usize)> {
        let rows = self.elements();
        let size = rows.div_ceil(16).max(1);
        (0..rows).step_by(size).map(|a| (a, (a + size).min(rows))).collect()
    }

    fn fold_rows<A, F>(&self, init: impl Fn() -> A + Sync, visit: F) -> Result<Vec<A>>
    where
        A: Send,
        F: Fn(&mut A, &Term) -> Result<()> + Sync,
    {
        self.chunks()
            .into_par_iter()
            .map(|(a, b)| {
                let mut acc = init();
                let mut err = None;
                for e in a..b {
                    self.row_terms(e, &mut |t| {
                        if err.is_none() {
                            if let Err(x) = visit(&mut acc, t) {
                                err = Some(x);
                            }
                        }
                    });
                }
                match err {
                    Some(x) => Err(x),
                    None => Ok(acc),
                }
            })
            .collect()
    }

    pub fn value(&self, u: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        let parts = self.fold_rows(
            || 0.0,
            |acc, t| {
                let z = t.apply(u);
                if z != 0.0 {
                    *acc += t.weight * self.profiles.eval(t.kernel, z, 0)?[0];
                }
                Ok(())
            },
        )?;
        Ok(parts.iter().sum())
    }

    /// Derivative with respect to every nodal value (boundary nodes included).
    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let n = self.nodes;
        let parts = self.fold_rows(
            || vec![0.0; n],
            |acc, t| {
                let z = t.apply(u);
                if z != 0.0 {
                    let d = t.weight * self.profiles.eval(t.kernel, z, 1)?[1] * z.signum();
                    for k in 0..t.len {
                        acc[t.idx[k]] += d * t.coef[k];
                    }
                }
                Ok(())
            },
        )?;
        Ok(sum_vectors(parts, n))
    }

    /// Hessian with respect to the nodal values. Where the profile curvature blows
    /// up at zero (exponents below 2) it is evaluated at a small positive argument.
    pub fn hessian(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        self.check_len(u)?;
        let n = self.nodes;
        let parts = self.fold_rows(
            || DMatrix::<f64>::zeros(n, n),
            |acc, t| {
                let z = t.apply(u).abs();
                let mut c = self.profiles.eval(t.kernel, z, 2)?[2];
                if !c.is_finite() {
                    c = self.profiles.eval(t.kernel, z.max(1e-6), 2)?[2];
                }
                let c = t.weight * c;
                if c == 0.0 {
                    return Ok(());
                }
                for i in 0..t.len {
                    for j in 0..t.len {
                        acc[(t.idx[i], t.idx[j])] += c * t.coef[i] * t.coef[j];
                    }
                }
                Ok(())
            },
        )?;
        let mut out = DMatrix::<f64>::zeros(n, n);
        for m in parts {
            out += m;
        }
        Ok(out)
    }

    /// `<A u, v> = \sum w P'(|l u|) sgn(l u) l v`, the derivative of the modular at `u` in direction `v`.
    pub fn pairing(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.pairing_impl(u, v, false)
    }

    /// `\sum w P'(|l u|) |l v|`, the pairing with absolute values inside.
    pub fn abs_pairing(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.pairing_impl(u, v, true)
    }

    fn pairing_impl(&self, u: &[f64], v: &[f64], absolute: bool) -> Result<f64> {
        self.check_len(u)?;
        self.check_len(v)?;
        let parts = self.fold_rows(
            || 0.0,
            |acc, t| {
                let z = t.apply(u);
                if z != 0.0 {
                    let lv = t.apply(v);
                    let d = t.weight * self.profiles.eval(t.kernel, z, 1)?[1];
                    *acc += if absolute { d * lv.abs() } else { d * z.signum() * lv };
                }
                Ok(())
            },
        )?;
        Ok(parts.iter().sum())
    }

    /// `<A u, phi_i>` for every interior node, each assembled only from the element
    /// pairs that meet the support of the hat function `phi_i`.
    pub fn basis_pairings(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let elements = self.elements();
        let fractional = matches!(self.order, Order::Fractional(_));
        (1..self.nodes - 1)
            .into_par_iter()
            .map(|i| {
                let support = [i - 1, i];
                let mut acc = 0.0;
                let mut err = None;
                let mut visit = |t: &Term| {
                    let c = t.coefficient_of(i);
                    let z = t.apply(u);
                    if c == 0.0 || z == 0.0 || err.is_some() {
                        return;
                    }
                    match self.profiles.eval(t.kernel, z, 1) {
                        Ok(p) => acc += t.weight * p[1] * z.signum() * c,
                        Err(e) => err = Some(e),
                    }
                };
                for (k, &e) in support.iter().enumerate() {
                    if fractional {
                        for other in 0..elements {
                            // The pair (i-1, i) is visited once, from its left element.
                            if k == 1 && other == support[0] {
                                continue;
                            }
                            self.pair_terms(e.min(other), e.max(other), &mut visit);
                        }
                        self.exterior_terms(e, &mut visit);
                    } else {
                        self.pair_terms(e, e, &mut visit);
                    }
                }
                match err {
                    Some(e) => Err(e),
                    None => Ok(acc),
                }
            })
            .collect()
    }
}

fn sum_vectors(parts: Vec<Vec<f64>>, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for p in parts {
        for (o, x) in out.iter_mut().zip(p) {
            *o += x;
        }
    }
    out
}

/// `Phi_{s,G}(u)` for a function in the discrete `W_0` cone.
pub fn fractional_modular(g: &OrliczFunction, s: f64, u: &GridFunction, cfg: &QuadratureConfig) -> Result<f64> {
    if !u.is_w0() {
        return Err(Error::InvalidInput(
            "fractional modular needs zero boundary values (discrete W_0 cone)".into(),
        ));
    }
    if u.is_zero() {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid_param(format!("s must lie in (0, 1) (got {s})")));
        }
        return Ok(0.0);
    }
    ModularForm::fractional(g, s, u.left(), u.right(), u.node_count(), cfg)?.value(u.values())
}
