//! Nonlocal-to-local experiments: the curve `s -> (1-s) Phi_{s,G}(u)` and its limit
//! `Phi_{G~}(|u'|)`, the fractional Poincaré ratio, and sequences `u_k -> u`.

use crate::error::{invalid_param, Error, Result};
use crate::grid::{self, GridFunction};
use crate::limit_density::LimitDensity;
use crate::nonlocal::{fractional_modular, QuadratureConfig};
use crate::orlicz::OrliczFunction;

/// Samples of `(1-s) Phi_{s,G}(u)` and their extrapolation to `s = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitCurve {
    /// `(s, (1-s) Phi_{s,G}(u))` with strictly increasing `s`.
    pub entries: Vec<(f64, f64)>,
    /// Linear extrapolation in `1-s` through the last two entries.
    pub extrapolated_limit: f64,
    /// `Phi_{G~}(|u'|)` with `G~` the one-dimensional limit density.
    pub target: f64,
}

impl LimitCurve {
    /// `|extrapolated - target| / target`, or the absolute gap when the target vanishes.
    pub fn rel_gap(&self) -> f64 {
        gap(self.extrapolated_limit, self.target)
    }

    /// Relative gap of one entry to the target.
    pub fn entry_gap(&self, i: usize) -> f64 {
        gap(self.entries[i].1, self.target)
    }
}

fn gap(value: f64, target: f64) -> f64 {
    if target == 0.0 {
        value.abs()
    } else {
        (value - target).abs() / target.abs()
    }
}

pub(crate) fn check_s_list(s_list: &[f64]) -> Result<()> {
    if s_list.is_empty() {
        return Err(invalid_param("s list is empty"));
    }
    if let Some(s) = s_list.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
        return Err(invalid_param(format!("every s must lie in (0, 1) (got {s})")));
    }
    if s_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid_param("s list must be strictly increasing"));
    }
    Ok(())
}

fn require_w0(u: &GridFunction) -> Result<()> {
    if !u.is_w0() {
        return Err(Error::InvalidInput("function must vanish at both boundary nodes".into()));
    }
    Ok(())
}

/// `Phi_{G~}(|u'|)` for the one-dimensional limit density.
pub fn local_limit(g: &OrliczFunction, u: &GridFunction) -> Result<f64> {
    let tilde = LimitDensity::new(g.clone(), 1)?;
    let h = u.spacing();
    u.slopes().iter().try_fold(0.0, |acc, m| Ok(acc + h * tilde.value(m.abs())?))
}

/// `(1-s) Phi_{s,G}(u)` at every `s`, extrapolated linearly in `1-s` from the last two.
pub fn bbm_curve(g: &OrliczFunction, u: &GridFunction, s_list: &[f64], cfg: &QuadratureConfig) -> Result<LimitCurve> {
    check_s_list(s_list)?;
    require_w0(u)?;
    let entries = s_list
        .iter()
        .map(|&s| Ok((s, (1.0 - s) * fractional_modular(g, s, u, cfg)?)))
        .collect::<Result<Vec<_>>>()?;
    let extrapolated_limit = extrapolate(&entries);
    Ok(LimitCurve {
        entries,
        extrapolated_limit,
        target: local_limit(g, u)?,
    })
}

/// Value at `s = 1` of the line through the last two `(1-s, y)` samples.
pub fn extrapolate(entries: &[(f64, f64)]) -> f64 {
    match entries {
        [] => 0.0,
        [(_, y)] => *y,
        [.., (s1, y1), (s2, y2)] => y2 + (y2 - y1) * (1.0 - s2) / (s2 - s1),
    }
}

/// Fractional Poincaré ratio and the explicit bound it must respect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareReport {
    pub s: f64,
    /// `Phi_G(u)`.
    pub modular: f64,
    /// `(1-s) Phi_{s,G}(u)`.
    pub scaled_fractional: f64,
    /// `modular / scaled_fractional`.
    pub ratio: f64,
    /// `2 q s (d+1)^{2qs} / (2 (1-s))`, `d` the domain length, `q = log2 C`.
    pub budget: f64,
}

impl PoincareReport {
    pub fn holds(&self) -> bool {
        self.ratio <= self.budget
    }
}

/// Explicit fractional Poincaré constant for `(1-s)`-scaled modulars on an interval of length `d`.
///
/// Integrating only over `|x-y| >= d+1`, where one point lies outside the support,
/// and using `t^{2q} G(a) <= G(a t)` gives
/// `Phi_{s,G}(u) >= 2 / (2 q s (d+1)^{2qs}) Phi_G(u)`.
pub fn poincare_budget(g: &OrliczFunction, s: f64, d: f64) -> f64 {
    let q = g.lower_exponent();
    let e = 2.0 * q * s;
    e * (d + 1.0).powf(e) / (2.0 * (1.0 - s))
}

pub fn poincare_check(g: &OrliczFunction, s: f64, u: &GridFunction, cfg: &QuadratureConfig) -> Result<PoincareReport> {
    require_w0(u)?;
    if u.is_zero() {
        return Err(Error::UndefinedRatio("Poincaré ratio of the zero function".into()));
    }
    let scaled_fractional = (1.0 - s) * fractional_modular(g, s, u, cfg)?;
    let modular = grid::modular(g, u);
    Ok(PoincareReport {
        s,
        modular,
        scaled_fractional,
        ratio: modular / scaled_fractional,
        budget: poincare_budget(g, s, u.right() - u.left()),
    })
}

/// One member `u_k = base + perturbation / k` of a converging sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceEntry {
    pub k: usize,
    pub s: f64,
    /// `(1-s_k) Phi_{s_k,G}(u_k)`.
    pub scaled_modular: f64,
    /// `Phi_G(u_k - base)`.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceReport {
    pub entries: Vec<SequenceEntry>,
    /// `Phi_{G~}(|base'|)`.
    pub target: f64,
    /// `sup_k (1-s_k) Phi_{s_k,G}(u_k)`.
    pub sup_scaled: f64,
    /// `sup_k Phi_G(u_k)`.
    pub sup_modular: f64,
    /// `min` of the scaled modulars over the second half of the sequence.
    pub tail_min: f64,
}

impl SequenceReport {
    /// `(tail_min - target) / target`; the lower-limit inequality asks for this to be `>= 0`
    /// up to discretisation error.
    pub fn liminf_margin(&self) -> f64 {
        if self.target == 0.0 {
            self.tail_min
        } else {
            (self.tail_min - self.target) / self.target
        }
    }
}

/// Evaluates `u_k = base + perturbation / k` at `s_k`, `k = 1, 2, ...`.
pub fn sequence_limit_demo(
    g: &OrliczFunction,
    base: &GridFunction,
    perturbation: &GridFunction,
    s_list: &[f64],
    cfg: &QuadratureConfig,
) -> Result<SequenceReport> {
    check_s_list(s_list)?;
    require_w0(base)?;
    let mut entries = Vec::with_capacity(s_list.len());
    let mut sup_modular: f64 = 0.0;
    for (i, &s) in s_list.iter().enumerate() {
        let k = i + 1;
        let delta = perturbation.scaled(1.0 / k as f64);
        let u = base.combine(1.0, &delta, 1.0)?;
        require_w0(&u)?;
        sup_modular = sup_modular.max(grid::modular(g, &u));
        entries.push(SequenceEntry {
            k,
            s,
            scaled_modular: (1.0 - s) * fractional_modular(g, s, &u, cfg)?,
            distance: grid::modular(g, &delta),
        });
    }
    let tail = &entries[entries.len() / 2..];
    Ok(SequenceReport {
        target: local_limit(g, base)?,
        sup_scaled: entries.iter().map(|e| e.scaled_modular).fold(0.0, f64::max),
        sup_modular,
        tail_min: tail.iter().map(|e| e.scaled_modular).fold(f64::INFINITY, f64::min),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> OrliczFunction {
        OrliczFunction::power(2.0).unwrap()
    }

    #[test]
    fn extrapolation_is_linear_in_one_minus_s() {
        // y = 2 + 3 (1 - s)
        let e = [(0.8, 2.6), (0.9, 2.3)];
        assert!((extrapolate(&e) - 2.0).abs() < 1e-14);
        assert_eq!(extrapolate(&[(0.5, 1.5)]), 1.5);
    }

    #[test]
    fn zero_function_gives_zero_curve() {
        let u = GridFunction::zeros(-1.0, 1.0, 33).unwrap();
        let c = bbm_curve(&square(), &u, &[0.5, 0.9], &QuadratureConfig::default()).unwrap();
        assert!(c.entries.iter().all(|e| e.1 == 0.0));
        assert_eq!(c.extrapolated_limit, 0.0);
        assert_eq!(c.target, 0.0);
    }

    #[test]
    fn rejects_bad_s_lists() {
        let u = GridFunction::hat(-1.0, 1.0, 9, 1.0).unwrap();
        let cfg = QuadratureConfig::default();
        assert!(bbm_curve(&square(), &u, &[0.9, 0.5], &cfg).is_err());
        assert!(bbm_curve(&square(), &u, &[0.5, 1.0], &cfg).is_err());
        assert!(bbm_curve(&square(), &u, &[], &cfg).is_err());
    }

    #[test]
    fn target_for_square_is_gradient_modular() {
        let u = GridFunction::hat(-1.0, 1.0, 65, 1.0).unwrap();
        assert!((local_limit(&square(), &u).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn poincare_ratio_is_scale_free_for_square() {
        let u = GridFunction::hat(-1.0, 1.0, 65, 1.0).unwrap();
        let cfg = QuadratureConfig::default();
        let a = poincare_check(&square(), 0.5, &u, &cfg).unwrap();
        let b = poincare_check(&square(), 0.5, &u.scaled(2.0), &cfg).unwrap();
        assert!(a.ratio > 0.0 && a.ratio.is_finite());
        assert!((a.ratio - b.ratio).abs() < 1e-12 * a.ratio);
        assert!(a.holds());
        let zero = GridFunction::zeros(-1.0, 1.0, 65).unwrap();
        assert!(matches!(poincare_check(&square(), 0.5, &zero, &cfg), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn zero_perturbation_reproduces_curve() {
        let u = GridFunction::hat(-1.0, 1.0, 33, 1.0).unwrap();
        let zero = GridFunction::zeros(-1.0, 1.0, 33).unwrap();
        let cfg = QuadratureConfig::default();
        let s = [0.6, 0.8];
        let rep = sequence_limit_demo(&square(), &u, &zero, &s, &cfg).unwrap();
        let curve = bbm_curve(&square(), &u, &s, &cfg).unwrap();
        for (e, c) in rep.entries.iter().zip(&curve.entries) {
            assert_eq!(e.scaled_modular, c.1);
            assert_eq!(e.distance, 0.0);
        }
    }
}
