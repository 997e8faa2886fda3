//! Dirichlet problems for the fractional g-Laplacian, solved by minimising the convex
//! energy `sigma Phi_{s,G}(u) - \int f u` over piecewise-linear functions vanishing at
//! the boundary, and the study of minimisers as `s -> 1`.

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};

use crate::bbm::check_s_list;
use crate::error::{invalid_param, Error, Result};
use crate::grid::{self, GridFunction};
use crate::limit_density::LimitDensity;
use crate::nonlocal::{ModularForm, QuadratureConfig};
use crate::orlicz::OrliczFunction;
use crate::quadrature;

/// Whether the fractional energy carries the factor `1-s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    /// `(1-s) Phi_{s,G}`, the normalisation with a nondegenerate `s -> 1` limit.
    #[default]
    BbmScaled,
    /// `Phi_{s,G}`.
    Unscaled,
}

/// `sigma Phi_{s,G}(u) - \int_Omega f u` on a uniform mesh of `(left, right)`;
/// `s = 1` means the local energy `Phi_G(|u'|) - \int f u`.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    g: OrliczFunction,
    s: f64,
    scaling: Scaling,
    rhs: GridFunction,
    quadrature: QuadratureConfig,
}

impl DirichletProblem {
    /// `rhs` is sampled at the mesh nodes and interpolated linearly.
    pub fn new<F: FnMut(f64) -> f64>(
        g: OrliczFunction,
        s: f64,
        scaling: Scaling,
        (left, right): (f64, f64),
        nodes: usize,
        rhs: F,
    ) -> Result<Self> {
        if nodes < 3 {
            return Err(Error::InvalidInput(format!("need at least 3 mesh nodes (got {nodes})")));
        }
        Self::with_rhs(g, s, scaling, GridFunction::from_fn(left, right, nodes, rhs)?)
    }

    /// Right-hand side given on the problem mesh.
    pub fn with_rhs(g: OrliczFunction, s: f64, scaling: Scaling, rhs: GridFunction) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(invalid_param(format!("s must lie in (0, 1] (got {s})")));
        }
        if rhs.node_count() < 3 {
            return Err(Error::InvalidInput("need at least 3 mesh nodes".into()));
        }
        Ok(Self {
            g,
            s,
            scaling,
            rhs,
            quadrature: QuadratureConfig::default(),
        })
    }

    pub fn with_quadrature(mut self, cfg: QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        self.quadrature = cfg;
        Ok(self)
    }

    /// Same data with another `s`.
    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::with_rhs(self.g.clone(), s, self.scaling, self.rhs.clone())?.with_quadrature(self.quadrature)
    }

    /// Same data with another Orlicz function.
    pub fn with_g(&self, g: OrliczFunction) -> Result<Self> {
        Self::with_rhs(g, self.s, self.scaling, self.rhs.clone())?.with_quadrature(self.quadrature)
    }

    pub fn g(&self) -> &OrliczFunction {
        &self.g
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn scaling(&self) -> Scaling {
        self.scaling
    }

    pub fn rhs(&self) -> &GridFunction {
        &self.rhs
    }

    pub fn node_count(&self) -> usize {
        self.rhs.node_count()
    }

    pub fn left(&self) -> f64 {
        self.rhs.left()
    }

    pub fn right(&self) -> f64 {
        self.rhs.right()
    }

    /// Factor in front of the modular.
    pub fn sigma(&self) -> f64 {
        match (self.scaling, self.s < 1.0) {
            (Scaling::BbmScaled, true) => 1.0 - self.s,
            _ => 1.0,
        }
    }

    fn form(&self) -> Result<ModularForm> {
        ModularForm::for_order(&self.g, self.s, self.left(), self.right(), self.node_count(), &self.quadrature)
    }

    /// `b_i = \int f phi_i` for the interior hat functions (exact for piecewise-linear `f`).
    pub fn load_vector(&self) -> Vec<f64> {
        let f = self.rhs.values();
        let h = self.rhs.spacing();
        (1..f.len() - 1).map(|i| h / 6.0 * (f[i - 1] + 4.0 * f[i] + f[i + 1])).collect()
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        if !self.rhs.same_mesh(u) {
            return Err(Error::InvalidInput("function is not on the problem mesh".into()));
        }
        if !u.is_w0() {
            return Err(Error::InvalidInput("function must vanish at both boundary nodes".into()));
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn energy_with(problem: &DirichletProblem, form: &ModularForm, b: &[f64], u: &[f64]) -> Result<f64> {
    Ok(problem.sigma() * form.value(u)? - dot(&u[1..u.len() - 1], b))
}

fn gradient_with(problem: &DirichletProblem, form: &ModularForm, b: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let full = form.gradient(u)?;
    let sigma = problem.sigma();
    Ok(full[1..full.len() - 1].iter().zip(b).map(|(g, bi)| sigma * g - bi).collect())
}

/// `sigma Phi_{s,G}(u) - \int f u`.
pub fn energy(problem: &DirichletProblem, u: &GridFunction) -> Result<f64> {
    problem.check(u)?;
    energy_with(problem, &problem.form()?, &problem.load_vector(), u.values())
}

/// Partial derivatives of [`energy`] with respect to the interior nodal values,
/// `sigma <A u, phi_i> - \int f phi_i` where `<A u, v>` is the derivative of the
/// modular at `u` in direction `v`.
pub fn energy_gradient(problem: &DirichletProblem, u: &GridFunction) -> Result<Vec<f64>> {
    problem.check(u)?;
    gradient_with(problem, &problem.form()?, &problem.load_vector(), u.values())
}

/// `max_i |sigma <A u, phi_i> - \int f phi_i|`, assembled hat function by hat function
/// (independently of the row-wise gradient assembly).
pub fn weak_residual(problem: &DirichletProblem, u: &GridFunction) -> Result<f64> {
    problem.check(u)?;
    let pairs = problem.form()?.basis_pairings(u.values())?;
    let sigma = problem.sigma();
    Ok(pairs
        .iter()
        .zip(problem.load_vector())
        .map(|(a, b)| (sigma * a - b).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Stop when the Euclidean norm of the nodal gradient drops below this;
    /// `None` means `1e-8 max(1, |energy|)`.
    pub tol: Option<f64>,
    pub max_iter: usize,
    /// Armijo sufficient-decrease parameter.
    pub armijo: f64,
    /// Step shrink factor of the backtracking search.
    pub backtrack: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: None,
            max_iter: 100,
            armijo: 1e-4,
            backtrack: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub u: GridFunction,
    pub energy: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub weak_residual: f64,
    /// Gradient tolerance in force at the final iterate.
    pub tolerance: f64,
    /// `false` when the iteration budget ran out or the line search stalled.
    pub converged: bool,
    /// Energy after every accepted step, starting with the initial iterate.
    pub energy_history: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Minimises the energy from `u = 0` by damped Newton steps.
///
/// The Newton system is regularised with a multiple of the `t^2` Hessian (always
/// positive definite) whenever the Cholesky factorisation fails, and every step is
/// accepted by Armijo backtracking, so the energy never increases.
pub fn solve(problem: &DirichletProblem, opts: &SolveOptions) -> Result<SolveResult> {
    if !(opts.armijo > 0.0 && opts.armijo < 0.5 && opts.backtrack > 0.0 && opts.backtrack < 1.0) {
        return Err(invalid_param("need 0 < armijo < 1/2 and 0 < backtrack < 1"));
    }
    let mut warnings = Vec::new();
    if !problem.g.is_strictly_convex() {
        let msg = format!("{} is not strictly convex; the minimiser may not be unique", problem.g);
        warn!("{msg}");
        warnings.push(msg);
    }
    let form = problem.form()?;
    let b = problem.load_vector();
    let m = b.len();
    let reference = ModularForm::for_order(
        &OrliczFunction::power(2.0)?,
        problem.s,
        problem.left(),
        problem.right(),
        problem.node_count(),
        &problem.quadrature,
    )?
    .hessian(&vec![0.0; m + 2])?
    .view((1, 1), (m, m))
    .into_owned();
    let ref_trace = reference.trace();

    let sigma = problem.sigma();
    let mut x = vec![0.0; m + 2];
    let mut e = energy_with(problem, &form, &b, &x)?;
    let mut history = vec![e];
    let mut mu = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    let (mut grad, mut gnorm, mut tol);
    loop {
        grad = gradient_with(problem, &form, &b, &x)?;
        gnorm = dot(&grad, &grad).sqrt();
        tol = opts.tol.unwrap_or(1e-8 * e.abs().max(1.0));
        debug!("iteration {iterations}: energy {e:.16e}, |grad| {gnorm:.3e}");
        if gnorm <= tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            warnings.push(format!("iteration budget {} exhausted", opts.max_iter));
            break;
        }
        iterations += 1;
        let h: DMatrix<f64> = form.hessian(&x)?.view((1, 1), (m, m)) * sigma;
        let scale = (h.trace().abs() / ref_trace).max(gnorm).max(1e-300);
        let rhs = DVector::from_iterator(m, grad.iter().map(|g| -g));
        let mut step = None;
        mu = if mu == 0.0 { 0.0 } else { mu / 10.0 };
        for _ in 0..60 {
            if let Some(chol) = (&h + &reference * mu).cholesky() {
                let d = chol.solve(&rhs);
                if d.iter().all(|v| v.is_finite()) && dot(d.as_slice(), &grad) < 0.0 {
                    step = Some(d);
                    break;
                }
            }
            mu = if mu == 0.0 { 1e-10 * scale } else { mu * 10.0 };
        }
        let Some(d) = step else {
            warnings.push("no descent direction from the regularised Newton system".into());
            break;
        };
        let slope = dot(d.as_slice(), &grad);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(i, xi)| if i == 0 || i == m + 1 { 0.0 } else { xi + alpha * d[i - 1] })
                .collect();
            let et = energy_with(problem, &form, &b, &trial)?;
            if et <= e + opts.armijo * alpha * slope {
                accepted = Some((trial, et));
                break;
            }
            alpha *= opts.backtrack;
        }
        let Some((trial, et)) = accepted else {
            warnings.push("line search stalled".into());
            break;
        };
        if alpha < 1.0 {
            mu = mu.max(1e-10 * scale) * 10.0;
        }
        x = trial;
        e = et;
        history.push(e);
    }
    let u = GridFunction::new(problem.left(), problem.right(), x)?;
    let weak_residual = weak_residual(problem, &u)?;
    Ok(SolveResult {
        u,
        energy: e,
        iterations,
        grad_norm: gnorm,
        weak_residual,
        tolerance: tol,
        converged,
        energy_history: history,
        warnings,
    })
}

/// Truncated operator
/// `\int_{|x-y| >= eps} g(|u(x)-u(y)|/|x-y|^s) sgn(u(x)-u(y)) dy / |x-y|^{1+s}`
/// for the zero extension of `u`.
///
/// Inside the mesh the integral is adaptive with breakpoints at the nodes; beyond
/// the boundary `u = 0` and the radial integral is exact:
/// `\int_{r_0}^\infty g(c r^{-s}) r^{-1-s} dr = G(c r_0^{-s}) / (s c)`.
pub fn apply_pointwise_eps(g: &OrliczFunction, s: f64, u: &GridFunction, x: f64, eps: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid_param(format!("s must lie in (0, 1) (got {s})")));
    }
    if !(eps > 0.0) {
        return Err(invalid_param(format!("eps must be positive (got {eps})")));
    }
    let (l, r) = (u.left(), u.right());
    if !(x > l && x < r) {
        return Err(Error::InvalidInput(format!("x = {x} is not inside ({l}, {r})")));
    }
    let ux = u.eval(x);
    let integrand = |y: f64| {
        let diff = ux - u.eval(y);
        if diff == 0.0 {
            return 0.0;
        }
        let d = (x - y).abs();
        g.derivative(diff.abs() / d.powf(s)) * diff.signum() / d.powf(1.0 + s)
    };
    let nodes = u.nodes();
    let mut total = 0.0;
    for (a, b) in [(l, x - eps), (x + eps, r)] {
        if b > a {
            let breaks: Vec<f64> = nodes.iter().copied().filter(|t| *t > a && *t < b).collect();
            total += quadrature::integrate(integrand, a, b, &breaks, 1e-10)?;
        }
    }
    let c = ux.abs();
    if c > 0.0 {
        for r0 in [(x - l).max(eps), (r - x).max(eps)] {
            total += ux.signum() * g.value(c / r0.powf(s)) / (s * c);
        }
    }
    Ok(total)
}

/// Fractional minimiser at one `s`, compared with the local limit problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaEntry {
    pub s: f64,
    pub result: SolveResult,
    /// Luxemburg norm of `u_s - u_local` in `L^G`.
    pub norm_gap: f64,
    /// `|F_s(u_s) - F(u_local)|`.
    pub energy_gap: f64,
}

#[derive(Debug, Clone)]
pub struct GammaReport {
    /// Minimiser of `Phi_{G~}(|u'|) - \int f u`.
    pub local: SolveResult,
    /// One entry per `s`, or the error of that sub-solve.
    pub entries: Vec<(f64, std::result::Result<GammaEntry, String>)>,
}

impl GammaReport {
    /// Successful entries in input order.
    pub fn successes(&self) -> Vec<&GammaEntry> {
        self.entries.iter().filter_map(|(_, e)| e.as_ref().ok()).collect()
    }
}

/// Solves the `(1-s)`-scaled problem at each `s` and the local problem with `G~`
/// (one-dimensional limit density) in place of `G`.
pub fn gamma_run(template: &DirichletProblem, s_list: &[f64], opts: &SolveOptions) -> Result<GammaReport> {
    check_s_list(s_list)?;
    let tilde = LimitDensity::new(template.g.clone(), 1)?.to_orlicz()?;
    let local_problem = DirichletProblem::with_rhs(tilde, 1.0, Scaling::BbmScaled, template.rhs.clone())?
        .with_quadrature(template.quadrature)?;
    let local = solve(&local_problem, opts)?;
    let g = template.g.clone();
    let entries = s_list
        .iter()
        .map(|&s| {
            let run = || -> Result<GammaEntry> {
                let mut problem = template.with_s(s)?;
                problem.scaling = Scaling::BbmScaled;
                let result = solve(&problem, opts)?;
                let diff = result.u.combine(1.0, &local.u, -1.0)?;
                let norm_gap = grid::luxemburg_norm(|v| Ok(grid::modular(&g, v)), &diff)?;
                Ok(GammaEntry {
                    s,
                    norm_gap,
                    energy_gap: (result.energy - local.energy).abs(),
                    result,
                })
            };
            (s, run().map_err(|e| e.to_string()))
        })
        .collect();
    Ok(GammaReport { local, entries })
}
