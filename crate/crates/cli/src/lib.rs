//! Config-driven experiments over the `frac-orlicz` library. Every command writes
//! CSV (17 significant digits) or `name=value` text under an output directory.

pub mod config;
pub mod spec;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use frac_orlicz::limit_density::{tilde_closed_form, tilde_eval};
use frac_orlicz::properties::{builtin_functions, modular_suite, orlicz_suite, ModularSuiteOptions, PropertyOutcome};
use frac_orlicz::{
    bbm_curve, gamma_run, poincare_check, solve, ClosedForm, DirichletProblem, GridFunction, OrliczFunction,
    SolveOptions,
};
use thiserror::Error;

pub use config::{parse_config, Command, ConfigError, ExperimentConfig};

/// Exit status of a run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{}", join_config_errors(.0))]
    Config(Vec<ConfigError>),

    #[error("invalid experiment: {0}")]
    Invalid(String),

    #[error("{0}")]
    Numeric(String),

    #[error("{0}")]
    Violations(String),

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn join_config_errors(errors: &[ConfigError]) -> String {
    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Invalid(_) | Self::Io { .. } => EXIT_INVALID,
            Self::Numeric(_) | Self::Violations(_) => EXIT_NUMERIC,
        }
    }
}

impl From<frac_orlicz::Error> for RunError {
    fn from(e: frac_orlicz::Error) -> Self {
        use frac_orlicz::Error as E;
        match e {
            E::InvalidParameter(_) | E::InvalidFunction(_) | E::InvalidInput(_) | E::UnsupportedDimension(_) => {
                Self::Invalid(e.to_string())
            }
            _ => Self::Numeric(e.to_string()),
        }
    }
}

/// Files written by a successful run and a one-line description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub message: String,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, RunError> {
        std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        self.files.push(path);
        Ok(())
    }

    fn finish(self, message: String) -> RunSummary {
        RunSummary {
            files: self.files,
            message,
        }
    }
}

fn g_of(config: &ExperimentConfig) -> Result<&OrliczFunction, RunError> {
    config
        .g
        .as_ref()
        .ok_or_else(|| RunError::Invalid(format!("command {} needs G", config.command)))
}

fn test_function(config: &ExperimentConfig) -> Result<GridFunction, RunError> {
    let (l, r) = config.domain;
    let u = config.u.build(l, r, config.nodes).map_err(RunError::Invalid)?;
    if u.left() != l || u.right() != r || u.node_count() != config.nodes {
        return Err(RunError::Invalid(format!(
            "test function lives on ({}, {}) with {} nodes, config asks for ({l}, {r}) with {}",
            u.left(),
            u.right(),
            u.node_count(),
            config.nodes
        )));
    }
    Ok(u)
}

fn solve_options(config: &ExperimentConfig) -> SolveOptions {
    SolveOptions {
        tol: config.tol,
        max_iter: config.max_iter,
        ..SolveOptions::default()
    }
}

fn problem(config: &ExperimentConfig, s: f64) -> Result<DirichletProblem, RunError> {
    let (l, r) = config.domain;
    let rhs = config
        .rhs
        .as_ref()
        .ok_or_else(|| RunError::Invalid(format!("command {} needs rhs", config.command)))?
        .sample(l, r, config.nodes)
        .map_err(RunError::Invalid)?;
    Ok(DirichletProblem::with_rhs(g_of(config)?.clone(), s, config.scaling, rhs)?.with_quadrature(config.quadrature)?)
}

/// Runs the experiment and writes its artifacts under `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary, RunError> {
    let mut out = Output::new(out_dir)?;
    let message = match config.command {
        Command::Tilde => run_tilde(config, &mut out)?,
        Command::Bbm => run_bbm(config, &mut out)?,
        Command::Poincare => run_poincare(config, &mut out)?,
        Command::Solve => run_solve(config, &mut out)?,
        Command::Gamma => run_gamma(config, &mut out)?,
        Command::Check => run_check(config, &mut out)?,
    };
    Ok(out.finish(message))
}

fn run_tilde(config: &ExperimentConfig, out: &mut Output) -> Result<String, RunError> {
    let g = g_of(config)?;
    let closed = ClosedForm::detect(g);
    let mut csv = String::from("a,tilde_quadrature,tilde_closed_form,rel_diff\n");
    let mut worst: f64 = 0.0;
    for &a in &config.a_grid {
        let quad = tilde_eval(g, config.n, a)?;
        match closed {
            Some(kind) => {
                let exact = tilde_closed_form(kind, config.n, a)?;
                let rel = if exact == 0.0 {
                    quad.abs()
                } else {
                    (quad - exact).abs() / exact.abs()
                };
                worst = worst.max(rel);
                let _ = writeln!(csv, "{},{},{},{}", fmt_f64(a), fmt_f64(quad), fmt_f64(exact), fmt_f64(rel));
            }
            None => {
                let _ = writeln!(csv, "{},{},,", fmt_f64(a), fmt_f64(quad));
            }
        }
    }
    out.write("tilde.csv", &csv)?;
    Ok(match closed {
        Some(_) => format!("tilde: {} points, max rel_diff {worst:.3e}", config.a_grid.len()),
        None => format!("tilde: {} points, no closed form for {g}", config.a_grid.len()),
    })
}

fn run_bbm(config: &ExperimentConfig, out: &mut Output) -> Result<String, RunError> {
    let g = g_of(config)?;
    let u = test_function(config)?;
    let curve = bbm_curve(g, &u, &config.s_list, &config.quadrature)?;
    let mut csv = String::from("s,scaled_modular,target,rel_gap\n");
    for (i, (s, v)) in curve.entries.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_f64(*s),
            fmt_f64(*v),
            fmt_f64(curve.target),
            fmt_f64(curve.entry_gap(i))
        );
    }
    let _ = writeln!(
        csv,
        "EXTRAPOLATED,{},{},{}",
        fmt_f64(curve.extrapolated_limit),
        fmt_f64(curve.target),
        fmt_f64(curve.rel_gap())
    );
    out.write("bbm.csv", &csv)?;
    Ok(format!(
        "bbm: extrapolated {:.6} vs target {:.6} (rel gap {:.3e})",
        curve.extrapolated_limit,
        curve.target,
        curve.rel_gap()
    ))
}

fn run_poincare(config: &ExperimentConfig, out: &mut Output) -> Result<String, RunError> {
    let g = g_of(config)?;
    let u = test_function(config)?;
    let mut csv = String::from("s,modular,scaled_fractional,ratio,budget,holds\n");
    let mut failures = Vec::new();
    for &s in &config.s_list {
        let r = poincare_check(g, s, &u, &config.quadrature)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_f64(r.s),
            fmt_f64(r.modular),
            fmt_f64(r.scaled_fractional),
            fmt_f64(r.ratio),
            fmt_f64(r.budget),
            r.holds()
        );
        if !r.holds() {
            failures.push(s);
        }
    }
    out.write("poincare.csv", &csv)?;
    if failures.is_empty() {
        Ok(format!("poincare: ratio within budget at {} values of s", config.s_list.len()))
    } else {
        Err(RunError::Violations(format!("poincare: ratio exceeds budget at s = {failures:?}")))
    }
}

fn summary_text(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

fn run_solve(config: &ExperimentConfig, out: &mut Output) -> Result<String, RunError> {
    let s = config.s_list[0];
    let problem = problem(config, s)?;
    let result = solve(&problem, &solve_options(config))?;
    out.write("solution.csv", &result.u.to_csv())?;
    let pairs = vec![
        ("energy", fmt_f64(result.energy)),
        ("iterations", result.iterations.to_string()),
        ("grad_norm", fmt_f64(result.grad_norm)),
        ("weak_residual", fmt_f64(result.weak_residual)),
        ("tolerance", fmt_f64(result.tolerance)),
        ("converged", result.converged.to_string()),
    ];
    let mut text = summary_text(&pairs);
    for (i, w) in result.warnings.iter().enumerate() {
        let _ = writeln!(text, "warning_{i}={w}");
    }
    out.write("summary.txt", &text)?;
    if !result.converged {
        return Err(RunError::Numeric(format!(
            "solve: no convergence after {} iterations (gradient norm {:.3e} > {:.3e})",
            result.iterations, result.grad_norm, result.tolerance
        )));
    }
    Ok(format!(
        "solve: energy {:.10e} after {} iterations, weak residual {:.3e}",
        result.energy, result.iterations, result.weak_residual
    ))
}

fn run_gamma(config: &ExperimentConfig, out: &mut Output) -> Result<String, RunError> {
    let template = problem(config, config.s_list[0])?;
    let report = gamma_run(&template, &config.s_list, &solve_options(config))?;
    let mut csv = String::from("s,energy,norm_gap,energy_gap,iterations,weak_residual,status\n");
    let local = &report.local;
    let _ = writeln!(
        csv,
        "LOCAL,{},0,0,{},{},{}",
        fmt_f64(local.energy),
        local.iterations,
        fmt_f64(local.weak_residual),
        if local.converged { "ok" } else { "not_converged" }
    );
    out.write("local_solution.csv", &local.u.to_csv())?;
    let mut failed = Vec::new();
    for (s, entry) in &report.entries {
        match entry {
            Ok(e) => {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    fmt_f64(*s),
                    fmt_f64(e.result.energy),
                    fmt_f64(e.norm_gap),
                    fmt_f64(e.energy_gap),
                    e.result.iterations,
                    fmt_f64(e.result.weak_residual),
                    if e.result.converged { "ok" } else { "not_converged" }
                );
                if !e.result.converged {
                    failed.push(*s);
                }
            }
            Err(msg) => {
                let _ = writeln!(csv, "{},,,,,,\"{}\"", fmt_f64(*s), msg.replace('"', "'"));
                failed.push(*s);
            }
        }
    }
    out.write("gamma.csv", &csv)?;
    if !local.converged || !failed.is_empty() {
        return Err(RunError::Numeric(format!(
            "gamma: solves failed or did not converge at s = {failed:?}{}",
            if local.converged { "" } else { " and for the local problem" }
        )));
    }
    let gaps: Vec<String> = report.successes().iter().map(|e| format!("{:.3e}", e.norm_gap)).collect();
    Ok(format!("gamma: norm gaps to the local minimiser [{}]", gaps.join(", ")))
}

fn run_check(config: &ExperimentConfig, out: &mut Output) -> Result<String, RunError> {
    let functions = match &config.g {
        Some(g) => vec![g.clone()],
        None => builtin_functions()?,
    };
    let modular_opts = ModularSuiteOptions {
        functions: config.functions,
        nodes: config.nodes,
        s_samples: config.s_list.clone(),
        seed: config.seed,
        quadrature: config.quadrature,
        ..ModularSuiteOptions::default()
    };
    let mut outcomes: Vec<(&str, PropertyOutcome)> = Vec::new();
    for g in &functions {
        log::info!("check: pointwise suite for {g}");
        outcomes.extend(orlicz_suite(g, config.trials, config.seed)?.into_iter().map(|o| ("orlicz", o)));
        if config.functions > 0 {
            log::info!("check: modular suite for {g}");
            outcomes.extend(modular_suite(g, &modular_opts)?.into_iter().map(|o| ("modular", o)));
        }
    }
    let mut csv = String::from("suite,function,property,trials,violations,worst_ratio\n");
    for (suite, o) in &outcomes {
        let _ = writeln!(
            csv,
            "{suite},\"{}\",\"{}\",{},{},{}",
            o.function,
            o.name,
            o.trials,
            o.violations,
            fmt_f64(o.worst_ratio)
        );
    }
    out.write("check.csv", &csv)?;
    let failed: Vec<String> = outcomes.iter().filter(|(_, o)| !o.passed()).map(|(_, o)| o.to_string()).collect();
    if failed.is_empty() {
        Ok(format!("check: {} properties, no violations", outcomes.len()))
    } else {
        Err(RunError::Violations(format!(
            "check: {} of {} properties violated; first: {}",
            failed.len(),
            outcomes.len(),
            failed[0]
        )))
    }
}
