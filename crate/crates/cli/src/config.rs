//! Flat `key = value` experiment configs.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use frac_orlicz::{OrliczFunction, QuadratureConfig, Scaling};

use crate::spec::{parse_orlicz, FunctionSpec, RhsSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Tilde,
    Bbm,
    Poincare,
    Solve,
    Gamma,
    Check,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tilde" => Ok(Self::Tilde),
            "bbm" => Ok(Self::Bbm),
            "poincare" => Ok(Self::Poincare),
            "solve" => Ok(Self::Solve),
            "gamma" => Ok(Self::Gamma),
            "check" => Ok(Self::Check),
            other => Err(format!(
                "unknown command `{other}` (expected tilde, bbm, poincare, solve, gamma or check)"
            )),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Tilde => "tilde",
            Self::Bbm => "bbm",
            Self::Poincare => "poincare",
            Self::Solve => "solve",
            Self::Gamma => "gamma",
            Self::Check => "check",
        };
        f.write_str(name)
    }
}

/// One problem in a config, tied to a line (0 when the whole file is concerned).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    /// `None` only for `check`, which then covers every built-in function.
    pub g: Option<OrliczFunction>,
    pub n: usize,
    pub a_grid: Vec<f64>,
    pub s_list: Vec<f64>,
    pub domain: (f64, f64),
    pub nodes: usize,
    pub rhs: Option<RhsSpec>,
    pub u: FunctionSpec,
    pub scaling: Scaling,
    pub quadrature: QuadratureConfig,
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub seed: u64,
    pub trials: usize,
    pub functions: usize,
    pub output: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "command",
    "G",
    "n",
    "a",
    "s",
    "s_list",
    "domain",
    "N",
    "rhs",
    "u",
    "scaling",
    "rel_tol",
    "abs_tol",
    "near_diagonal_order",
    "tol",
    "max_iter",
    "seed",
    "trials",
    "functions",
    "output",
];

struct Entries {
    map: HashMap<String, (usize, String)>,
    errors: Vec<ConfigError>,
}

impl Entries {
    fn err(&mut self, line: usize, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            message: message.into(),
        });
    }

    fn raw(&self, key: &str) -> Option<(usize, String)> {
        self.map.get(key).cloned()
    }

    /// Parses `key` with `f`; records an error and returns `None` on failure.
    fn get<T>(&mut self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Option<T> {
        let (line, value) = self.raw(key)?;
        match f(&value) {
            Ok(v) => Some(v),
            Err(e) => {
                self.err(line, format!("{key}: {e}"));
                None
            }
        }
    }

    fn required<T>(&mut self, key: &str, command: Command, f: impl FnOnce(&str) -> Result<T, String>) -> Option<T> {
        if !self.map.contains_key(key) {
            self.err(0, format!("missing required key `{key}` for command {command}"));
            return None;
        }
        self.get(key, f)
    }
}

fn real(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x = real(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("must be positive (got {x})"))
    }
}

fn integer(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

fn reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(real).collect()
}

fn s_value(s: &str, allow_one: bool) -> Result<f64, String> {
    let x = real(s)?;
    if x > 0.0 && (x < 1.0 || (allow_one && x == 1.0)) {
        Ok(x)
    } else if allow_one {
        Err(format!("s must lie in (0, 1] (got {x})"))
    } else {
        Err(format!("s must lie in (0, 1) (got {x})"))
    }
}

fn s_list(s: &str) -> Result<Vec<f64>, String> {
    let list = s.split(',').map(|x| s_value(x, false)).collect::<Result<Vec<_>, _>>()?;
    if list.windows(2).any(|w| w[1] <= w[0]) {
        return Err("s values must be strictly increasing".into());
    }
    Ok(list)
}

fn domain(s: &str) -> Result<(f64, f64), String> {
    match reals(s)?.as_slice() {
        [a, b] if a < b => Ok((*a, *b)),
        [a, b] => Err(format!("need left < right (got {a}, {b})")),
        _ => Err("domain must be two numbers `left, right`".into()),
    }
}

fn scaling(s: &str) -> Result<Scaling, String> {
    match s.trim() {
        "bbm_scaled" => Ok(Scaling::BbmScaled),
        "unscaled" => Ok(Scaling::Unscaled),
        other => Err(format!("unknown scaling `{other}` (expected bbm_scaled or unscaled)")),
    }
}

/// Parses and validates a config. `command` (from the command line) is used when the
/// file has no `command` key and must agree with it otherwise. Relative file paths in
/// specs are resolved against `base`.
pub fn parse_config(text: &str, command: Option<Command>, base: &Path) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let mut entries = Entries {
        map: HashMap::new(),
        errors: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            entries.err(line, format!("expected `key = value`, got `{content}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            entries.err(line, format!("unknown key `{key}`"));
        } else if value.is_empty() {
            entries.err(line, format!("{key}: empty value"));
        } else if let Some((first, _)) = entries.map.get(key) {
            let first = *first;
            entries.err(line, format!("duplicate key `{key}` (first set on line {first})"));
        } else {
            entries.map.insert(key.to_string(), (line, value.to_string()));
        }
    }

    let from_file = entries.get("command", |s| s.parse::<Command>());
    let command = match (from_file, command) {
        (Some(f), Some(c)) if f != c => {
            let line = entries.raw("command").map_or(0, |(l, _)| l);
            entries.err(line, format!("config is for `{f}` but `{c}` was requested"));
            c
        }
        (Some(f), _) => f,
        (None, Some(c)) => c,
        (None, None) => {
            if !entries.map.contains_key("command") {
                entries.err(0, "missing required key `command`");
            }
            entries.get("G", parse_orlicz);
            entries.errors.sort_by_key(|e| e.line);
            return Err(entries.errors);
        }
    };

    let needs_g = command != Command::Check;
    let g = if needs_g {
        entries.required("G", command, parse_orlicz)
    } else {
        entries.get("G", parse_orlicz)
    };

    let n = match command {
        Command::Tilde => entries.required("n", command, |s| match integer(s)? {
            n @ 1..=3 => Ok(n),
            n => Err(format!("n must be 1, 2 or 3 (got {n})")),
        }),
        _ => entries.get("n", |s| match integer(s)? {
            1 => Ok(1),
            n => Err(format!("grid experiments are one-dimensional (got n = {n})")),
        }),
    }
    .unwrap_or(1);
    let a_grid = entries
        .get("a", |s| {
            let a = reals(s)?;
            if a.iter().any(|x| *x < 0.0) {
                return Err("a values must be nonnegative".into());
            }
            Ok(a)
        })
        .unwrap_or_else(|| vec![0.25, 0.5, 1.0, 2.0, 4.0]);

    let grid = !matches!(command, Command::Tilde);
    let dom = if grid && command != Command::Check {
        entries.required("domain", command, domain)
    } else {
        entries.get("domain", domain)
    }
    .unwrap_or((-1.0, 1.0));
    let min_nodes = if matches!(command, Command::Solve | Command::Gamma) { 3 } else { 2 };
    let nodes_parser = |s: &str| match integer(s)? {
        n if n >= min_nodes => Ok(n),
        n => Err(format!("N must be at least {min_nodes} (got {n})")),
    };
    let nodes = if grid && command != Command::Check {
        entries.required("N", command, nodes_parser)
    } else {
        entries.get("N", nodes_parser)
    }
    .unwrap_or(257);

    let s_list = match command {
        Command::Bbm | Command::Gamma => entries.required("s_list", command, s_list).unwrap_or_default(),
        Command::Solve => entries
            .required("s", command, |s| s_value(s, true))
            .map(|s| vec![s])
            .unwrap_or_default(),
        Command::Poincare => match (entries.raw("s"), entries.raw("s_list")) {
            (Some(_), Some((line, _))) => {
                entries.err(line, "give either `s` or `s_list`, not both");
                Vec::new()
            }
            (Some(_), None) => entries.get("s", |s| s_value(s, false)).map(|s| vec![s]).unwrap_or_default(),
            (None, Some(_)) => entries.get("s_list", s_list).unwrap_or_default(),
            (None, None) => {
                entries.err(0, "missing required key `s` or `s_list` for command poincare");
                Vec::new()
            }
        },
        Command::Check => entries.get("s_list", s_list).unwrap_or_else(|| vec![0.3, 0.6, 0.9]),
        Command::Tilde => Vec::new(),
    };

    let rhs = if matches!(command, Command::Solve | Command::Gamma) {
        entries.required("rhs", command, |s| RhsSpec::parse(s, base))
    } else {
        entries.get("rhs", |s| RhsSpec::parse(s, base))
    };
    let u = entries
        .get("u", |s| FunctionSpec::parse(s, base))
        .unwrap_or(FunctionSpec::Hat(1.0));
    let scaling = entries.get("scaling", scaling).unwrap_or_default();

    let defaults = QuadratureConfig::default();
    let quadrature = QuadratureConfig {
        near_diagonal_order: entries
            .get("near_diagonal_order", |s| match integer(s)? {
                o @ 2..=64 => Ok(o),
                o => Err(format!("must lie in 2..=64 (got {o})")),
            })
            .unwrap_or(defaults.near_diagonal_order),
        rel_tol: entries.get("rel_tol", positive).unwrap_or(defaults.rel_tol),
        abs_tol: entries.get("abs_tol", positive).unwrap_or(defaults.abs_tol),
    };
    let tol = entries.get("tol", positive);
    let max_iter = entries.get("max_iter", integer).unwrap_or(100);
    let seed = entries.get("seed", |s| s.trim().parse::<u64>().map_err(|e| e.to_string())).unwrap_or(1);
    let trials = entries.get("trials", integer).unwrap_or(1000);
    let functions = entries.get("functions", integer).unwrap_or(50);
    let output = entries.get("output", |s| Ok(PathBuf::from(s)));

    if !entries.errors.is_empty() {
        entries.errors.sort_by_key(|e| e.line);
        return Err(entries.errors);
    }
    Ok(ExperimentConfig {
        command,
        g,
        n,
        a_grid,
        s_list,
        domain: dom,
        nodes,
        rhs,
        u,
        scaling,
        quadrature,
        tol,
        max_iter,
        seed,
        trials,
        functions,
        output,
    })
}
