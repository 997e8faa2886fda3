//! Grammar of function specs in config files.
//!
//! ```text
//! G   := power(p) | power_log(p) | power_abs_log(p)
//!      | sum(T, T, ...) | max(G, G, ...) | compose(G, G) | normalize(G)
//! T   := w*G | G
//! rhs := <number> | const(c) | poly(c0, c1, ...) | sin(k) | file(path)
//! u   := hat(peak) | random(seed) | file(path)
//! ```
//!
//! `sin(k)` is `sin(k pi (x - a)/(b - a))` on the domain `(a, b)`; `poly` is in `x`.

use std::path::{Path, PathBuf};

use frac_orlicz::properties::random_w0;
use frac_orlicz::{GridFunction, OrliczFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Number(f64),
    Word(String),
    Call(String, Vec<Node>),
    Weighted(f64, Box<Node>),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(format!("expected `{c}` at `{}`", self.rest()))
        }
    }

    fn token(&mut self) -> &'a str {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .find(|c: char| matches!(c, '(' | ')' | ',' | '*') || c.is_whitespace())
            .unwrap_or(rest.len());
        self.pos += end;
        &rest[..end]
    }

    fn node(&mut self) -> Result<Node, String> {
        let tok = self.token();
        if tok.is_empty() {
            return Err(format!("expected a value at `{}`", self.rest()));
        }
        if let Ok(x) = tok.parse::<f64>() {
            if self.eat('*') {
                return Ok(Node::Weighted(x, Box::new(self.node()?)));
            }
            return Ok(Node::Number(x));
        }
        if self.eat('(') {
            let mut args = Vec::new();
            if !self.eat(')') {
                loop {
                    args.push(self.node()?);
                    if self.eat(')') {
                        break;
                    }
                    self.expect(',')?;
                }
            }
            return Ok(Node::Call(tok.to_string(), args));
        }
        Ok(Node::Word(tok.to_string()))
    }

    fn finish(mut self) -> Result<(), String> {
        self.skip_ws();
        if self.rest().is_empty() {
            Ok(())
        } else {
            Err(format!("unexpected trailing input `{}`", self.rest()))
        }
    }
}

fn parse_node(src: &str) -> Result<Node, String> {
    let mut p = Parser::new(src);
    let node = p.node()?;
    p.finish()?;
    Ok(node)
}

fn number(node: &Node, what: &str) -> Result<f64, String> {
    match node {
        Node::Number(x) => Ok(*x),
        _ => Err(format!("{what} must be a number")),
    }
}

fn single_number(name: &str, args: &[Node]) -> Result<f64, String> {
    match args {
        [a] => number(a, &format!("argument of {name}")),
        _ => Err(format!("{name} takes exactly one number")),
    }
}

fn orlicz_from(node: &Node) -> Result<OrliczFunction, String> {
    let lib = |r: frac_orlicz::Result<OrliczFunction>| r.map_err(|e| e.to_string());
    match node {
        Node::Call(name, args) => match name.as_str() {
            "power" => lib(OrliczFunction::power(single_number(name, args)?)),
            "power_log" => lib(OrliczFunction::power_log(single_number(name, args)?)),
            "power_abs_log" => lib(OrliczFunction::power_abs_log(single_number(name, args)?)),
            "sum" => {
                let mut parts = Vec::new();
                let mut weights = Vec::new();
                for a in args {
                    let (w, g) = match a {
                        Node::Weighted(w, inner) => (*w, orlicz_from(inner)?),
                        other => (1.0, orlicz_from(other)?),
                    };
                    weights.push(w);
                    parts.push(g);
                }
                lib(OrliczFunction::weighted_sum(parts, weights))
            }
            "max" => lib(OrliczFunction::pointwise_max(args.iter().map(orlicz_from).collect::<Result<_, _>>()?)),
            "compose" => match args.as_slice() {
                [outer, inner] => lib(OrliczFunction::composition(orlicz_from(outer)?, orlicz_from(inner)?)),
                _ => Err("compose takes exactly two functions".into()),
            },
            "normalize" => match args.as_slice() {
                [g] => lib(orlicz_from(g)?.normalize()),
                _ => Err("normalize takes exactly one function".into()),
            },
            other => Err(format!("unknown Orlicz function `{other}`")),
        },
        Node::Weighted(..) => Err("weights are only allowed inside sum(...)".into()),
        _ => Err("expected an Orlicz function such as power(2)".into()),
    }
}

/// Parses an Orlicz function spec such as `max(power(2), power(3))`.
pub fn parse_orlicz(src: &str) -> Result<OrliczFunction, String> {
    orlicz_from(&parse_node(src)?)
}

fn resolve(base: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn file_arg(name: &str, args: &[Node]) -> Result<String, String> {
    match args {
        [Node::Word(w)] => Ok(w.clone()),
        _ => Err(format!("{name} takes a file path")),
    }
}

fn read_grid(path: &Path) -> Result<GridFunction, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    GridFunction::from_csv(&text).map_err(|e| e.to_string())
}

/// Right-hand side `f`.
#[derive(Debug, Clone, PartialEq)]
pub enum RhsSpec {
    Poly(Vec<f64>),
    Sin(f64),
    File(PathBuf),
}

impl RhsSpec {
    pub fn parse(src: &str, base: &Path) -> Result<Self, String> {
        match parse_node(src)? {
            Node::Number(c) => Ok(Self::Poly(vec![c])),
            Node::Call(name, args) => match name.as_str() {
                "const" => Ok(Self::Poly(vec![single_number(&name, &args)?])),
                "poly" if !args.is_empty() => Ok(Self::Poly(
                    args.iter().map(|a| number(a, "poly coefficient")).collect::<Result<_, _>>()?,
                )),
                "sin" => Ok(Self::Sin(single_number(&name, &args)?)),
                "file" => Ok(Self::File(resolve(base, &file_arg(&name, &args)?))),
                other => Err(format!("unknown right-hand side `{other}`")),
            },
            _ => Err("expected a number, const(c), poly(...), sin(k) or file(path)".into()),
        }
    }

    /// Samples `f` on the mesh of `(left, right)` with `nodes` nodes.
    pub fn sample(&self, left: f64, right: f64, nodes: usize) -> Result<GridFunction, String> {
        let lib = |r: frac_orlicz::Result<GridFunction>| r.map_err(|e| e.to_string());
        match self {
            Self::Poly(c) => lib(GridFunction::from_fn(left, right, nodes, |x| {
                c.iter().rev().fold(0.0, |acc, ci| acc * x + ci)
            })),
            Self::Sin(k) => lib(GridFunction::from_fn(left, right, nodes, |x| {
                (k * std::f64::consts::PI * (x - left) / (right - left)).sin()
            })),
            Self::File(path) => {
                let g = read_grid(path)?;
                lib(g.resample(left, right, nodes))
            }
        }
    }
}

/// Test function `u`.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Hat(f64),
    Random(u64),
    File(PathBuf),
}

impl FunctionSpec {
    pub fn parse(src: &str, base: &Path) -> Result<Self, String> {
        match parse_node(src)? {
            Node::Call(name, args) => match name.as_str() {
                "hat" => Ok(Self::Hat(single_number(&name, &args)?)),
                "random" => {
                    let seed = single_number(&name, &args)?;
                    if seed < 0.0 || seed.fract() != 0.0 {
                        return Err("random(seed) needs a nonnegative integer seed".into());
                    }
                    Ok(Self::Random(seed as u64))
                }
                "file" => Ok(Self::File(resolve(base, &file_arg(&name, &args)?))),
                other => Err(format!("unknown test function `{other}`")),
            },
            _ => Err("expected hat(peak), random(seed) or file(path)".into()),
        }
    }

    pub fn build(&self, left: f64, right: f64, nodes: usize) -> Result<GridFunction, String> {
        match self {
            Self::Hat(peak) => GridFunction::hat(left, right, nodes, *peak).map_err(|e| e.to_string()),
            Self::Random(seed) => {
                random_w0(&mut ChaCha8Rng::seed_from_u64(*seed), left, right, nodes).map_err(|e| e.to_string())
            }
            Self::File(path) => read_grid(path),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_functions() {
        let g = parse_orlicz("max(power(2), power(3))").unwrap();
        assert_eq!(g.value(0.5), 0.25);
        let g = parse_orlicz(" sum( 1*power(2), 0 * power(3) ) ").unwrap();
        assert_eq!(g.value(2.0), 4.0);
        let g = parse_orlicz("compose(power(2), power_log(3))").unwrap();
        assert!((g.value(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn display_round_trips() {
        for src in ["power(2)", "max(power(2), power(3))", "sum(0.5*power(2), 0.5*power(3))"] {
            let g = parse_orlicz(src).unwrap();
            let again = parse_orlicz(&g.to_string()).unwrap();
            assert_eq!(g.value(1.7), again.value(1.7));
        }
    }

    #[test]
    fn reports_errors() {
        assert!(parse_orlicz("power(0.5)").unwrap_err().contains("invalid parameter"));
        assert!(parse_orlicz("warp(2)").is_err());
        assert!(parse_orlicz("power(2").is_err());
        assert!(parse_orlicz("power(2) x").is_err());
        assert!(parse_orlicz("2*power(2)").is_err());
        assert!(parse_orlicz("max()").is_err());
    }

    #[test]
    fn rhs_specs_sample() {
        let base = Path::new(".");
        let f = RhsSpec::parse("poly(1, 2)", base).unwrap().sample(0.0, 1.0, 3).unwrap();
        assert_eq!(f.values(), &[1.0, 2.0, 3.0]);
        let f = RhsSpec::parse("1", base).unwrap().sample(0.0, 1.0, 3).unwrap();
        assert_eq!(f.values(), &[1.0, 1.0, 1.0]);
        assert!(RhsSpec::parse("cos(1)", base).is_err());
    }

    #[test]
    fn function_specs_build() {
        let base = Path::new(".");
        let u = FunctionSpec::parse("hat(2)", base).unwrap().build(-1.0, 1.0, 5).unwrap();
        assert_eq!(u.values(), &[0.0, 1.0, 2.0, 1.0, 0.0]);
        let a = FunctionSpec::parse("random(4)", base).unwrap().build(-1.0, 1.0, 33).unwrap();
        let b = FunctionSpec::parse("random(4)", base).unwrap().build(-1.0, 1.0, 33).unwrap();
        assert_eq!(a, b);
        assert!(FunctionSpec::parse("random(-1)", base).is_err());
    }
}
