//! Function specs: catalog names with optional parameters and the two
//! combinators, e.g. `max(sqrt_norm(dim=2), scale(quadratic(dim=2,gamma=1,L=4), alpha=0.5))`.

use std::collections::BTreeMap;

use sqcflow_core::catalog::{self, EntryMetadata};
use sqcflow_core::{Entry64, Point64};

use crate::error::{CliError, CliResult};

/// Catalog names with their parameters and defaults.
pub const FUNCTIONS: &[(&str, &str)] = &[
    ("sqrt_norm", "sqrt_norm(dim=2, r=1)"),
    ("quadratic", "quadratic(dim=2, gamma=1, L=4)"),
    ("half_square", "half_square(dim=1)"),
    ("shifted_half_square", "shifted_half_square(c=1;0)"),
    ("sin_quadratic", "sin_quadratic"),
    ("quadratic_fraction", "quadratic_fraction(beta=2)"),
    ("pl_without_uniqueness", "pl_without_uniqueness"),
    ("cubic", "cubic"),
    ("linear", "linear(c=1)"),
    ("max", "max(A, B)"),
    ("scale", "scale(A, alpha=2)"),
];

#[derive(Debug, Clone, PartialEq)]
struct Node {
    name: String,
    args: Vec<Node>,
    named: BTreeMap<String, String>,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> CliError {
        CliError::usage(format!("function spec '{}': {msg} at column {}", self.src, self.pos + 1))
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn token(&mut self, allowed: impl Fn(char) -> bool) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !allowed(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn node(&mut self) -> CliResult<Node> {
        let name = self.token(|c| c.is_ascii_alphanumeric() || c == '_');
        if name.is_empty() {
            return Err(self.err("expected a function name"));
        }
        let mut node = Node { name: name.to_owned(), args: Vec::new(), named: BTreeMap::new() };
        if !self.eat('(') {
            return Ok(node);
        }
        if self.eat(')') {
            return Ok(node);
        }
        loop {
            let save = self.pos;
            let ident = self.token(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ident.is_empty() && self.eat('=') {
                let value = self.token(|c| !matches!(c, ',' | ')' | '(') && !c.is_whitespace());
                if value.is_empty() {
                    return Err(self.err("expected a value"));
                }
                if node.named.insert(ident.to_owned(), value.to_owned()).is_some() {
                    return Err(self.err(&format!("parameter '{ident}' given twice")));
                }
            } else {
                self.pos = save;
                node.args.push(self.node()?);
            }
            if self.eat(')') {
                return Ok(node);
            }
            if !self.eat(',') {
                return Err(self.err("expected ',' or ')'"));
            }
        }
    }
}

fn parse(src: &str) -> CliResult<Node> {
    let mut p = Parser { src, pos: 0 };
    let node = p.node()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(node)
}

/// Reads `k=v` parameters of one node, rejecting unknown names.
struct Params<'n> {
    node: &'n Node,
}

impl Params<'_> {
    fn check(&self, allowed: &[&str], arity: usize) -> CliResult<()> {
        if let Some(k) = self.node.named.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(CliError::usage(format!(
                "{}: unknown parameter '{k}' (expected one of {allowed:?})",
                self.node.name
            )));
        }
        if self.node.args.len() != arity {
            return Err(CliError::usage(format!(
                "{}: expected {arity} function argument(s), got {}",
                self.node.name,
                self.node.args.len()
            )));
        }
        Ok(())
    }

    fn f64(&self, key: &str, default: f64) -> CliResult<f64> {
        match self.node.named.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| CliError::usage(format!("{}: {key}={v} is not a number", self.node.name))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> CliResult<usize> {
        match self.node.named.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::usage(format!("{}: {key}={v} is not a positive integer", self.node.name))),
        }
    }

    fn point(&self, key: &str, default: &[f64]) -> CliResult<Point64> {
        let coords = match self.node.named.get(key) {
            None => default.to_vec(),
            Some(v) => parse_list(v, ';')?,
        };
        Ok(Point64::new(coords)?)
    }
}

/// Parses `a<sep>b<sep>...` into reals.
pub fn parse_list(s: &str, sep: char) -> CliResult<Vec<f64>> {
    s.split(sep)
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::usage(format!("'{t}' is not a number in '{s}'"))))
        .collect()
}

fn build(node: &Node) -> CliResult<Entry64> {
    let p = Params { node };
    let entry = match node.name.as_str() {
        "sqrt_norm" => {
            p.check(&["dim", "r"], 0)?;
            catalog::sqrt_norm(p.usize("dim", 2)?, p.f64("r", 1.0)?)?
        }
        "quadratic" | "strongly_convex_quadratic" => {
            p.check(&["dim", "gamma", "L"], 0)?;
            catalog::strongly_convex_quadratic(p.usize("dim", 2)?, p.f64("gamma", 1.0)?, p.f64("L", 4.0)?)?
        }
        "half_square" => {
            p.check(&["dim"], 0)?;
            catalog::half_square(p.usize("dim", 1)?)?
        }
        "shifted_half_square" => {
            p.check(&["c"], 0)?;
            catalog::shifted_half_square(p.point("c", &[1.0, 0.0])?)?
        }
        "sin_quadratic" => {
            p.check(&[], 0)?;
            catalog::sin_quadratic()
        }
        "quadratic_fraction" => {
            p.check(&["beta"], 0)?;
            catalog::quadratic_fraction_example(p.f64("beta", 2.0)?)?
        }
        "pl_without_uniqueness" => {
            p.check(&[], 0)?;
            catalog::pl_without_uniqueness()
        }
        "cubic" => {
            p.check(&[], 0)?;
            catalog::cubic()
        }
        "linear" => {
            p.check(&["c"], 0)?;
            catalog::linear(p.point("c", &[1.0])?)?
        }
        "max" => {
            p.check(&[], 2)?;
            catalog::max_combine(&build(&node.args[0])?, &build(&node.args[1])?)?
        }
        "scale" => {
            p.check(&["alpha"], 1)?;
            catalog::scale_combine(&build(&node.args[0])?, p.f64("alpha", 2.0)?)?
        }
        other => return Err(CliError::usage(format!("unknown function '{other}'; see list-functions"))),
    };
    Ok(entry)
}

/// Builds the catalog entry named by `spec`.
pub fn resolve(spec: &str) -> CliResult<Entry64> {
    build(&parse(spec)?)
}

/// Metadata of every catalog function at its default parameters.
pub fn list() -> CliResult<Vec<(String, EntryMetadata<f64>)>> {
    let mut out = Vec::new();
    for (name, syntax) in FUNCTIONS {
        let spec = match *name {
            "max" => "max(quadratic, shifted_half_square)",
            "scale" => "scale(sqrt_norm)",
            other => other,
        };
        out.push(((*syntax).to_owned(), resolve(spec)?.metadata()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_specs() {
        let n = parse("max( quadratic(dim=2,gamma=1,L=4), scale(sqrt_norm(dim=2), alpha=0.5))").unwrap();
        assert_eq!(n.name, "max");
        assert_eq!(n.args.len(), 2);
        assert_eq!(n.args[1].named["alpha"], "0.5");
        assert_eq!(n.args[1].args[0].named["dim"], "2");
    }

    #[test]
    fn resolves_constants() {
        let e = resolve("scale(sqrt_norm(dim=2, r=4), alpha=2)").unwrap();
        assert!((e.gamma().unwrap() - 0.28117066259517454).abs() < 1e-12);
        let e = resolve("max(quadratic(dim=2,gamma=0.3,L=1), quadratic(dim=2,gamma=0.1,L=1))").unwrap();
        assert_eq!(e.gamma(), Some(0.1));
        let e = resolve("shifted_half_square(c=0.5;-1)").unwrap();
        assert_eq!(e.oracle.known_minimizer().unwrap().as_slice(), &[0.5, -1.0]);
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in ["", "nope", "sqrt_norm(dim=x)", "sqrt_norm(q=1)", "max(cubic)", "sqrt_norm(dim=2", "cubic junk"] {
            assert!(matches!(resolve(bad), Err(CliError::Usage(_))), "{bad}");
        }
        assert!(matches!(resolve("sqrt_norm(r=-1)"), Err(CliError::Core(_))));
    }

    #[test]
    fn every_listed_function_resolves() {
        assert_eq!(list().unwrap().len(), FUNCTIONS.len());
    }
}
