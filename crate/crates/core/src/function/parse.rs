//! Formula syntax for generators.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' uint)?
//! atom   := 'z' | number 'i'? | 'i' | func '(' expr ')' | '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp'
//! number := digit+ ('.' digit*)? (('e' | 'E') ('+' | '-')? digit+)?
//! ```
//!
//! Whitespace is ignored between tokens. Composition is written by nesting,
//! e.g. `sin(cos(z))`. Constant subexpressions are folded, so `0.5+2i` is a
//! single complex constant.

use num_complex::Complex64;

use super::expr::{EntireMap, MAX_DEPTH};
use crate::error::{Error, Result};

pub fn parse_formula(text: &str) -> Result<EntireMap> {
    let mut p = Parser { src: text, pos: 0 };
    let map = p.expr(0)?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    if map.depth() > MAX_DEPTH {
        return Err(Error::Formula {
            column: 1,
            message: format!("expression deeper than {MAX_DEPTH}"),
        });
    }
    Ok(map)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Formula {
            column: self.src[..self.pos].chars().count() + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn guard(&self, depth: usize) -> Result<()> {
        // four grammar levels per nesting level
        if depth > 4 * MAX_DEPTH {
            Err(self.error(format!("expression deeper than {MAX_DEPTH}")))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self, depth: usize) -> Result<EntireMap> {
        self.guard(depth)?;
        let mut lhs = self.term(depth + 1)?;
        loop {
            if self.eat('+') {
                let rhs = self.term(depth + 1)?;
                lhs = fold(EntireMap::Sum(Box::new(lhs), Box::new(rhs)));
            } else if self.eat('-') {
                let rhs = self.term(depth + 1)?;
                lhs = fold(EntireMap::Sum(Box::new(lhs), Box::new(fold(EntireMap::Neg(Box::new(rhs))))));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self, depth: usize) -> Result<EntireMap> {
        self.guard(depth)?;
        let mut lhs = self.unary(depth + 1)?;
        while self.eat('*') {
            let rhs = self.unary(depth + 1)?;
            lhs = fold(EntireMap::Product(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn unary(&mut self, depth: usize) -> Result<EntireMap> {
        self.guard(depth)?;
        if self.eat('-') {
            let inner = self.unary(depth + 1)?;
            return Ok(fold(EntireMap::Neg(Box::new(inner))));
        }
        let base = self.atom(depth + 1)?;
        if self.eat('^') {
            self.skip_ws();
            let start = self.pos;
            while self.peek_raw().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected a non-negative integer exponent"));
            }
            let k: u32 = self.src[start..self.pos]
                .parse()
                .map_err(|_| self.error("exponent out of range"))?;
            return Ok(fold(EntireMap::Pow(Box::new(base), k)));
        }
        Ok(base)
    }

    fn atom(&mut self, depth: usize) -> Result<EntireMap> {
        self.guard(depth)?;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr(depth + 1)?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.peek_raw().is_some_and(|c| c.is_ascii_alphanumeric()) {
                    self.pos += 1;
                }
                let ident = &self.src[start..self.pos];
                match ident {
                    "z" => Ok(EntireMap::Var),
                    "i" => Ok(EntireMap::Const(Complex64::new(0.0, 1.0))),
                    "sin" | "cos" | "exp" => {
                        self.expect('(')?;
                        let arg = Box::new(self.expr(depth + 1)?);
                        self.expect(')')?;
                        Ok(fold(match ident {
                            "sin" => EntireMap::Sin(arg),
                            "cos" => EntireMap::Cos(arg),
                            _ => EntireMap::Exp(arg),
                        }))
                    }
                    _ => {
                        self.pos = start;
                        Err(self.error(format!("unknown identifier {ident:?}")))
                    }
                }
            }
            Some(_) => Err(self.error("expected z, a number, a function or '('")),
            None => Err(self.error("unexpected end of formula")),
        }
    }

    fn number(&mut self) -> Result<EntireMap> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let digits = |p: &mut usize| {
            let s = *p;
            while *p < bytes.len() && bytes[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - s
        };
        let mut p = self.pos;
        let mut n = digits(&mut p);
        if p < bytes.len() && bytes[p] == b'.' {
            p += 1;
            n += digits(&mut p);
        }
        if n == 0 {
            return Err(self.error("malformed number"));
        }
        if p < bytes.len() && (bytes[p] == b'e' || bytes[p] == b'E') {
            let mut q = p + 1;
            if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) == 0 {
                self.pos = p;
                return Err(self.error("malformed exponent"));
            }
            p = q;
        }
        let value: f64 = self.src[start..p].parse().map_err(|_| self.error("malformed number"))?;
        self.pos = p;
        if self.peek_raw() == Some('i') && !self.src[p + 1..].starts_with(|c: char| c.is_ascii_alphanumeric()) {
            self.pos += 1;
            return Ok(EntireMap::Const(Complex64::new(0.0, value)));
        }
        Ok(EntireMap::Const(Complex64::new(value, 0.0)))
    }
}

fn fold(node: EntireMap) -> EntireMap {
    use EntireMap::*;
    let c = |m: &EntireMap| match m {
        Const(v) => Some(*v),
        _ => None,
    };
    let folded = match &node {
        Neg(a) => c(a).map(|a| -a),
        Sum(a, b) => c(a).zip(c(b)).map(|(a, b)| a + b),
        Product(a, b) => c(a).zip(c(b)).map(|(a, b)| a * b),
        Pow(a, k) => c(a).map(|a| a.powu(*k)),
        Sin(a) => c(a).map(|a| a.sin()),
        Cos(a) => c(a).map(|a| a.cos()),
        Exp(a) => c(a).map(|a| a.exp()),
        _ => None,
    };
    match folded {
        Some(v) if v.is_finite() => Const(v),
        _ => node,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(s: &str, z: Complex64) -> Complex64 {
        parse_formula(s).unwrap().eval(z)
    }

    #[test]
    fn generators() {
        let z = Complex64::new(0.4, -0.3);
        assert_eq!(at("sin(z)", z), z.sin());
        assert_eq!(at("cos(z)", z), z.cos());
        assert_eq!(at("exp(z)", z), z.exp());
        assert_eq!(parse_formula("sin(cos(z))").unwrap(), EntireMap::Sin(Box::new(EntireMap::cos())));
    }

    #[test]
    fn complex_literal_folds() {
        assert_eq!(parse_formula("0.5+2i").unwrap(), EntireMap::Const(Complex64::new(0.5, 2.0)));
        assert_eq!(parse_formula("-1.5e-3i").unwrap(), EntireMap::Const(Complex64::new(-0.0, -1.5e-3)));
        assert_eq!(parse_formula("i").unwrap(), EntireMap::Const(Complex64::new(0.0, 1.0)));
    }

    #[test]
    fn precedence() {
        let z = Complex64::new(1.5, 0.25);
        let v = at("-z^2 + 3*z - 1", z);
        let expected = -(z * z) + 3.0 * z - 1.0;
        assert!((v - expected).norm() < 1e-14);
    }

    #[test]
    fn gaussian_family_formula() {
        let parsed = parse_formula("z*exp(-(0.5*z^2 + 1.5*z - 1))").unwrap();
        for z in [Complex64::new(0.1, 0.0), Complex64::new(-0.7, 1.3)] {
            let d = parsed.eval(z) - EntireMap::gaussian_family().eval(z);
            assert!(d.norm() < 1e-14);
        }
    }

    #[test]
    fn errors_name_columns() {
        match parse_formula("sin(z) + log(z)") {
            Err(Error::Formula { column, .. }) => assert_eq!(column, 10),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("z/2").is_err());
        assert!(parse_formula("sin z").is_err());
        assert!(parse_formula("z^-1").is_err());
        assert!(parse_formula("(z").is_err());
        assert!(parse_formula("1e").is_err());
        assert!(parse_formula("").is_err());
    }

    #[test]
    fn depth_limit() {
        let deep = format!("{}z{}", "sin(".repeat(80), ")".repeat(80));
        assert!(parse_formula(&deep).is_err());
        let ok = format!("{}z{}", "sin(".repeat(10), ")".repeat(10));
        assert!(parse_formula(&ok).is_ok());
    }
}
