use std::fmt;

use num_complex::Complex64;

/// Expression trees deeper than this are rejected by the parser.
pub const MAX_DEPTH: usize = 64;

/// An entire function of `z`, as an expression tree.
///
/// Every constructor keeps the function entire: there is no division by a
/// non-constant and no logarithm.
#[derive(Debug, Clone, PartialEq)]
pub enum EntireMap {
    Var,
    Const(Complex64),
    Neg(Box<EntireMap>),
    Sum(Box<EntireMap>, Box<EntireMap>),
    Product(Box<EntireMap>, Box<EntireMap>),
    /// `outer(inner(z))`
    Compose(Box<EntireMap>, Box<EntireMap>),
    Sin(Box<EntireMap>),
    Cos(Box<EntireMap>),
    Exp(Box<EntireMap>),
    Pow(Box<EntireMap>, u32),
    /// `a·z + b`
    Affine { a: Complex64, b: Complex64 },
}

impl EntireMap {
    pub fn identity() -> Self {
        EntireMap::Var
    }

    pub fn sin() -> Self {
        EntireMap::Sin(Box::new(EntireMap::Var))
    }

    pub fn cos() -> Self {
        EntireMap::Cos(Box::new(EntireMap::Var))
    }

    pub fn exp() -> Self {
        EntireMap::Exp(Box::new(EntireMap::Var))
    }

    pub fn affine(a: Complex64, b: Complex64) -> Self {
        EntireMap::Affine { a, b }
    }

    /// `z·exp(−(z²/2 + 3z/2 − 1))`
    pub fn gaussian_family() -> Self {
        use EntireMap::*;
        let z = || Box::new(Var);
        let c = |re: f64| Box::new(Const(Complex64::new(re, 0.0)));
        let inner = Sum(
            Box::new(Sum(Box::new(Product(c(0.5), Box::new(Pow(z(), 2)))), Box::new(Product(c(1.5), z())))),
            c(-1.0),
        );
        Product(z(), Box::new(Exp(Box::new(Neg(Box::new(inner))))))
    }

    pub fn compose(outer: EntireMap, inner: EntireMap) -> Self {
        EntireMap::Compose(Box::new(outer), Box::new(inner))
    }

    /// Evaluates in double precision. Overflow propagates as non-finite values.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        use EntireMap::*;
        match self {
            Var => z,
            Const(c) => *c,
            Neg(a) => -a.eval(z),
            Sum(a, b) => a.eval(z) + b.eval(z),
            Product(a, b) => a.eval(z) * b.eval(z),
            Compose(outer, inner) => outer.eval(inner.eval(z)),
            Sin(a) => a.eval(z).sin(),
            Cos(a) => a.eval(z).cos(),
            Exp(a) => a.eval(z).exp(),
            Pow(a, k) => a.eval(z).powu(*k),
            Affine { a, b } => a * z + b,
        }
    }

    pub fn depth(&self) -> usize {
        use EntireMap::*;
        match self {
            Var | Const(_) | Affine { .. } => 1,
            Neg(a) | Sin(a) | Cos(a) | Exp(a) | Pow(a, _) => 1 + a.depth(),
            Sum(a, b) | Product(a, b) | Compose(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    fn render(&self, var: &str, out: &mut String) {
        use EntireMap::*;
        match self {
            Var => out.push_str(var),
            Const(c) => out.push_str(&format_const(*c)),
            Neg(a) => {
                out.push_str("-(");
                a.render(var, out);
                out.push(')');
            }
            Sum(a, b) | Product(a, b) => {
                let op = if matches!(self, Sum(..)) { "+" } else { "*" };
                out.push('(');
                a.render(var, out);
                out.push_str(op);
                b.render(var, out);
                out.push(')');
            }
            Compose(outer, inner) => {
                let mut arg = String::from("(");
                inner.render(var, &mut arg);
                arg.push(')');
                outer.render(&arg, out);
            }
            Sin(a) | Cos(a) | Exp(a) => {
                out.push_str(match self {
                    Sin(_) => "sin(",
                    Cos(_) => "cos(",
                    _ => "exp(",
                });
                a.render(var, out);
                out.push(')');
            }
            Pow(a, k) => {
                out.push('(');
                a.render(var, out);
                out.push_str(&format!(")^{k}"));
            }
            Affine { a, b } => {
                out.push_str(&format!("({}*{}+{})", format_const(*a), var, format_const(*b)));
            }
        }
    }
}

fn format_const(c: Complex64) -> String {
    // `{:?}` gives the shortest representation that round-trips
    match (c.re, c.im) {
        (re, 0.0) => format!("({re:?})"),
        (0.0, im) => format!("({im:?}i)"),
        (re, im) => format!("({re:?}+{im:?}i)"),
    }
}

/// Renders in the formula syntax; the output parses back to an equal map.
impl fmt::Display for EntireMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render("z", &mut s);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-15;

    #[test]
    fn basic_values() {
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(EntireMap::sin().eval(zero), zero);
        assert_eq!(EntireMap::cos().eval(zero), Complex64::new(1.0, 0.0));
        assert_eq!(EntireMap::gaussian_family().eval(zero), zero);
    }

    #[test]
    fn gaussian_family_matches_closed_form() {
        let f = EntireMap::gaussian_family();
        for z in [Complex64::new(0.3, -0.7), Complex64::new(-1.2, 2.0)] {
            let expected = z * (-(z * z / 2.0 + 1.5 * z - 1.0)).exp();
            assert!((f.eval(z) - expected).norm() <= TOL * expected.norm().max(1.0));
        }
    }

    #[test]
    fn overflow_is_not_a_trap() {
        let v = EntireMap::exp().eval(Complex64::new(1000.0, 0.0));
        assert!(!v.is_finite());
    }

    #[test]
    fn affine_and_depth() {
        let m = EntireMap::affine(Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0));
        assert_eq!(m.eval(Complex64::new(1.0, 1.0)), Complex64::new(2.0, 3.0));
        assert_eq!(EntireMap::compose(EntireMap::sin(), EntireMap::cos()).depth(), 3);
    }
}
