//! Closed-form profile grammar.
//!
//! Metric files may give warping profiles, defining functions, and flow fields
//! as expressions rather than sample tables. The grammar is deliberately
//! small: `+ - * / ^`, numeric literals, named variables, and the functions
//! `sinh cosh tanh coth exp log sin cos sqrt abs`. Expressions are parsed
//! once into an AST and evaluated pointwise; exact symbolic derivatives are
//! available so that expression-backed profiles never go through a finite
//! difference.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sinh,
    Cosh,
    Tanh,
    Coth,
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "coth" => Func::Coth,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Coth => "coth",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Coth => x.cosh() / x.sinh(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
        }
    }
}

impl Expr {
    /// Parse an expression in the single variable `t`.
    pub fn parse(src: &str) -> Result<Expr> {
        Parser::new(src).parse()
    }

    /// Evaluate with `t` bound to `t`. Variables other than `t` are an error
    /// at parse time for profile expressions, so this cannot miss a binding.
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_env(&[("t", t)])
    }

    /// Evaluate with an explicit variable environment.
    pub fn eval_env(&self, env: &[(&str, f64)]) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var(v) => env
                .iter()
                .find(|(name, _)| name == v)
                .map(|(_, x)| *x)
                .unwrap_or(f64::NAN),
            Expr::Neg(a) => -a.eval_env(env),
            Expr::Add(a, b) => a.eval_env(env) + b.eval_env(env),
            Expr::Sub(a, b) => a.eval_env(env) - b.eval_env(env),
            Expr::Mul(a, b) => a.eval_env(env) * b.eval_env(env),
            Expr::Div(a, b) => a.eval_env(env) / b.eval_env(env),
            Expr::Pow(a, b) => a.eval_env(env).powf(b.eval_env(env)),
            Expr::Call(f, a) => f.apply(a.eval_env(env)),
        }
    }

    /// Symbolic derivative with respect to `var`. `abs` differentiates to the
    /// sign, which is the correct a.e. derivative for the `|x|^{1+alpha}`
    /// fields exercised by the flow-regularity check.
    pub fn diff(&self, var: &str) -> Expr {
        use Expr::*;
        match self {
            Num(_) => Num(0.0),
            Var(v) => {
                if v == var {
                    Num(1.0)
                } else {
                    Num(0.0)
                }
            }
            Neg(a) => Neg(Box::new(a.diff(var))),
            Add(a, b) => Add(Box::new(a.diff(var)), Box::new(b.diff(var))),
            Sub(a, b) => Sub(Box::new(a.diff(var)), Box::new(b.diff(var))),
            Mul(a, b) => Add(
                Box::new(Mul(Box::new(a.diff(var)), b.clone())),
                Box::new(Mul(a.clone(), Box::new(b.diff(var)))),
            ),
            Div(a, b) => Div(
                Box::new(Sub(
                    Box::new(Mul(Box::new(a.diff(var)), b.clone())),
                    Box::new(Mul(a.clone(), Box::new(b.diff(var)))),
                )),
                Box::new(Mul(b.clone(), b.clone())),
            ),
            Pow(a, b) => {
                // General case via a^b = exp(b log a); the common constant
                // exponent gets the cleaner b * a^(b-1) * a'.
                if let Num(p) = **b {
                    Mul(
                        Box::new(Mul(
                            Box::new(Num(p)),
                            Box::new(Pow(a.clone(), Box::new(Num(p - 1.0)))),
                        )),
                        Box::new(a.diff(var)),
                    )
                } else {
                    let this = Pow(a.clone(), b.clone());
                    let inner = Add(
                        Box::new(Mul(
                            Box::new(b.diff(var)),
                            Box::new(Call(Func::Log, a.clone())),
                        )),
                        Box::new(Div(
                            Box::new(Mul(b.clone(), Box::new(a.diff(var)))),
                            a.clone(),
                        )),
                    );
                    Mul(Box::new(this), Box::new(inner))
                }
            }
            Call(f, a) => {
                let da = a.diff(var);
                let outer = match f {
                    Func::Sinh => Call(Func::Cosh, a.clone()),
                    Func::Cosh => Call(Func::Sinh, a.clone()),
                    Func::Tanh => {
                        // 1 - tanh^2
                        let th = Call(Func::Tanh, a.clone());
                        Sub(
                            Box::new(Num(1.0)),
                            Box::new(Mul(Box::new(th.clone()), Box::new(th))),
                        )
                    }
                    Func::Coth => {
                        // 1 - coth^2
                        let ch = Call(Func::Coth, a.clone());
                        Sub(
                            Box::new(Num(1.0)),
                            Box::new(Mul(Box::new(ch.clone()), Box::new(ch))),
                        )
                    }
                    Func::Exp => Call(Func::Exp, a.clone()),
                    Func::Log => Div(Box::new(Num(1.0)), a.clone()),
                    Func::Sin => Call(Func::Cos, a.clone()),
                    Func::Cos => Neg(Box::new(Call(Func::Sin, a.clone()))),
                    Func::Sqrt => Div(
                        Box::new(Num(0.5)),
                        Box::new(Call(Func::Sqrt, a.clone())),
                    ),
                    Func::Abs => {
                        // sign(a) = a / |a|
                        Div(a.clone(), Box::new(Call(Func::Abs, a.clone())))
                    }
                };
                Mul(Box::new(outer), Box::new(da))
            }
        }
    }

    /// Names of free variables, in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                if !out.iter().any(|w| w == v) {
                    out.push(v.clone());
                }
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Expr::parse(&s).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn parse(mut self) -> Result<Expr> {
        let e = self.expr()?;
        self.skip_ws();
        if self.pos != self.src.len() {
            return Err(Error::invalid(format!(
                "trailing characters at offset {} in expression",
                self.pos
            )));
        }
        Ok(e)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            // Right associative; exponent may itself carry a unary minus.
            let exp = self.unary()?;
            Ok(Expr::Pow(Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(Error::invalid("unbalanced parenthesis in expression"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            other => Err(Error::invalid(format!(
                "unexpected token {:?} at offset {} in expression",
                other.map(|b| b as char),
                self.pos
            ))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && self.pos > start
                && self
                    .src
                    .get(self.pos + 1)
                    .is_some_and(|&d| d.is_ascii_digit() || d == b'+' || d == b'-')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::invalid(format!("bad numeric literal `{text}`")))
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        if self.peek() == Some(b'(') {
            let func = Func::from_name(name)
                .ok_or_else(|| Error::invalid(format!("unknown function `{name}`")))?;
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(Error::invalid(format!("unclosed call to `{name}`")));
            }
            self.pos += 1;
            Ok(Expr::Call(func, Box::new(arg)))
        } else {
            Ok(Expr::Var(name.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_and_evaluates() {
        let e = Expr::parse("sinh(t) + 0.01*sin(t)").unwrap();
        let t = 1.3;
        assert_relative_eq!(e.eval(t), t.sinh() + 0.01 * t.sin(), epsilon = 1e-15);
    }

    #[test]
    fn precedence_and_power() {
        let e = Expr::parse("2 + 3*t^2").unwrap();
        assert_relative_eq!(e.eval(2.0), 14.0);
        let e = Expr::parse("t^-1").unwrap();
        assert_relative_eq!(e.eval(4.0), 0.25);
        // Unary minus binds looser than power.
        let e = Expr::parse("-t^2").unwrap();
        assert_relative_eq!(e.eval(3.0), -9.0);
    }

    #[test]
    fn symbolic_derivative_matches_finite_difference() {
        let cases = [
            "sinh(t)",
            "2*exp(-t) + exp(-2*t)",
            "t^3/(1+t)",
            "abs(t - 0.5)^1.5",
            "coth(t)",
            "sqrt(1 + t^2)",
        ];
        for src in cases {
            let e = Expr::parse(src).unwrap();
            let de = e.diff("t");
            for &t in &[0.7, 1.1, 2.3] {
                let h = 1e-6;
                let fd = (e.eval(t + h) - e.eval(t - h)) / (2.0 * h);
                assert_relative_eq!(de.eval(t), fd, epsilon = 1e-7, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn roundtrips_through_display() {
        let e = Expr::parse("sinh(t)^2 - 1/(t + 2)").unwrap();
        let e2 = Expr::parse(&e.to_string()).unwrap();
        assert_relative_eq!(e.eval(1.7), e2.eval(1.7));
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("sinh(t").is_err());
        assert!(Expr::parse("1 + * 2").is_err());
        assert!(Expr::parse("frob(t)").is_err());
    }
}
