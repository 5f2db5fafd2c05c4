//! Scalar expressions in `mu` for config-defined matrix entries.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' integer)?
//! base   := number | 'mu' | func '(' expr ')' | '(' expr ')' | '-' base
//! func   := exp | sin | cos | sqrt | log
//! ```
//!
//! A leading minus on an expression negates its first term, so `-mu*2.5`
//! reads as `Neg(Mul(mu, 2.5))` and `-mu^2` as `Neg(Pow(mu, 2))`. Error
//! offsets are 1-based byte positions.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Log,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "log" => Func::Log,
            _ => return None,
        })
    }

    fn label(self) -> &'static str {
        match self {
            Func::Exp => "Exp",
            Func::Sin => "Sin",
            Func::Cos => "Cos",
            Func::Sqrt => "Sqrt",
            Func::Log => "Log",
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sqrt => x.sqrt(),
            Func::Log => x.ln(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Mu,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Plain floating-point evaluation; invalid operations yield NaN or inf.
    pub fn eval(&self, mu: f64) -> f64 {
        match self {
            Expr::Num(x) => *x,
            Expr::Mu => mu,
            Expr::Neg(a) => -a.eval(mu),
            Expr::Add(a, b) => a.eval(mu) + b.eval(mu),
            Expr::Sub(a, b) => a.eval(mu) - b.eval(mu),
            Expr::Mul(a, b) => a.eval(mu) * b.eval(mu),
            Expr::Div(a, b) => a.eval(mu) / b.eval(mu),
            Expr::Pow(a, k) => a.eval(mu).powi(*k as i32),
            Expr::Call(f, a) => f.apply(a.eval(mu)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Mu => f.write_str("mu"),
            Expr::Neg(a) => write!(f, "Neg({a})"),
            Expr::Add(a, b) => write!(f, "Add({a}, {b})"),
            Expr::Sub(a, b) => write!(f, "Sub({a}, {b})"),
            Expr::Mul(a, b) => write!(f, "Mul({a}, {b})"),
            Expr::Div(a, b) => write!(f, "Div({a}, {b})"),
            Expr::Pow(a, k) => write!(f, "Pow({a}, {k})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.label()),
        }
    }
}

pub fn parse_expression(text: &str) -> Result<Expr> {
    let mut p = Parser { src: text, pos: 0 };
    p.skip_ws();
    if p.pos == text.len() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax { offset: self.pos + 1, message: message.to_string() }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    /// Consumes `c`; the typographic minus U+2212 counts as `-`.
    fn eat(&mut self, c: char) -> bool {
        match self.peek() {
            Some(d) if d == c || (c == '-' && d == '\u{2212}') => {
                self.pos += d.len_utf8();
                true
            }
            _ => false,
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let negate = self.eat('-');
        let mut lhs = self.term()?;
        if negate {
            lhs = Expr::Neg(Box::new(lhs));
        }
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if !self.eat('^') {
            return Ok(base);
        }
        self.skip_ws();
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.error("expected a nonnegative integer exponent"));
        }
        let text = &self.rest()[..digits];
        let k: u32 = text.parse().map_err(|_| self.error("exponent too large"))?;
        self.pos += digits;
        if matches!(self.rest().chars().next(), Some('.' | 'e' | 'E')) {
            return Err(self.error("exponent must be an integer literal"));
        }
        Ok(Expr::Pow(Box::new(base), k))
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some('-' | '\u{2212}') => {
                self.eat('-');
                Ok(Expr::Neg(Box::new(self.base()?)))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.identifier(),
            Some(c) => Err(self.error(&format!("unexpected character '{c}'"))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let bytes = self.rest().as_bytes();
        let mut len = bytes.iter().take_while(|b| b.is_ascii_digit() || **b == b'.').count();
        if matches!(bytes.get(len), Some(b'e' | b'E')) {
            let mut j = len + 1;
            if matches!(bytes.get(j), Some(b'+' | b'-')) {
                j += 1;
            }
            let exp_digits = bytes[j.min(bytes.len())..].iter().take_while(|b| b.is_ascii_digit()).count();
            if exp_digits > 0 {
                len = j + exp_digits;
            }
        }
        let text = &self.rest()[..len];
        let value: f64 = text.parse().map_err(|_| self.error(&format!("malformed number '{text}'")))?;
        self.pos += len;
        Ok(Expr::Num(value))
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        let len = self.rest().bytes().take_while(|b| b.is_ascii_alphanumeric() || *b == b'_').count();
        let name = &self.src[start..start + len];
        self.pos += len;
        if name == "mu" {
            return Ok(Expr::Mu);
        }
        let Some(func) = Func::from_name(name) else {
            return Err(Error::UnknownIdentifier { name: name.to_string(), offset: start + 1 });
        };
        if !self.eat('(') {
            return Err(self.error(&format!("expected '(' after {name}")));
        }
        let arg = self.expr()?;
        if !self.eat(')') {
            return Err(self.error("expected ')'"));
        }
        Ok(Expr::Call(func, Box::new(arg)))
    }
}
