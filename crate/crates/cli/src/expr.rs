//! Arithmetic expressions over named variables.
//!
//! Grammar (`^` binds tightest and associates to the right; unary minus
//! binds looser than `^`, so `-x^2 = -(x^2)`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Functions: `cbrt`, `sqrt`, `exp`, `ln`, `abs`. Constants: `pi`, `e`.

use std::fmt;

use fixiter::Scalar;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("unexpected {found} at offset {offset} in {input:?}")]
    Unexpected { input: String, offset: usize, found: String },
    #[error("unknown name {name:?} in {input:?} (allowed variables: {allowed})")]
    UnknownName { input: String, name: String, allowed: String },
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("bad number {0:?}")]
    BadNumber(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Cbrt,
    Sqrt,
    Exp,
    Ln,
    Abs,
}

impl Func {
    fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "cbrt" => Func::Cbrt,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Cbrt => "cbrt",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Index into the variable list given to [`Expr::parse`].
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parses `source`; `vars` lists the admissible variable names in the
    /// order their values are later passed to [`Expr::eval`].
    pub fn parse(source: &str, vars: &[&str]) -> Result<Self, ExprError> {
        let mut p = Parser { src: source, pos: 0, vars };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < source.len() {
            return Err(p.unexpected());
        }
        Ok(e)
    }

    pub fn eval<S: Scalar>(&self, vars: &[S]) -> S {
        match self {
            Expr::Num(v) => S::lit(*v),
            Expr::Var(i) => vars[*i],
            Expr::Neg(e) => -e.eval(vars),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(vars), b.eval(vars));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(vars);
                match f {
                    Func::Cbrt => v.cbrt(),
                    Func::Sqrt => v.sqrt(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Abs => v.abs(),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "${i}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                    BinOp::Pow => '^',
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
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

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn unexpected(&self) -> ExprError {
        let found = match self.rest().chars().next() {
            Some(c) => format!("{c:?}"),
            None => "end of input".to_string(),
        };
        ExprError::Unexpected { input: self.src.to_string(), offset: self.pos, found }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.unexpected());
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.name(),
            _ => Err(self.unexpected()),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let rest = self.rest();
        let mut end = rest.find(|c: char| !(c.is_ascii_digit() || c == '.')).unwrap_or(rest.len());
        // Optional exponent: e.g. 1e-3, 2.5E+4.
        let tail = &rest[end..];
        if tail.starts_with(['e', 'E']) {
            let after = &tail[1..];
            let sign = usize::from(after.starts_with(['+', '-']));
            let digits = after[sign..].find(|c: char| !c.is_ascii_digit()).unwrap_or(after.len() - sign);
            if digits > 0 {
                end += 1 + sign + digits;
            }
        }
        let text = &rest[..end];
        let value = text.parse::<f64>().map_err(|_| ExprError::BadNumber(text.to_string()))?;
        self.pos += end;
        Ok(Expr::Num(value))
    }

    fn name(&mut self) -> Result<Expr, ExprError> {
        let rest = self.rest();
        let end = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(rest.len());
        let name = rest[..end].to_string();
        self.pos += end;
        if self.peek() == Some('(') {
            let func = Func::by_name(&name).ok_or_else(|| ExprError::UnknownFunction(name.clone()))?;
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(')') {
                return Err(self.unexpected());
            }
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if let Some(i) = self.vars.iter().position(|v| *v == name) {
            return Ok(Expr::Var(i));
        }
        match name.as_str() {
            "pi" => Ok(Expr::Num(std::f64::consts::PI)),
            "e" => Ok(Expr::Num(std::f64::consts::E)),
            _ => Err(ExprError::UnknownName {
                input: self.src.to_string(),
                name,
                allowed: self.vars.join(", "),
            }),
        }
    }
}
