//! Closed-form prescription expressions: a small infix grammar over the
//! radial coordinate `rho` and angular coordinates `theta`, `phi`, with the
//! analytic ρ-derivative obtained by symbolic differentiation of the parsed
//! tree.
//!
//! Supported functions: sinh, cosh, tanh, coth, sin, cos, tan, cot, exp,
//! log, pow(x, y). `^` is accepted as an infix power operator.

use crate::error::ParseError;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Rho,
    Theta,
    Phi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sinh,
    Cosh,
    Tanh,
    Coth,
    Sin,
    Cos,
    Tan,
    Cot,
    Exp,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Apply(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr(0)?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn eval<R: Real>(&self, rho: R, theta: R, phi: R) -> R {
        match self {
            Expr::Const(c) => lit(*c),
            Expr::Var(Var::Rho) => rho,
            Expr::Var(Var::Theta) => theta,
            Expr::Var(Var::Phi) => phi,
            Expr::Neg(a) => -a.eval(rho, theta, phi),
            Expr::Add(a, b) => a.eval(rho, theta, phi) + b.eval(rho, theta, phi),
            Expr::Sub(a, b) => a.eval(rho, theta, phi) - b.eval(rho, theta, phi),
            Expr::Mul(a, b) => a.eval(rho, theta, phi) * b.eval(rho, theta, phi),
            Expr::Div(a, b) => a.eval(rho, theta, phi) / b.eval(rho, theta, phi),
            Expr::Pow(a, b) => a.eval(rho, theta, phi).powf(b.eval(rho, theta, phi)),
            Expr::Apply(f, a) => {
                let x: R = a.eval(rho, theta, phi);
                match f {
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Coth => x.cosh() / x.sinh(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Cot => x.cos() / x.sin(),
                    Func::Exp => x.exp(),
                    Func::Log => x.ln(),
                }
            }
        }
    }

    /// Symbolic derivative with respect to `rho`.
    pub fn diff_rho(&self) -> Expr {
        use Expr::*;
        match self {
            Const(_) | Var(self::Var::Theta) | Var(self::Var::Phi) => Const(0.0),
            Var(self::Var::Rho) => Const(1.0),
            Neg(a) => Neg(Box::new(a.diff_rho())),
            Add(a, b) => Add(Box::new(a.diff_rho()), Box::new(b.diff_rho())),
            Sub(a, b) => Sub(Box::new(a.diff_rho()), Box::new(b.diff_rho())),
            Mul(a, b) => Add(
                Box::new(Mul(Box::new(a.diff_rho()), b.clone())),
                Box::new(Mul(a.clone(), Box::new(b.diff_rho()))),
            ),
            Div(a, b) => Div(
                Box::new(Sub(
                    Box::new(Mul(Box::new(a.diff_rho()), b.clone())),
                    Box::new(Mul(a.clone(), Box::new(b.diff_rho()))),
                )),
                Box::new(Mul(b.clone(), b.clone())),
            ),
            Pow(a, b) => match b.as_ref() {
                Const(c) => Mul(
                    Box::new(Mul(
                        Box::new(Const(*c)),
                        Box::new(Pow(a.clone(), Box::new(Const(c - 1.0)))),
                    )),
                    Box::new(a.diff_rho()),
                ),
                _ => {
                    // f^g = exp(g log f)
                    let inner = Add(
                        Box::new(Mul(
                            Box::new(b.diff_rho()),
                            Box::new(Apply(Func::Log, a.clone())),
                        )),
                        Box::new(Div(
                            Box::new(Mul(b.clone(), Box::new(a.diff_rho()))),
                            a.clone(),
                        )),
                    );
                    Mul(Box::new(self.clone()), Box::new(inner))
                }
            },
            Apply(f, a) => {
                let da = a.diff_rho();
                let outer = match f {
                    Func::Sinh => Apply(Func::Cosh, a.clone()),
                    Func::Cosh => Apply(Func::Sinh, a.clone()),
                    Func::Tanh => Sub(
                        Box::new(Const(1.0)),
                        Box::new(Pow(
                            Box::new(Apply(Func::Tanh, a.clone())),
                            Box::new(Const(2.0)),
                        )),
                    ),
                    Func::Coth => Sub(
                        Box::new(Const(1.0)),
                        Box::new(Pow(
                            Box::new(Apply(Func::Coth, a.clone())),
                            Box::new(Const(2.0)),
                        )),
                    ),
                    Func::Sin => Apply(Func::Cos, a.clone()),
                    Func::Cos => Neg(Box::new(Apply(Func::Sin, a.clone()))),
                    Func::Tan => Add(
                        Box::new(Const(1.0)),
                        Box::new(Pow(
                            Box::new(Apply(Func::Tan, a.clone())),
                            Box::new(Const(2.0)),
                        )),
                    ),
                    Func::Cot => Neg(Box::new(Add(
                        Box::new(Const(1.0)),
                        Box::new(Pow(
                            Box::new(Apply(Func::Cot, a.clone())),
                            Box::new(Const(2.0)),
                        )),
                    ))),
                    Func::Exp => Apply(Func::Exp, a.clone()),
                    Func::Log => return Div(Box::new(da), a.clone()),
                };
                Mul(Box::new(outer), Box::new(da))
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.to_string(),
        }
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

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.atom()?;
        loop {
            let op = match self.peek() {
                Some(c @ (b'+' | b'-' | b'*' | b'/' | b'^')) => c,
                _ => break,
            };
            let (lbp, rbp) = match op {
                b'+' | b'-' => (1, 2),
                b'*' | b'/' => (3, 4),
                _ => (6, 5), // ^ right-associative
            };
            if lbp < min_bp {
                break;
            }
            self.pos += 1;
            let rhs = self.expr(rbp)?;
            lhs = match op {
                b'+' => Expr::Add(Box::new(lhs), Box::new(rhs)),
                b'-' => Expr::Sub(Box::new(lhs), Box::new(rhs)),
                b'*' => Expr::Mul(Box::new(lhs), Box::new(rhs)),
                b'/' => Expr::Div(Box::new(lhs), Box::new(rhs)),
                _ => Expr::Pow(Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.atom()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr(0)?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.err("expected expression")),
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
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
            .map(Expr::Const)
            .map_err(|_| self.err(&format!("bad number literal '{text}'")))
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match name {
            "rho" => return Ok(Expr::Var(Var::Rho)),
            "theta" => return Ok(Expr::Var(Var::Theta)),
            "phi" => return Ok(Expr::Var(Var::Phi)),
            "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
            _ => {}
        }
        if name == "pow" {
            self.expect(b'(')?;
            let base = self.expr(0)?;
            self.expect(b',')?;
            let exp = self.expr(0)?;
            self.expect(b')')?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        let func = match name {
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "coth" => Func::Coth,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "cot" => Func::Cot,
            "exp" => Func::Exp,
            "log" => Func::Log,
            _ => return Err(self.err(&format!("unknown identifier '{name}'"))),
        };
        self.expect(b'(')?;
        let arg = self.expr(0)?;
        self.expect(b')')?;
        Ok(Expr::Apply(func, Box::new(arg)))
    }
}
