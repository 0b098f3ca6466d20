//! Warping functions given as closed-form expressions in `r`.
//!
//! Grammar: numbers, the variable `r`, `+ - * / ^`, parentheses, unary
//! minus, and the calls `sinh(x)`, `cosh(x)`, `exp(x)`, `pow(x, y)`.
//! Expressions are parsed once into an AST; evaluation propagates a
//! second-order Taylor jet so first and second derivatives are exact.

use crate::error::{Error, Result};
use crate::manifold::Warp;

/// Value with first and second derivative at a point.
#[derive(Debug, Clone, Copy)]
struct Jet {
    v: f64,
    d1: f64,
    d2: f64,
}

impl Jet {
    fn constant(c: f64) -> Jet {
        Jet { v: c, d1: 0.0, d2: 0.0 }
    }

    fn variable(r: f64) -> Jet {
        Jet { v: r, d1: 1.0, d2: 0.0 }
    }

    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }

    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }

    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }

    fn div(self, o: Jet) -> Jet {
        let v = self.v / o.v;
        let d1 = (self.d1 - v * o.d1) / o.v;
        let d2 = (self.d2 - 2.0 * d1 * o.d1 - v * o.d2) / o.v;
        Jet { v, d1, d2 }
    }

    fn neg(self) -> Jet {
        Jet { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }

    /// Chain rule through a scalar function with known derivatives.
    fn compose(self, f: f64, fp: f64, fpp: f64) -> Jet {
        Jet {
            v: f,
            d1: fp * self.d1,
            d2: fpp * self.d1 * self.d1 + fp * self.d2,
        }
    }

    fn sinh(self) -> Jet {
        self.compose(self.v.sinh(), self.v.cosh(), self.v.sinh())
    }

    fn cosh(self) -> Jet {
        self.compose(self.v.cosh(), self.v.sinh(), self.v.cosh())
    }

    fn exp(self) -> Jet {
        let e = self.v.exp();
        self.compose(e, e, e)
    }

    fn powi(self, k: i32) -> Jet {
        let f = self.v.powi(k);
        let fp = k as f64 * self.v.powi(k - 1);
        let fpp = (k as f64) * (k as f64 - 1.0) * self.v.powi(k - 2);
        self.compose(f, fp, fpp)
    }

    /// General power via `exp(y ln x)`; requires a positive base unless the
    /// exponent is a constant integer (handled by `powi` upstream).
    fn pow(self, o: Jet) -> Jet {
        if o.d1 == 0.0 && o.d2 == 0.0 && o.v == o.v.trunc() && o.v.abs() < 1e9 {
            return self.powi(o.v as i32);
        }
        let ln = Jet {
            v: self.v.ln(),
            d1: self.d1 / self.v,
            d2: (self.d2 - self.d1 * self.d1 / self.v) / self.v,
        };
        o.mul(ln).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Var,
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => { toks.push(Token::Plus); i += 1; }
            '-' => { toks.push(Token::Minus); i += 1; }
            '*' => { toks.push(Token::Star); i += 1; }
            '/' => { toks.push(Token::Slash); i += 1; }
            '^' => { toks.push(Token::Caret); i += 1; }
            '(' => { toks.push(Token::LParen); i += 1; }
            ')' => { toks.push(Token::RParen); i += 1; }
            ',' => { toks.push(Token::Comma); i += 1; }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_digit() || d == '.' {
                        i += 1;
                    } else if (d == 'e' || d == 'E')
                        && i + 1 < bytes.len()
                        && ((bytes[i + 1] as char).is_ascii_digit()
                            || bytes[i + 1] == b'+'
                            || bytes[i + 1] == b'-')
                    {
                        i += 2;
                    } else {
                        break;
                    }
                }
                let text = &src[start..i];
                let x: f64 = text.parse().map_err(|_| {
                    Error::Domain(format!("bad numeric literal '{text}' in warp expression"))
                })?;
                toks.push(Token::Number(x));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let name = &src[start..i];
                if name == "r" {
                    toks.push(Token::Var);
                } else {
                    toks.push(Token::Ident(name.to_string()));
                }
            }
            _ => {
                return Err(Error::Domain(format!(
                    "unexpected character '{c}' in warp expression"
                )))
            }
        }
    }
    Ok(toks)
}

#[derive(Debug, Clone)]
enum Ast {
    Number(f64),
    Var,
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
    Call(Func, Vec<Ast>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sinh,
    Cosh,
    Exp,
    Pow,
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Token) -> Result<()> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            other => Err(Error::Domain(format!(
                "warp expression: expected {want:?}, found {other:?}"
            ))),
        }
    }

    // precedence: + - (1) < * / (2) < unary minus (3) < ^ (4, right-assoc)
    fn parse_expr(&mut self, min_bp: u8) -> Result<Ast> {
        let mut lhs = match self.next() {
            Some(Token::Number(x)) => Ast::Number(x),
            Some(Token::Var) => Ast::Var,
            Some(Token::Minus) => Ast::Neg(Box::new(self.parse_expr(3)?)),
            Some(Token::LParen) => {
                let inner = self.parse_expr(0)?;
                self.expect(Token::RParen)?;
                inner
            }
            Some(Token::Ident(name)) => {
                let func = match name.as_str() {
                    "sinh" => Func::Sinh,
                    "cosh" => Func::Cosh,
                    "exp" => Func::Exp,
                    "pow" => Func::Pow,
                    other => {
                        return Err(Error::Domain(format!(
                            "unknown function '{other}' in warp expression"
                        )))
                    }
                };
                self.expect(Token::LParen)?;
                let mut args = vec![self.parse_expr(0)?];
                while self.peek() == Some(&Token::Comma) {
                    self.next();
                    args.push(self.parse_expr(0)?);
                }
                self.expect(Token::RParen)?;
                let want = if func == Func::Pow { 2 } else { 1 };
                if args.len() != want {
                    return Err(Error::Domain(format!(
                        "warp expression: {name} takes {want} argument(s), got {}",
                        args.len()
                    )));
                }
                Ast::Call(func, args)
            }
            other => {
                return Err(Error::Domain(format!(
                    "warp expression: unexpected token {other:?}"
                )))
            }
        };

        loop {
            let (bp, right_assoc) = match self.peek() {
                Some(Token::Plus) | Some(Token::Minus) => (1u8, false),
                Some(Token::Star) | Some(Token::Slash) => (2, false),
                Some(Token::Caret) => (4, true),
                _ => break,
            };
            if bp < min_bp {
                break;
            }
            let op = self.next().unwrap();
            let next_bp = if right_assoc { bp } else { bp + 1 };
            let rhs = self.parse_expr(next_bp)?;
            lhs = match op {
                Token::Plus => Ast::Add(Box::new(lhs), Box::new(rhs)),
                Token::Minus => Ast::Sub(Box::new(lhs), Box::new(rhs)),
                Token::Star => Ast::Mul(Box::new(lhs), Box::new(rhs)),
                Token::Slash => Ast::Div(Box::new(lhs), Box::new(rhs)),
                Token::Caret => Ast::Pow(Box::new(lhs), Box::new(rhs)),
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }
}

fn eval(ast: &Ast, r: f64) -> Jet {
    match ast {
        Ast::Number(c) => Jet::constant(*c),
        Ast::Var => Jet::variable(r),
        Ast::Neg(a) => eval(a, r).neg(),
        Ast::Add(a, b) => eval(a, r).add(eval(b, r)),
        Ast::Sub(a, b) => eval(a, r).sub(eval(b, r)),
        Ast::Mul(a, b) => eval(a, r).mul(eval(b, r)),
        Ast::Div(a, b) => eval(a, r).div(eval(b, r)),
        Ast::Pow(a, b) => eval(a, r).pow(eval(b, r)),
        Ast::Call(f, args) => match f {
            Func::Sinh => eval(&args[0], r).sinh(),
            Func::Cosh => eval(&args[0], r).cosh(),
            Func::Exp => eval(&args[0], r).exp(),
            Func::Pow => eval(&args[0], r).pow(eval(&args[1], r)),
        },
    }
}

/// Warp given by a closed-form expression in `r`.
#[derive(Debug, Clone)]
pub struct ExpressionWarp {
    ast: Ast,
    source: String,
}

impl ExpressionWarp {
    pub fn parse(src: &str) -> Result<Self> {
        let toks = tokenize(src)?;
        if toks.is_empty() {
            return Err(Error::Domain("empty warp expression".into()));
        }
        let mut parser = Parser { toks: &toks, pos: 0 };
        let ast = parser.parse_expr(0)?;
        if parser.pos != toks.len() {
            return Err(Error::Domain(format!(
                "warp expression: trailing input after position {}",
                parser.pos
            )));
        }
        let warp = ExpressionWarp {
            ast,
            source: src.to_string(),
        };
        // reject expressions that are not even evaluable near the origin
        let probe = eval(&warp.ast, 0.5);
        if !probe.v.is_finite() || !probe.d1.is_finite() || !probe.d2.is_finite() {
            return Err(Error::Domain(format!(
                "warp expression '{src}' is not finite at r = 0.5"
            )));
        }
        Ok(warp)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl Warp for ExpressionWarp {
    fn value(&self, r: f64) -> f64 {
        eval(&self.ast, r).v
    }
    fn first_derivative(&self, r: f64) -> f64 {
        eval(&self.ast, r).d1
    }
    fn second_derivative(&self, r: f64) -> f64 {
        eval(&self.ast, r).d2
    }
    fn kind_name(&self) -> &str {
        "expression"
    }
}
