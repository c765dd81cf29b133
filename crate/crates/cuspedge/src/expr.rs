//! Expression DSL for the coordinate functions of a surface.
//!
//! Grammar (whitespace-insensitive, `^` right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-'? atom
//! atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables are `u` and `v`; named constants are `pi` and `e`. There is no
//! implicit multiplication: `2u` is a syntax error.

use crate::jet::{JetError, Scalar};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Exp,
    Log,
    Abs,
    Atan,
    Pow,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "atan" => Func::Atan,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Atan => "atan",
            Func::Pow => "pow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Num(f64),
    Var(Var),
    Neg(Box<ExprAst>),
    Bin(BinOp, Box<ExprAst>, Box<ExprAst>),
    Call(Func, Vec<ExprAst>),
}

/// Parsed expression tree; every node records its byte span in the source.
#[derive(Debug, Clone)]
pub struct ExprAst {
    pub kind: ExprKind,
    pub span: (usize, usize),
}

#[derive(Debug, Error)]
pub enum ExprError {
    #[error("syntax error at byte {pos}: expected {expected}")]
    Syntax { pos: usize, expected: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdent { name: String, pos: usize },
    #[error("`{name}` expects {expected} argument(s), got {got} (byte {pos})")]
    WrongArity { name: String, expected: usize, got: usize, pos: usize },
    #[error("domain error at bytes {span:?}: {source}")]
    Domain { span: (usize, usize), source: JetError },
}

// --- lexer -----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
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

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next_tok(&mut self) -> Result<Option<(Tok, usize)>, ExprError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_digit() || self.src[end] == b'.')
                {
                    end += 1;
                }
                if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                    let mut e = end + 1;
                    if e < self.src.len() && (self.src[e] == b'+' || self.src[e] == b'-') {
                        e += 1;
                    }
                    if e < self.src.len() && self.src[e].is_ascii_digit() {
                        while e < self.src.len() && self.src[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..end]).unwrap();
                let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    pos: start,
                    expected: "a number".into(),
                })?;
                self.pos = end;
                return Ok(Some((Tok::Num(value), start)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let name = std::str::from_utf8(&self.src[start..end]).unwrap().to_string();
                self.pos = end;
                return Ok(Some((Tok::Ident(name), start)));
            }
            _ => {
                return Err(ExprError::Syntax {
                    pos: start,
                    expected: "an operator, number, identifier or parenthesis".into(),
                })
            }
        };
        self.pos += 1;
        Ok(Some((tok, start)))
    }
}

// --- parser ----------------------------------------------------------------

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    end: usize,
}

pub fn parse_expression(text: &str) -> Result<ExprAst, ExprError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next_tok()? {
        toks.push(t);
    }
    let mut p = Parser { toks, i: 0, end: text.len() };
    let e = p.expr()?;
    if let Some((_, pos)) = p.peek_with_pos() {
        return Err(ExprError::Syntax { pos, expected: "end of input".into() });
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn peek_with_pos(&self) -> Option<(&Tok, usize)> {
        self.toks.get(self.i).map(|(t, p)| (t, *p))
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.i).cloned();
        self.i += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<usize, ExprError> {
        match self.bump() {
            Some((t, p)) if t == tok => Ok(p),
            _ => {
                self.i = self.i.saturating_sub(1);
                Err(ExprError::Syntax { pos: self.pos(), expected: what.into() })
            }
        }
    }

    fn expr(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            let span = (lhs.span.0, rhs.span.1);
            lhs = ExprAst { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            let span = (lhs.span.0, rhs.span.1);
            lhs = ExprAst { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<ExprAst, ExprError> {
        let base = self.unary()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let exp = self.factor()?; // right-associative
            let span = (base.span.0, exp.span.1);
            return Ok(ExprAst {
                kind: ExprKind::Bin(BinOp::Pow, Box::new(base), Box::new(exp)),
                span,
            });
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<ExprAst, ExprError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            let (_, start) = self.bump().unwrap();
            let inner = self.atom()?;
            let span = (start, inner.span.1);
            return Ok(ExprAst { kind: ExprKind::Neg(Box::new(inner)), span });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ExprAst, ExprError> {
        match self.bump() {
            Some((Tok::Num(x), p)) => Ok(ExprAst { kind: ExprKind::Num(x), span: (p, self.pos()) }),
            Some((Tok::Ident(name), p)) => {
                if matches!(self.peek(), Some(Tok::LParen)) {
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while matches!(self.peek(), Some(Tok::Comma)) {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    let close = self.expect(Tok::RParen, "`)`")?;
                    let func = Func::from_name(&name)
                        .ok_or_else(|| ExprError::UnknownIdent { name: name.clone(), pos: p })?;
                    if args.len() != func.arity() {
                        return Err(ExprError::WrongArity {
                            name: name.clone(),
                            expected: func.arity(),
                            got: args.len(),
                            pos: p,
                        });
                    }
                    Ok(ExprAst { kind: ExprKind::Call(func, args), span: (p, close + 1) })
                } else {
                    let kind = match name.as_str() {
                        "u" => ExprKind::Var(Var::U),
                        "v" => ExprKind::Var(Var::V),
                        "pi" => ExprKind::Num(std::f64::consts::PI),
                        "e" => ExprKind::Num(std::f64::consts::E),
                        _ => return Err(ExprError::UnknownIdent { name, pos: p }),
                    };
                    Ok(ExprAst { kind, span: (p, self.pos()) })
                }
            }
            Some((Tok::LParen, p)) => {
                let inner = self.expr()?;
                let close = self.expect(Tok::RParen, "`)`")?;
                Ok(ExprAst { kind: inner.kind, span: (p, close + 1) })
            }
            other => {
                if other.is_some() {
                    self.i -= 1;
                }
                Err(ExprError::Syntax {
                    pos: self.pos(),
                    expected: "a number, identifier or `(`".into(),
                })
            }
        }
    }
}

// --- evaluation -------------------------------------------------------------

impl ExprAst {
    /// Evaluate over any `Scalar` (f64 for point values, `Jet2` for exact
    /// partial derivatives). Constants are lifted to the shape of `u`.
    pub fn eval<T: Scalar>(&self, u: &T, v: &T) -> Result<T, ExprError> {
        let span = self.span;
        let dom = |e: JetError| ExprError::Domain { span, source: e };
        match &self.kind {
            ExprKind::Num(x) => Ok(u.lift(*x)),
            ExprKind::Var(Var::U) => Ok(u.clone()),
            ExprKind::Var(Var::V) => Ok(v.clone()),
            ExprKind::Neg(inner) => Ok(inner.eval(u, v)?.neg()),
            ExprKind::Bin(op, a, b) => {
                let x = a.eval(u, v)?;
                let y = b.eval(u, v)?;
                match op {
                    BinOp::Add => Ok(x.add(&y)),
                    BinOp::Sub => Ok(x.sub(&y)),
                    BinOp::Mul => Ok(x.mul(&y)),
                    BinOp::Div => x.div(&y).map_err(dom),
                    BinOp::Pow => eval_pow(&x, &y).map_err(dom),
                }
            }
            ExprKind::Call(func, args) => {
                let x = args[0].eval(u, v)?;
                match func {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Tan => x.tan().map_err(dom),
                    Func::Sqrt => x.sqrt().map_err(dom),
                    Func::Exp => Ok(x.exp()),
                    Func::Log => x.ln().map_err(dom),
                    Func::Abs => x.abs().map_err(dom),
                    Func::Atan => Ok(x.atan()),
                    Func::Pow => {
                        let y = args[1].eval(u, v)?;
                        eval_pow(&x, &y).map_err(dom)
                    }
                }
            }
        }
    }

    /// Evaluate at a point.
    pub fn eval_scalar(&self, u: f64, v: f64) -> Result<f64, ExprError> {
        self.eval(&u, &v)
    }

    /// Substitute expressions for `u` and `v`, producing a new tree.
    pub fn substitute(&self, for_u: &ExprAst, for_v: &ExprAst) -> ExprAst {
        let kind = match &self.kind {
            ExprKind::Num(x) => ExprKind::Num(*x),
            ExprKind::Var(Var::U) => for_u.kind.clone(),
            ExprKind::Var(Var::V) => for_v.kind.clone(),
            ExprKind::Neg(inner) => ExprKind::Neg(Box::new(inner.substitute(for_u, for_v))),
            ExprKind::Bin(op, a, b) => ExprKind::Bin(
                *op,
                Box::new(a.substitute(for_u, for_v)),
                Box::new(b.substitute(for_u, for_v)),
            ),
            ExprKind::Call(f, args) => {
                ExprKind::Call(*f, args.iter().map(|a| a.substitute(for_u, for_v)).collect())
            }
        };
        ExprAst { kind, span: self.span }
    }
}

/// `a ^ b`: integer exponents use repeated multiplication (jet-safe for any
/// base), anything else goes through `exp(b log a)` and requires `a > 0`.
fn eval_pow<T: Scalar>(a: &T, b: &T) -> Result<T, JetError> {
    if let Some(c) = b.as_constant() {
        if c.fract() == 0.0 && c.abs() < 2f64.powi(31) {
            return a.powi(c as i64);
        }
        return a.powf(c);
    }
    if a.value() <= 0.0 {
        return Err(JetError::Domain { func: "pow", value: a.value() });
    }
    Ok(b.mul(&a.ln()?).exp())
}

impl fmt::Display for ExprAst {
    /// Fully parenthesized rendering; parsing the output reproduces an
    /// equivalent tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(x) => {
                if *x < 0.0 {
                    write!(f, "({x:?})")
                } else {
                    write!(f, "{x:?}")
                }
            }
            ExprKind::Var(Var::U) => write!(f, "u"),
            ExprKind::Var(Var::V) => write!(f, "v"),
            ExprKind::Neg(inner) => write!(f, "(-{inner})"),
            ExprKind::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a}{sym}{b})")
            }
            ExprKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
