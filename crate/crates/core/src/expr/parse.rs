use super::{Constant, Expr, ExprError};
use crate::geometry::DyadicRational;
use crate::interval::Interval;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Var(usize),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str, dim: usize) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next_token(dim)?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn err(&self, pos: usize, message: impl Into<String>) -> ExprError {
        ExprError::Syntax { pos, message: message.into() }
    }

    fn take_digits(&mut self) {
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
    }

    fn next_token(&mut self, dim: usize) -> Result<(Tok, usize), ExprError> {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok((Tok::End, start));
        };
        match c {
            b'0'..=b'9' | b'.' => {
                self.take_digits();
                if self.peek() == Some(b'.') {
                    self.pos += 1;
                    self.take_digits();
                }
                if matches!(self.peek(), Some(b'e' | b'E')) {
                    let bytes = self.src.as_bytes();
                    let mut look = self.pos + 1;
                    if matches!(bytes.get(look), Some(b'+' | b'-')) {
                        look += 1;
                    }
                    if matches!(bytes.get(look), Some(b'0'..=b'9')) {
                        self.pos = look;
                        self.take_digits();
                    }
                }
                let text = &self.src[start..self.pos];
                if text == "." {
                    return Err(self.err(start, "malformed number"));
                }
                Ok((Tok::Num(text.to_string()), start))
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let word = &self.src[start..self.pos];
                if let Some(digits) = word.strip_prefix('x') {
                    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                        let index: usize =
                            digits.parse().map_err(|_| self.err(start, "variable index too large"))?;
                        if index == 0 {
                            return Err(self.err(start, "variables are numbered from x1"));
                        }
                        if index > dim {
                            return Err(ExprError::Dimension { var: word.to_string(), dim });
                        }
                        return Ok((Tok::Var(index - 1), start));
                    }
                }
                Ok((Tok::Ident(word.to_string()), start))
            }
            b'+' | b'-' | b'*' | b'/' | b'^' | b'(' | b')' | b',' => {
                self.pos += 1;
                Ok((Tok::Sym(c as char), start))
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                Err(self.err(start, format!("unexpected character `{ch}`")))
            }
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

/// Parse `source` as an expression in `dim` variables.
pub fn parse(source: &str, dim: usize) -> Result<Expr, ExprError> {
    let toks = Lexer::tokenize(source, dim)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.err(format!("unexpected {}", describe(t)))),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(s) => format!("number `{s}`"),
        Tok::Var(j) => format!("variable `x{}`", j + 1),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".to_string(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax { pos: self.pos(), message: message.into() }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`, found {}", describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Sym('/') => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = fold_rational(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let Tok::Num(text) = self.peek().clone() else {
                return Err(self.err("exponent must be a non-negative integer"));
            };
            let n: u32 = text.parse().map_err(|_| self.err("exponent must be a non-negative integer"))?;
            self.bump();
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.bump() {
            Tok::Num(text) => Ok(Expr::Const(literal(&text))),
            Tok::Var(j) => Ok(Expr::Var(j)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.expect('(')?;
                let a = self.expr()?;
                let arity = match name.as_str() {
                    "min" | "max" => 2,
                    "abs" | "sqrt" | "sin" | "cos" | "exp" => 1,
                    _ => {
                        self.at = self.at.saturating_sub(2);
                        return Err(self.err(format!("unknown function `{name}`")));
                    }
                };
                let b = if arity == 2 {
                    self.expect(',')?;
                    Some(self.expr()?)
                } else {
                    None
                };
                self.expect(')')?;
                let a = Box::new(a);
                Ok(match (name.as_str(), b) {
                    ("min", Some(b)) => Expr::Min(a, Box::new(b)),
                    ("max", Some(b)) => Expr::Max(a, Box::new(b)),
                    ("abs", _) => Expr::Abs(a),
                    ("sqrt", _) => Expr::Sqrt(a),
                    ("sin", _) => Expr::Sin(a),
                    ("cos", _) => Expr::Cos(a),
                    _ => Expr::Exp(a),
                })
            }
            t => {
                self.at = self.at.saturating_sub(1);
                Err(self.err(format!("expected a value, found {}", describe(&t))))
            }
        }
    }
}

/// Constant for a numeric literal, with an enclosure of the decimal value.
fn literal(text: &str) -> Constant {
    let value: f64 = text.parse().unwrap_or(f64::NAN);
    let exact = DyadicRational::parse(text).ok().and_then(|d| d.to_f64_exact()).is_some_and(|x| x == value);
    Constant {
        value,
        enclosure: if exact { Interval::point(value) } else { Interval::around(value) },
        text: text.to_string(),
    }
}

fn is_integer_literal(e: &Expr) -> Option<&Constant> {
    match e {
        Expr::Const(c) if c.text.bytes().all(|b| b.is_ascii_digit()) => Some(c),
        _ => None,
    }
}

/// `p/q` with integer literals becomes a single rational constant.
fn fold_rational(lhs: Expr, rhs: Expr) -> Expr {
    if let (Some(p), Some(q)) = (is_integer_literal(&lhs), is_integer_literal(&rhs)) {
        if q.value != 0.0 {
            if let Some(enclosure) = p.enclosure.div(&q.enclosure) {
                return Expr::Const(Constant {
                    value: p.value / q.value,
                    enclosure,
                    text: format!("{}/{}", p.text, q.text),
                });
            }
        }
    }
    Expr::Div(Box::new(lhs), Box::new(rhs))
}
