use std::fmt;

use crate::interval::Interval;

/// A numeric literal: its nearest double and a rigorous enclosure of the
/// value it denotes (`0.1` is not a double, so its enclosure has width).
#[derive(Clone, Debug)]
pub struct Constant {
    pub value: f64,
    pub enclosure: Interval,
    pub text: String,
}

impl Constant {
    /// An exactly representable constant.
    pub fn exact(value: f64) -> Self {
        Constant { value, enclosure: Interval::point(value), text: format_f64(value) }
    }
}

impl PartialEq for Constant {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.enclosure == other.enclosure
    }
}

fn format_f64(x: f64) -> String {
    if x < 0.0 {
        format!("({x})")
    } else {
        format!("{x}")
    }
}

/// Expression tree. Variables are zero-based (`Var(0)` prints as `x1`).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Constant),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Sqrt(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(Constant::exact(value))
    }

    pub fn var(index: usize) -> Expr {
        Expr::Var(index)
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(j) => Some(*j),
            Expr::Neg(a)
            | Expr::Abs(a)
            | Expr::Pow(a, _)
            | Expr::Sqrt(a)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a) => a.max_var(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// Minimum dimension able to evaluate this expression.
    pub fn min_dim(&self) -> usize {
        self.max_var().map_or(0, |j| j + 1)
    }

    pub fn depends_on(&self, var: usize) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::Var(j) if *j == var) {
                found = true;
            }
        });
        found
    }

    /// Rename variables: `Var(j)` becomes `Var(map[j])`.
    pub fn remap_vars(&self, map: &[usize]) -> Expr {
        self.map_tree(&|e| match e {
            Expr::Var(j) => Some(Expr::Var(map[*j])),
            _ => None,
        })
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Neg(a)
            | Expr::Abs(a)
            | Expr::Pow(a, _)
            | Expr::Sqrt(a)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a) => a.visit(f),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    fn map_tree(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(e) = f(self) {
            return e;
        }
        let m = |a: &Expr| Box::new(a.map_tree(f));
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(m(a)),
            Expr::Abs(a) => Expr::Abs(m(a)),
            Expr::Pow(a, n) => Expr::Pow(m(a), *n),
            Expr::Sqrt(a) => Expr::Sqrt(m(a)),
            Expr::Sin(a) => Expr::Sin(m(a)),
            Expr::Cos(a) => Expr::Cos(m(a)),
            Expr::Exp(a) => Expr::Exp(m(a)),
            Expr::Add(a, b) => Expr::Add(m(a), m(b)),
            Expr::Sub(a, b) => Expr::Sub(m(a), m(b)),
            Expr::Mul(a, b) => Expr::Mul(m(a), m(b)),
            Expr::Div(a, b) => Expr::Div(m(a), m(b)),
            Expr::Min(a, b) => Expr::Min(m(a), m(b)),
            Expr::Max(a, b) => Expr::Max(m(a), m(b)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(c) if c.text.contains('/') => 2,
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Parenthesize a child whose precedence is below `min`.
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Const(c) => f.write_str(&c.text),
            Expr::Var(j) => write!(f, "x{}", j + 1),
            Expr::Neg(a) => {
                f.write_str("-")?;
                child(f, a, 3)
            }
            Expr::Add(a, b) => {
                child(f, a, 1)?;
                f.write_str(" + ")?;
                child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                child(f, a, 1)?;
                f.write_str(" - ")?;
                child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                child(f, a, 2)?;
                f.write_str("*")?;
                child(f, b, 3)
            }
            Expr::Div(a, b) => {
                child(f, a, 2)?;
                f.write_str("/")?;
                child(f, b, 3)
            }
            Expr::Pow(a, n) => {
                child(f, a, 5)?;
                write!(f, "^{n}")
            }
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Min(a, b) => write!(f, "min({a}, {b})"),
            Expr::Max(a, b) => write!(f, "max({a}, {b})"),
        }
    }
}
