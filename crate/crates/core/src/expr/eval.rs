use super::{Expr, ExprError};
use crate::interval::Interval;

fn domain(node: &Expr, reason: &str) -> ExprError {
    ExprError::Domain { node: node.to_string(), reason: reason.to_string() }
}

impl Expr {
    /// Evaluate at a point in double precision.
    pub fn eval_point(&self, x: &[f64]) -> Result<f64, ExprError> {
        let need = self.min_dim();
        if x.len() < need {
            return Err(ExprError::Arity { expected: need, got: x.len() });
        }
        self.point_unchecked(x)
    }

    fn point_unchecked(&self, x: &[f64]) -> Result<f64, ExprError> {
        let v = match self {
            Expr::Const(c) => c.value,
            Expr::Var(j) => x[*j],
            Expr::Neg(a) => -a.point_unchecked(x)?,
            Expr::Add(a, b) => a.point_unchecked(x)? + b.point_unchecked(x)?,
            Expr::Sub(a, b) => a.point_unchecked(x)? - b.point_unchecked(x)?,
            Expr::Mul(a, b) => a.point_unchecked(x)? * b.point_unchecked(x)?,
            Expr::Div(a, b) => {
                let num = a.point_unchecked(x)?;
                let den = b.point_unchecked(x)?;
                if den == 0.0 {
                    return Err(domain(self, "division by zero"));
                }
                num / den
            }
            Expr::Abs(a) => a.point_unchecked(x)?.abs(),
            Expr::Min(a, b) => a.point_unchecked(x)?.min(b.point_unchecked(x)?),
            Expr::Max(a, b) => a.point_unchecked(x)?.max(b.point_unchecked(x)?),
            Expr::Pow(a, n) => a.point_unchecked(x)?.powi(*n as i32),
            Expr::Sqrt(a) => {
                let v = a.point_unchecked(x)?;
                if v < 0.0 {
                    return Err(domain(self, "square root of a negative number"));
                }
                v.sqrt()
            }
            Expr::Sin(a) => a.point_unchecked(x)?.sin(),
            Expr::Cos(a) => a.point_unchecked(x)?.cos(),
            Expr::Exp(a) => a.point_unchecked(x)?.exp(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(domain(self, "result is not finite"))
        }
    }

    /// Enclose the range over the closed box `x`.
    pub fn eval_interval(&self, x: &[Interval]) -> Result<Interval, ExprError> {
        let need = self.min_dim();
        if x.len() < need {
            return Err(ExprError::Arity { expected: need, got: x.len() });
        }
        self.interval_unchecked(x)
    }

    fn interval_unchecked(&self, x: &[Interval]) -> Result<Interval, ExprError> {
        let v = match self {
            Expr::Const(c) => c.enclosure,
            Expr::Var(j) => x[*j],
            Expr::Neg(a) => a.interval_unchecked(x)?.neg(),
            Expr::Add(a, b) => a.interval_unchecked(x)?.add(&b.interval_unchecked(x)?),
            Expr::Sub(a, b) => a.interval_unchecked(x)?.sub(&b.interval_unchecked(x)?),
            Expr::Mul(a, b) => a.interval_unchecked(x)?.mul(&b.interval_unchecked(x)?),
            Expr::Div(a, b) => {
                let num = a.interval_unchecked(x)?;
                let den = b.interval_unchecked(x)?;
                num.div(&den).ok_or_else(|| domain(self, "divisor range contains zero"))?
            }
            Expr::Abs(a) => a.interval_unchecked(x)?.abs(),
            Expr::Min(a, b) => a.interval_unchecked(x)?.min(&b.interval_unchecked(x)?),
            Expr::Max(a, b) => a.interval_unchecked(x)?.max(&b.interval_unchecked(x)?),
            Expr::Pow(a, n) => a.interval_unchecked(x)?.powi(*n),
            Expr::Sqrt(a) => a
                .interval_unchecked(x)?
                .sqrt()
                .ok_or_else(|| domain(self, "square root of a negative range"))?,
            Expr::Sin(a) => a.interval_unchecked(x)?.sin(),
            Expr::Cos(a) => a.interval_unchecked(x)?.cos(),
            Expr::Exp(a) => a.interval_unchecked(x)?.exp(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(domain(self, "range is not finite"))
        }
    }
}
