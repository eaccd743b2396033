use std::sync::Arc;

use super::{check_same_dim, BoundOracle, IndicatorOracle, Oracle, Region};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{Cell, DyadicBox};
use crate::interval::{self, Interval};

#[derive(Debug, Clone)]
enum Op {
    Add { alpha: f64, beta: f64 },
    Mul,
    Abs,
    PosPart,
    NegPart,
    Max,
    Min,
    Restrict(IndicatorOracle),
}

/// An algebraic combination of oracles.
#[derive(Debug, Clone)]
pub struct Combined {
    op: Op,
    operands: Vec<Oracle>,
    support: DyadicBox,
}

impl BoundOracle for Combined {
    fn dim(&self) -> usize {
        self.support.dim()
    }

    fn support(&self) -> &DyadicBox {
        &self.support
    }

    fn bounds_cell(&self, cell: &Cell) -> Result<Interval> {
        if self.support.intersect_cell(cell).is_none() {
            return Ok(Interval::ZERO);
        }
        let a = self.operands[0].bounds_cell(cell)?;
        Ok(match &self.op {
            Op::Add { alpha, beta } => {
                let b = self.operands[1].bounds_cell(cell)?;
                a.scale(*alpha).add(&b.scale(*beta))
            }
            Op::Mul => a.mul(&self.operands[1].bounds_cell(cell)?),
            Op::Abs => a.abs(),
            Op::PosPart => a.max(&Interval::ZERO),
            Op::NegPart => a.neg().max(&Interval::ZERO),
            Op::Max => a.max(&self.operands[1].bounds_cell(cell)?),
            Op::Min => a.min(&self.operands[1].bounds_cell(cell)?),
            Op::Restrict(ind) => a.mul(&ind.bounds_cell(cell)?),
        })
    }

    fn is_indicator(&self) -> bool {
        match self.op {
            Op::Mul | Op::Max | Op::Min => self.operands.iter().all(|o| o.is_indicator()),
            Op::Abs | Op::PosPart | Op::Restrict(_) => self.operands[0].is_indicator(),
            _ => false,
        }
    }

    fn describe(&self) -> String {
        let a = self.operands[0].describe();
        match &self.op {
            Op::Add { alpha, beta } => {
                format!("add {alpha} {beta} ({a}) ({})", self.operands[1].describe())
            }
            Op::Mul => format!("mul ({a}) ({})", self.operands[1].describe()),
            Op::Max => format!("max ({a}) ({})", self.operands[1].describe()),
            Op::Min => format!("min ({a}) ({})", self.operands[1].describe()),
            Op::Abs => format!("abs ({a})"),
            Op::PosPart => format!("pos ({a})"),
            Op::NegPart => format!("neg ({a})"),
            Op::Restrict(ind) => format!("restrict ({a}) to {}", ind.region().to_json()),
        }
    }
}

fn unary(op: Op, o: Oracle) -> Oracle {
    let support = o.support().clone();
    Arc::new(Combined { op, operands: vec![o], support })
}

fn binary(op: Op, a: Oracle, b: Oracle, union: bool) -> Result<Oracle> {
    check_same_dim(a.as_ref(), b.as_ref())?;
    let support =
        if union { a.support().hull(b.support())? } else { a.support().intersection(b.support())? };
    Ok(Arc::new(Combined { op, operands: vec![a, b], support }))
}

/// `alpha f + beta g`.
pub fn add(f: Oracle, g: Oracle, alpha: f64, beta: f64) -> Result<Oracle> {
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::Invalid("coefficients must be finite".into()));
    }
    binary(Op::Add { alpha, beta }, f, g, true)
}

/// `c f`.
pub fn scale(f: Oracle, c: f64) -> Result<Oracle> {
    let zero = super::zero(f.dim());
    add(f, zero, c, 0.0)
}

pub fn mul(f: Oracle, g: Oracle) -> Result<Oracle> {
    binary(Op::Mul, f, g, false)
}

pub fn abs(f: Oracle) -> Oracle {
    unary(Op::Abs, f)
}

/// `max(f, 0)`.
pub fn pos_part(f: Oracle) -> Oracle {
    unary(Op::PosPart, f)
}

/// `max(-f, 0)`.
pub fn neg_part(f: Oracle) -> Oracle {
    unary(Op::NegPart, f)
}

pub fn max(f: Oracle, g: Oracle) -> Result<Oracle> {
    binary(Op::Max, f, g, true)
}

pub fn min(f: Oracle, g: Oracle) -> Result<Oracle> {
    binary(Op::Min, f, g, true)
}

/// `f chi_E`.
pub fn restrict(f: Oracle, region: Region) -> Result<Oracle> {
    if f.dim() != region.dim() {
        return Err(Error::Invalid(format!("region has dimension {}, oracle has {}", region.dim(), f.dim())));
    }
    let support = f.support().intersection(region.bbox())?;
    Ok(Arc::new(Combined { op: Op::Restrict(IndicatorOracle::new(region)), operands: vec![f], support }))
}

/// `phi(o)` for a Lipschitz `phi` with `phi(0) = 0`.
#[derive(Debug, Clone)]
pub struct Composed {
    phi: Expr,
    inner: Oracle,
    lipschitz: f64,
}

impl Composed {
    /// Lipschitz constant of `phi` on the range of the inner oracle.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

impl BoundOracle for Composed {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn support(&self) -> &DyadicBox {
        self.inner.support()
    }

    fn bounds_cell(&self, cell: &Cell) -> Result<Interval> {
        let r = self.inner.bounds_cell(cell)?;
        if r.is_zero() {
            return Ok(Interval::ZERO);
        }
        Ok(self.phi.eval_interval(&[r])?)
    }

    fn describe(&self) -> String {
        format!("compose {} ({})", self.phi, self.inner.describe())
    }
}

/// Compose `phi` (an expression in `x1`) with an oracle.
///
/// `phi(0)` must vanish so the composition keeps the operand's support, and
/// `phi` must be Lipschitz on the operand's range: checked with `derivative`
/// when given (its enclosure must be finite), otherwise by a structural bound.
pub fn lipschitz_compose(phi: Expr, inner: Oracle, derivative: Option<Expr>) -> Result<Oracle> {
    if phi.min_dim() > 1 {
        return Err(Error::Invalid(format!("`{phi}` must be a function of x1 only")));
    }
    let at_zero = phi
        .eval_interval(&[Interval::ZERO])
        .map_err(|e| Error::Precondition(format!("cannot evaluate `{phi}` at 0: {e}")))?;
    if phi.eval_point(&[0.0]).ok() != Some(0.0) || !at_zero.contains(0.0) {
        return Err(Error::Precondition(format!("`{phi}` does not vanish at 0")));
    }
    let range = inner.bounds_cell(inner.support().outer_cell())?.hull_zero();
    let lipschitz = match derivative {
        Some(d) => {
            if d.min_dim() > 1 {
                return Err(Error::Invalid(format!("`{d}` must be a function of x1 only")));
            }
            d.eval_interval(&[range])
                .map_err(|e| Error::Precondition(format!("derivative bound on {range}: {e}")))?
                .mag()
        }
        None => lipschitz_bound(&phi, range)
            .ok_or_else(|| Error::Precondition(format!("`{phi}` has no Lipschitz bound on {range}")))?,
    };
    if !lipschitz.is_finite() {
        return Err(Error::Precondition(format!("`{phi}` has no finite Lipschitz bound on {range}")));
    }
    Ok(Arc::new(Composed { phi, inner, lipschitz }))
}

/// Upper bound on the Lipschitz constant of a one-variable expression over
/// `range`, or `None` if the structural analysis finds no finite bound.
pub fn lipschitz_bound(e: &Expr, range: Interval) -> Option<f64> {
    lip(e, range).map(|(_, l)| l).filter(|l| l.is_finite())
}

fn up(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.next_up().next_up()
    }
}

fn lip(e: &Expr, t: Interval) -> Option<(Interval, f64)> {
    let x = [t];
    let value = e.eval_interval(&x).ok()?;
    let l = match e {
        Expr::Const(_) => 0.0,
        Expr::Var(_) => 1.0,
        Expr::Neg(a) | Expr::Abs(a) | Expr::Sin(a) | Expr::Cos(a) => lip(a, t)?.1,
        Expr::Add(a, b) | Expr::Sub(a, b) => up(lip(a, t)?.1 + lip(b, t)?.1),
        Expr::Min(a, b) | Expr::Max(a, b) => lip(a, t)?.1.max(lip(b, t)?.1),
        Expr::Mul(a, b) => {
            let (va, la) = lip(a, t)?;
            let (vb, lb) = lip(b, t)?;
            up(va.mag() * lb + vb.mag() * la)
        }
        Expr::Div(a, b) => {
            let (va, la) = lip(a, t)?;
            let (vb, lb) = lip(b, t)?;
            let m = vb.mig();
            if m == 0.0 {
                return None;
            }
            up((la * vb.mag() + lb * va.mag()) / (m * m))
        }
        Expr::Pow(a, n) => {
            let (va, la) = lip(a, t)?;
            if *n == 0 {
                0.0
            } else {
                up(*n as f64 * va.mag().powi(*n as i32 - 1) * la)
            }
        }
        Expr::Sqrt(a) => {
            let (va, la) = lip(a, t)?;
            let m = va.lo.max(0.0);
            if la == 0.0 {
                0.0
            } else if m == 0.0 {
                return None;
            } else {
                up(la / (2.0 * interval::sqrt_down(m)))
            }
        }
        Expr::Exp(a) => {
            let (va, la) = lip(a, t)?;
            up(va.hi.exp() * la)
        }
    };
    Some((value, l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::DyadicCube;
    use crate::oracle::{from_expr, indicator};

    fn cube(level: u32, corner: &[i64]) -> DyadicCube {
        DyadicCube::new(level, corner.to_vec()).unwrap()
    }

    fn ex(src: &str, support: &str) -> Oracle {
        let b = DyadicBox::parse(support).unwrap();
        from_expr(parse(src, b.dim()).unwrap(), b).unwrap()
    }

    #[test]
    fn difference_with_itself_contains_zero() {
        let f = ex("sin(x1) * x2", "[0,2)x[-1,1)");
        let d = add(f.clone(), f, 1.0, -1.0).unwrap();
        for c in [cube(0, &[0, 0]), cube(2, &[3, -2]), cube(1, &[5, 5])] {
            assert!(d.bounds(&c).unwrap().contains(0.0));
        }
    }

    #[test]
    fn positive_part_of_identity() {
        let f = ex("x1", "[-1,1)");
        assert_eq!(pos_part(f.clone()).bounds(&cube(0, &[-1])).unwrap(), Interval::ZERO);
        assert_eq!(neg_part(f.clone()).bounds(&cube(0, &[-1])).unwrap(), Interval::UNIT);
        assert_eq!(abs(f).bounds(&cube(0, &[-1])).unwrap(), Interval::UNIT);
    }

    #[test]
    fn restricted_constant_is_an_indicator() {
        let square = Region::from_box(DyadicBox::unit(2));
        let r = restrict(ex("1", "[-4,4)x[-4,4)"), square.clone()).unwrap();
        let ind = indicator(square);
        for level in 0..4 {
            for cx in -3..(1 << level) + 2 {
                for cy in -3..(1 << level) + 2 {
                    let c = cube(level, &[cx, cy]);
                    assert_eq!(r.bounds(&c).unwrap(), ind.bounds(&c).unwrap());
                }
            }
        }
    }

    #[test]
    fn supports() {
        let f = ex("1", "[0,1)");
        let g = ex("1", "[2,3)");
        assert_eq!(add(f.clone(), g.clone(), 1.0, 1.0).unwrap().support().to_string(), "[0,3)");
        assert!(mul(f.clone(), g.clone()).unwrap().support().is_empty());
        assert_eq!(max(f.clone(), g).unwrap().support().to_string(), "[0,3)");
        assert!(add(f, ex("1", "[0,1)x[0,1)"), 1.0, 1.0).is_err());
    }

    #[test]
    fn compose_examples() {
        let f = ex("x1", "[0,1)");
        let sq = lipschitz_compose(parse("x1^2", 1).unwrap(), f.clone(), None).unwrap();
        assert_eq!(sq.bounds(&cube(0, &[0])).unwrap(), Interval::UNIT);
        assert_eq!(sq.bounds(&cube(0, &[3])).unwrap(), Interval::ZERO);
        let g = ex("x1 - 2", "[0,1)");
        let a = lipschitz_compose(parse("abs(x1)", 1).unwrap(), g, None).unwrap();
        assert_eq!(a.bounds(&cube(0, &[0])).unwrap(), Interval::new(1.0, 2.0));
        let err = lipschitz_compose(parse("x1 + 1", 1).unwrap(), f.clone(), None).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        // sqrt has an unbounded derivative at 0.
        assert!(lipschitz_compose(parse("sqrt(abs(x1))", 1).unwrap(), f.clone(), None).is_err());
        let s =
            lipschitz_compose(parse("sin(x1)", 1).unwrap(), f.clone(), Some(parse("cos(x1)", 1).unwrap()))
                .unwrap();
        assert!(s.bounds(&cube(0, &[0])).unwrap().contains(1f64.sin()));
        assert!(lipschitz_compose(parse("x1", 1).unwrap(), f, Some(parse("1/x1", 1).unwrap())).is_err());
    }

    #[test]
    fn structural_lipschitz_bounds() {
        let r = Interval::new(-2.0, 2.0);
        let b = |s: &str| lipschitz_bound(&parse(s, 1).unwrap(), r);
        let l = b("3*x1 - 1").unwrap();
        assert!((3.0..3.0001).contains(&l));
        assert!(b("x1^2").unwrap() >= 4.0);
        assert!(b("abs(x1)").unwrap() >= 1.0);
        assert!(b("exp(x1)").unwrap() >= 2f64.exp());
        assert_eq!(b("1/x1"), None);
        assert!(b("1/(x1^2 + 1)").is_some());
    }
}
