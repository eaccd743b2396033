//! Bound oracles: functions of compact support, known only through certified
//! range enclosures over cells.
//!
//! Every oracle has a mandatory support box outside which it vanishes, and
//! must return exactly `[0, 0]` for cells that miss the support. Bounds must
//! be sound (contain the true range over the cell) and pure.

mod combinators;
mod pipeline;
mod region;

use std::fmt;
use std::sync::Arc;

pub use combinators::{
    abs, add, lipschitz_bound, lipschitz_compose, max, min, mul, neg_part, pos_part, restrict, scale,
    Combined, Composed,
};
pub use pipeline::{parse_pipeline, RegionLoader};
pub use region::{Classification, Constraint, IndicatorOracle, Region};

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::geometry::{Cell, DyadicBox, DyadicCube};
use crate::interval::Interval;

pub trait BoundOracle: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Box outside which the function is identically zero.
    fn support(&self) -> &DyadicBox;

    /// Enclosure of the range over `cell`.
    fn bounds_cell(&self, cell: &Cell) -> Result<Interval>;

    /// Enclosure over a semiclosed dyadic cube.
    fn bounds(&self, cube: &DyadicCube) -> Result<Interval> {
        self.bounds_cell(&cube.cell()).map_err(|e| e.at(cube))
    }

    /// Enclosure over the closure of a dyadic cube.
    fn closed_bounds(&self, cube: &DyadicCube) -> Result<Interval> {
        self.bounds_cell(&cube.closed_cell()).map_err(|e| e.at(cube))
    }

    /// Whether every value is 0 or 1.
    fn is_indicator(&self) -> bool {
        false
    }

    fn describe(&self) -> String;
}

pub type Oracle = Arc<dyn BoundOracle>;

/// `e` on its support, zero elsewhere.
#[derive(Debug, Clone)]
pub struct ExprOracle {
    expr: Expr,
    support: DyadicBox,
}

impl ExprOracle {
    pub fn new(expr: Expr, support: DyadicBox) -> Result<Self> {
        if expr.min_dim() > support.dim() {
            return Err(expr::ExprError::Dimension {
                var: format!("x{}", expr.min_dim()),
                dim: support.dim(),
            }
            .into());
        }
        Ok(ExprOracle { expr, support })
    }

    pub fn parse(source: &str, support: DyadicBox) -> Result<Self> {
        let expr = expr::parse(source, support.dim())?;
        Ok(ExprOracle { expr, support })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl BoundOracle for ExprOracle {
    fn dim(&self) -> usize {
        self.support.dim()
    }

    fn support(&self) -> &DyadicBox {
        &self.support
    }

    fn bounds_cell(&self, cell: &Cell) -> Result<Interval> {
        let Some(part) = self.support.intersect_cell(cell) else {
            return Ok(Interval::ZERO);
        };
        let range = self.expr.eval_interval(&part.closure())?;
        Ok(if self.support.contains_cell(cell) { range } else { range.hull_zero() })
    }

    fn describe(&self) -> String {
        format!("expr {} on {}", self.expr, self.support)
    }
}

/// The zero function.
#[derive(Debug, Clone)]
pub struct ZeroOracle {
    support: DyadicBox,
}

impl ZeroOracle {
    pub fn new(dim: usize) -> Self {
        ZeroOracle { support: DyadicBox::empty(dim) }
    }
}

impl BoundOracle for ZeroOracle {
    fn dim(&self) -> usize {
        self.support.dim()
    }

    fn support(&self) -> &DyadicBox {
        &self.support
    }

    fn bounds_cell(&self, _cell: &Cell) -> Result<Interval> {
        Ok(Interval::ZERO)
    }

    fn describe(&self) -> String {
        "zero".to_string()
    }
}

pub fn from_expr(expr: Expr, support: DyadicBox) -> Result<Oracle> {
    Ok(Arc::new(ExprOracle::new(expr, support)?))
}

pub fn indicator(region: Region) -> Oracle {
    Arc::new(IndicatorOracle::new(region))
}

pub fn zero(dim: usize) -> Oracle {
    Arc::new(ZeroOracle::new(dim))
}

pub(crate) fn check_same_dim(a: &dyn BoundOracle, b: &dyn BoundOracle) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Invalid(format!("operands have dimensions {} and {}", a.dim(), b.dim())));
    }
    Ok(())
}
