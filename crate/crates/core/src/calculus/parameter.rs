use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{Cell, CellAxis, DyadicBox};
use crate::integrator::{uniform_levels, CellKind};
use crate::interval::{add_up, Interval};
use crate::oracle::{BoundOracle, Oracle};

/// What is integrated along the last axis.
#[derive(Clone, Debug)]
pub enum Slice {
    /// `f(x, y)` for `u(x) <= y <= v(x)`.
    Graph { f: Expr, u: Expr, v: Expr },
    /// The last axis of an oracle in all `m` variables.
    Oracle(Oracle),
}

/// Settings for the inner one-dimensional integrations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerOptions {
    pub epsilon: f64,
    pub k_max: u32,
    /// Stop once two successive levels each shrink the gap by less than
    /// this fraction.
    pub stagnation: f64,
}

impl Default for InnerOptions {
    fn default() -> Self {
        InnerOptions { epsilon: 1e-6, k_max: 16, stagnation: 0.25 }
    }
}

/// `phi(x) = integral of the slice over the last variable`, as an oracle in
/// the first `m - 1` variables.
///
/// Bounds over an outer cell enclose `phi` on the whole cell: the inner
/// integrand is evaluated with the outer variables ranging over the cell.
#[derive(Debug, Clone)]
pub struct ParameterIntegral {
    slice: Slice,
    outer: DyadicBox,
    inner: InnerOptions,
}

impl ParameterIntegral {
    /// `phi(x) = int_{u(x)}^{v(x)} f(x, y) dy` for `x` in `outer`.
    pub fn graph(f: Expr, u: Expr, v: Expr, outer: DyadicBox, inner: InnerOptions) -> Result<Self> {
        let m = outer.dim() + 1;
        if f.min_dim() > m || u.min_dim() > m - 1 || v.min_dim() > m - 1 {
            return Err(Error::Invalid(format!(
                "f must use at most x1..x{m}, u and v at most x1..x{}",
                m - 1
            )));
        }
        check_order(&u, &v, &outer)?;
        Ok(ParameterIntegral { slice: Slice::Graph { f, u, v }, outer, inner })
    }

    /// `phi(x) = int o(x, y) dy`.
    pub fn of_oracle(o: Oracle, inner: InnerOptions) -> Result<Self> {
        let m = o.dim();
        if m < 2 {
            return Err(Error::Invalid("a parameter integral needs at least two variables".into()));
        }
        let outer = o.support().select(&(0..m - 1).collect::<Vec<_>>())?;
        Ok(ParameterIntegral { slice: Slice::Oracle(o), outer, inner })
    }

    pub fn slice(&self) -> &Slice {
        &self.slice
    }

    fn integrate_slice(&self, s: &SliceOracle) -> Result<Interval> {
        let mut best = Interval::new(f64::NEG_INFINITY, f64::INFINITY);
        let mut last_gap = f64::INFINITY;
        let mut stalls = 0;
        let opts = self.inner;
        uniform_levels(s, CellKind::Semiclosed, opts.k_max, usize::MAX, |row| {
            let e = row.enclosure();
            best = e;
            let gap = e.width();
            if row.level >= 2 && gap > (1.0 - opts.stagnation) * last_gap {
                stalls += 1;
            } else {
                stalls = 0;
            }
            last_gap = gap;
            gap <= opts.epsilon || stalls >= 2
        })?;
        Ok(best)
    }
}

/// Interval bisection check of `u <= v` over `outer`; cells the intervals
/// cannot settle are checked at their corners and centre.
fn check_order(u: &Expr, v: &Expr, outer: &DyadicBox) -> Result<()> {
    let diff = Expr::Sub(Box::new(u.clone()), Box::new(v.clone()));
    let mut pending = vec![outer.outer_cell().closure()];
    for depth in 0..=8 {
        let mut next = Vec::new();
        for cell in pending {
            let r = diff.eval_interval(&cell)?;
            if r.hi <= 0.0 {
                continue;
            }
            if depth == 8 {
                for p in sample_points(&cell) {
                    if diff.eval_point(&p)? > 0.0 {
                        return Err(Error::Precondition(format!("lower limit exceeds upper limit at {p:?}")));
                    }
                }
                continue;
            }
            next.extend(bisect(&cell));
        }
        pending = next;
    }
    Ok(())
}

fn bisect(cell: &[Interval]) -> Vec<Vec<Interval>> {
    let mut out = vec![Vec::new()];
    for iv in cell {
        let mid = iv.mid();
        let halves = [Interval::new(iv.lo, mid), Interval::new(mid, iv.hi)];
        out = out
            .into_iter()
            .flat_map(|prefix| {
                halves.iter().map(move |h| {
                    let mut p = prefix.clone();
                    p.push(*h);
                    p
                })
            })
            .collect();
    }
    out
}

fn sample_points(cell: &[Interval]) -> Vec<Vec<f64>> {
    let mut out = vec![cell.iter().map(Interval::mid).collect::<Vec<_>>()];
    let mut corners = vec![Vec::new()];
    for iv in cell {
        corners = corners
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                [iv.lo, iv.hi].into_iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out.extend(corners);
    out
}

impl BoundOracle for ParameterIntegral {
    fn dim(&self) -> usize {
        self.outer.dim()
    }

    fn support(&self) -> &DyadicBox {
        &self.outer
    }

    fn bounds_cell(&self, cell: &Cell) -> Result<Interval> {
        let Some(part) = self.outer.intersect_cell(cell) else {
            return Ok(Interval::ZERO);
        };
        let value = match &self.slice {
            Slice::Graph { f, u, v } => {
                let xs = part.closure();
                let lo = u.eval_interval(&xs)?;
                let hi = v.eval_interval(&xs)?;
                let at = |y: Interval| {
                    let mut p = xs.clone();
                    p.push(y);
                    f.eval_interval(&p)
                };
                if lo.hi <= hi.lo {
                    let core = if lo.hi < hi.lo {
                        let s = SliceOracle::expr(f.clone(), xs.clone(), lo.hi, hi.lo)?;
                        self.integrate_slice(&s)?
                    } else {
                        Interval::ZERO
                    };
                    let lower_edge = Interval::new(0.0, add_up(lo.hi, -lo.lo)).mul(&at(lo)?);
                    let upper_edge = Interval::new(0.0, add_up(hi.hi, -hi.lo)).mul(&at(hi)?);
                    core.add(&lower_edge).add(&upper_edge)
                } else {
                    // Mean value form: (v - u) times an average of f between them.
                    hi.sub(&lo).mul(&at(lo.hull(&hi))?)
                }
            }
            Slice::Oracle(o) => {
                let s = SliceOracle::of_oracle(o.clone(), part.clone())?;
                self.integrate_slice(&s)?
            }
        };
        Ok(if self.outer.contains_cell(cell) { value } else { value.hull_zero() })
    }

    fn describe(&self) -> String {
        match &self.slice {
            Slice::Graph { f, u, v } => {
                format!("integral of {f} over {u} <= x{} <= {v} on {}", self.outer.dim() + 1, self.outer)
            }
            Slice::Oracle(o) => format!("integral over the last axis of ({})", o.describe()),
        }
    }
}

/// The one-dimensional integrand `y -> f(X, y)` with the outer variables
/// held in a fixed cell `X`. Endpoints are dropped from the support: they
/// carry no mass.
#[derive(Debug)]
struct SliceOracle {
    kind: SliceKind,
    support: DyadicBox,
}

#[derive(Debug)]
enum SliceKind {
    Expr { f: Expr, outer: Vec<Interval> },
    Oracle { o: Oracle, outer: Cell },
}

impl SliceOracle {
    fn expr(f: Expr, outer: Vec<Interval>, lo: f64, hi: f64) -> Result<Self> {
        Ok(SliceOracle { kind: SliceKind::Expr { f, outer }, support: DyadicBox::semiclosed(&[(lo, hi)])? })
    }

    fn of_oracle(o: Oracle, outer: Cell) -> Result<Self> {
        let m = o.dim();
        let support = o.support().select(&[m - 1])?.half_open();
        Ok(SliceOracle { kind: SliceKind::Oracle { o, outer }, support })
    }
}

impl BoundOracle for SliceOracle {
    fn dim(&self) -> usize {
        1
    }

    fn support(&self) -> &DyadicBox {
        &self.support
    }

    fn bounds_cell(&self, cell: &Cell) -> Result<Interval> {
        match &self.kind {
            SliceKind::Expr { f, outer } => {
                let Some(part) = self.support.intersect_cell(cell) else {
                    return Ok(Interval::ZERO);
                };
                let mut p = outer.clone();
                p.push(part.axes[0].closure());
                let r = f.eval_interval(&p)?;
                Ok(if self.support.contains_cell(cell) { r } else { r.hull_zero() })
            }
            SliceKind::Oracle { o, outer } => {
                let y: CellAxis = cell.axes[0];
                o.bounds_cell(&outer.product(y))
            }
        }
    }

    fn describe(&self) -> String {
        "slice".to_string()
    }
}
