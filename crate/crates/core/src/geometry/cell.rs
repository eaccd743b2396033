use crate::interval::Interval;

/// One axis of an evaluation cell: an interval with explicit end closure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellAxis {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl CellAxis {
    pub fn semiclosed(lo: f64, hi: f64) -> Self {
        CellAxis { lo, hi, lo_closed: true, hi_closed: false }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        CellAxis { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    /// Closure as an interval (the empty set maps to its endpoints' hull).
    pub fn closure(&self) -> Interval {
        Interval::new(self.lo, self.hi.max(self.lo))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn intersect(&self, other: &CellAxis) -> Option<CellAxis> {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        let axis = CellAxis { lo, hi, lo_closed, hi_closed };
        (!axis.is_empty()).then_some(axis)
    }

    /// Whether `inner` is a subset of `self` (the empty set is a subset of everything).
    pub fn contains_axis(&self, inner: &CellAxis) -> bool {
        if inner.is_empty() {
            return true;
        }
        let lo_ok = self.lo < inner.lo || (self.lo == inner.lo && (self.lo_closed || !inner.lo_closed));
        let hi_ok = inner.hi < self.hi || (inner.hi == self.hi && (self.hi_closed || !inner.hi_closed));
        lo_ok && hi_ok
    }
}

/// A product of [`CellAxis`] intervals handed to oracles.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub axes: Vec<CellAxis>,
}

impl Cell {
    pub fn new(axes: Vec<CellAxis>) -> Self {
        Cell { axes }
    }

    pub fn closed(intervals: &[Interval]) -> Self {
        Cell { axes: intervals.iter().map(|i| CellAxis::closed(i.lo, i.hi)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.iter().any(CellAxis::is_empty)
    }

    /// The closed box enclosing the cell, as evaluation intervals.
    pub fn closure(&self) -> Vec<Interval> {
        self.axes.iter().map(CellAxis::closure).collect()
    }

    /// Same region with every axis closed.
    pub fn to_closed(&self) -> Cell {
        Cell { axes: self.axes.iter().map(|a| CellAxis::closed(a.lo, a.hi)).collect() }
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.axes.len() == p.len() && self.axes.iter().zip(p).all(|(a, &x)| a.contains(x))
    }

    pub fn intersect(&self, other: &Cell) -> Option<Cell> {
        self.axes
            .iter()
            .zip(&other.axes)
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()
            .map(Cell::new)
    }

    pub fn contains_cell(&self, inner: &Cell) -> bool {
        inner.is_empty() || self.axes.iter().zip(&inner.axes).all(|(a, b)| a.contains_axis(b))
    }

    /// Concatenate axes (outer variables first).
    pub fn product(&self, last: CellAxis) -> Cell {
        let mut axes = self.axes.clone();
        axes.push(last);
        Cell { axes }
    }
}
