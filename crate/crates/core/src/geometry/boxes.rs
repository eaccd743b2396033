use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Cell, CellAxis, DyadicRational, GeometryError};

/// End closure of one box axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Closure {
    /// `[a, b)`
    Semiclosed,
    /// `[a, b]`
    Closed,
    /// `(a, b)`
    Open,
    /// `(a, b]`
    LeftOpen,
}

impl Closure {
    pub fn from_flags(lo_closed: bool, hi_closed: bool) -> Self {
        match (lo_closed, hi_closed) {
            (true, false) => Closure::Semiclosed,
            (true, true) => Closure::Closed,
            (false, false) => Closure::Open,
            (false, true) => Closure::LeftOpen,
        }
    }

    pub fn lo_closed(self) -> bool {
        matches!(self, Closure::Semiclosed | Closure::Closed)
    }

    pub fn hi_closed(self) -> bool {
        matches!(self, Closure::Closed | Closure::LeftOpen)
    }
}

/// One factor `I_j` of an m-rectangle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AxisRange {
    pub lo: DyadicRational,
    pub hi: DyadicRational,
    pub closure: Closure,
}

impl AxisRange {
    pub fn new(lo: DyadicRational, hi: DyadicRational, closure: Closure) -> Self {
        AxisRange { lo, hi, closure }
    }

    pub fn semiclosed(lo: DyadicRational, hi: DyadicRational) -> Self {
        AxisRange::new(lo, hi, Closure::Semiclosed)
    }

    pub fn length(&self) -> DyadicRational {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && self.closure != Closure::Closed)
    }

    pub fn contains(&self, x: &DyadicRational) -> bool {
        let above = if self.closure.lo_closed() { *x >= self.lo } else { *x > self.lo };
        let below = if self.closure.hi_closed() { *x <= self.hi } else { *x < self.hi };
        above && below
    }

    fn outer_axis(&self) -> CellAxis {
        CellAxis {
            lo: self.lo.to_f64_down(),
            hi: self.hi.to_f64_up(),
            lo_closed: self.closure.lo_closed(),
            hi_closed: self.closure.hi_closed(),
        }
    }

    fn inner_axis(&self) -> CellAxis {
        CellAxis {
            lo: self.lo.to_f64_up(),
            hi: self.hi.to_f64_down(),
            lo_closed: self.closure.lo_closed(),
            hi_closed: self.closure.hi_closed(),
        }
    }
}

impl fmt::Display for AxisRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.closure.lo_closed() { '[' } else { '(' };
        let close = if self.closure.hi_closed() { ']' } else { ')' };
        write!(f, "{open}{},{}{close}", self.lo, self.hi)
    }
}

/// An m-rectangle `prod_j I_j` with dyadic endpoints.
///
/// The double-precision views used to test cells against the box are cached:
/// the outer view is rounded outward (used for intersection tests), the inner
/// view inward (used for containment), so both tests stay conservative even
/// when an endpoint is not a double.
#[derive(Clone, Debug)]
pub struct DyadicBox {
    axes: Vec<AxisRange>,
    outer: Cell,
    inner: Cell,
}

impl PartialEq for DyadicBox {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes
    }
}

impl DyadicBox {
    pub fn new(axes: Vec<AxisRange>) -> Result<Self, GeometryError> {
        if axes.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        for (j, a) in axes.iter().enumerate() {
            if a.lo > a.hi {
                return Err(GeometryError::Inverted { axis: j, lo: a.lo.to_string(), hi: a.hi.to_string() });
            }
        }
        Ok(Self::from_axes(axes))
    }

    fn from_axes(axes: Vec<AxisRange>) -> Self {
        let outer = Cell::new(axes.iter().map(AxisRange::outer_axis).collect());
        let inner = Cell::new(axes.iter().map(AxisRange::inner_axis).collect());
        DyadicBox { axes, outer, inner }
    }

    /// Semiclosed box from double endpoints (converted exactly).
    pub fn semiclosed(bounds: &[(f64, f64)]) -> Result<Self, GeometryError> {
        Self::from_f64(bounds, Closure::Semiclosed)
    }

    pub fn closed(bounds: &[(f64, f64)]) -> Result<Self, GeometryError> {
        Self::from_f64(bounds, Closure::Closed)
    }

    pub fn from_f64(bounds: &[(f64, f64)], closure: Closure) -> Result<Self, GeometryError> {
        let axes = bounds
            .iter()
            .map(|&(lo, hi)| {
                Ok(AxisRange::new(DyadicRational::from_f64(lo)?, DyadicRational::from_f64(hi)?, closure))
            })
            .collect::<Result<Vec<_>, GeometryError>>()?;
        DyadicBox::new(axes)
    }

    /// `[0, 1)^m`.
    pub fn unit(dim: usize) -> Self {
        DyadicBox::semiclosed(&vec![(0.0, 1.0); dim]).expect("unit box")
    }

    /// An empty semiclosed box `[0, 0)^m`, the support of the zero function.
    pub fn empty(dim: usize) -> Self {
        DyadicBox::semiclosed(&vec![(0.0, 0.0); dim]).expect("empty box")
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[AxisRange] {
        &self.axes
    }

    pub fn axis(&self, j: usize) -> &AxisRange {
        &self.axes[j]
    }

    pub fn is_empty(&self) -> bool {
        self.axes.iter().any(AxisRange::is_empty)
    }

    /// `|E|_m`, exact; closure flags are ignored.
    pub fn volume(&self) -> DyadicRational {
        self.axes.iter().fold(DyadicRational::one(), |acc, a| &acc * &a.length())
    }

    pub fn contains_point(&self, p: &[DyadicRational]) -> bool {
        p.len() == self.dim() && self.axes.iter().zip(p).all(|(a, x)| a.contains(x))
    }

    /// Conservative in the sense of the inner view: may answer `false` for a
    /// point within half an ulp of a non-double endpoint.
    pub fn contains_point_f64(&self, p: &[f64]) -> bool {
        self.inner.contains_point(p)
    }

    /// Cell ∩ box, or `None` when certainly disjoint.
    pub fn intersect_cell(&self, cell: &Cell) -> Option<Cell> {
        self.outer.intersect(cell)
    }

    /// Whether the cell certainly lies inside the box.
    pub fn contains_cell(&self, cell: &Cell) -> bool {
        self.inner.contains_cell(cell)
    }

    /// The box as an evaluation cell (outward-rounded).
    pub fn outer_cell(&self) -> &Cell {
        &self.outer
    }

    /// Smallest box containing both. Empty operands are ignored.
    pub fn hull(&self, other: &DyadicBox) -> Result<DyadicBox, GeometryError> {
        self.check_dim(other)?;
        if other.is_empty() {
            return Ok(self.clone());
        }
        if self.is_empty() {
            return Ok(other.clone());
        }
        let axes = self
            .axes
            .iter()
            .zip(&other.axes)
            .map(|(a, b)| {
                let (lo, lo_closed) = pick_lo(a, b, true);
                let (hi, hi_closed) = pick_hi(a, b, true);
                AxisRange::new(lo, hi, Closure::from_flags(lo_closed, hi_closed))
            })
            .collect();
        Ok(Self::from_axes(axes))
    }

    /// Set intersection; may be empty.
    pub fn intersection(&self, other: &DyadicBox) -> Result<DyadicBox, GeometryError> {
        self.check_dim(other)?;
        let mut axes = Vec::with_capacity(self.dim());
        for (a, b) in self.axes.iter().zip(&other.axes) {
            let (lo, lo_closed) = pick_lo(a, b, false);
            let (hi, hi_closed) = pick_hi(a, b, false);
            if lo > hi {
                return Ok(DyadicBox::empty(self.dim()));
            }
            axes.push(AxisRange::new(lo, hi, Closure::from_flags(lo_closed, hi_closed)));
        }
        let b = Self::from_axes(axes);
        Ok(if b.is_empty() { DyadicBox::empty(self.dim()) } else { b })
    }

    /// Same endpoints, every axis closed.
    pub fn closure(&self) -> DyadicBox {
        Self::from_axes(
            self.axes.iter().map(|a| AxisRange::new(a.lo.clone(), a.hi.clone(), Closure::Closed)).collect(),
        )
    }

    /// `E^#`: same endpoints, every axis semiclosed.
    pub fn half_open(&self) -> DyadicBox {
        Self::from_axes(self.axes.iter().map(|a| AxisRange::semiclosed(a.lo.clone(), a.hi.clone())).collect())
    }

    /// The box spanned by the listed axes, in the given order.
    pub fn select(&self, axes: &[usize]) -> Result<DyadicBox, GeometryError> {
        DyadicBox::new(axes.iter().map(|&j| self.axes[j].clone()).collect())
    }

    fn check_dim(&self, other: &DyadicBox) -> Result<(), GeometryError> {
        if self.dim() != other.dim() {
            return Err(GeometryError::Dimension { expected: self.dim(), got: other.dim() });
        }
        Ok(())
    }

    /// Parse `[a1,b1)x[a2,b2)x...`; `[`/`(` and `]`/`)` select closure.
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let err = |pos: usize, message: &str| GeometryError::BoxSyntax { pos, message: message.to_string() };
        let bytes = text.as_bytes();
        let mut i = 0;
        let mut axes = Vec::new();
        let skip_ws = |i: &mut usize| {
            while *i < bytes.len() && bytes[*i].is_ascii_whitespace() {
                *i += 1;
            }
        };
        loop {
            skip_ws(&mut i);
            let lo_closed = match bytes.get(i) {
                Some(b'[') => true,
                Some(b'(') => false,
                _ => return Err(err(i, "expected `[` or `(`")),
            };
            i += 1;
            let comma = text[i..].find(',').map(|off| i + off).ok_or_else(|| err(i, "expected `,`"))?;
            let lo = DyadicRational::parse(&text[i..comma]).map_err(|e| err(i, &e.to_string()))?;
            i = comma + 1;
            let end =
                text[i..].find([']', ')']).map(|off| i + off).ok_or_else(|| err(i, "expected `]` or `)`"))?;
            let hi = DyadicRational::parse(&text[i..end]).map_err(|e| err(i, &e.to_string()))?;
            let hi_closed = bytes[end] == b']';
            i = end + 1;
            axes.push(AxisRange::new(lo, hi, Closure::from_flags(lo_closed, hi_closed)));
            skip_ws(&mut i);
            if i >= bytes.len() {
                break;
            }
            if bytes[i] == b'x' || bytes[i] == b'X' || bytes[i] == b'*' {
                i += 1;
            } else if text[i..].starts_with('×') {
                i += '×'.len_utf8();
            } else {
                return Err(err(i, "expected `x` between factors"));
            }
        }
        DyadicBox::new(axes)
    }
}

fn pick_lo(a: &AxisRange, b: &AxisRange, outermost: bool) -> (DyadicRational, bool) {
    let (ac, bc) = (a.closure.lo_closed(), b.closure.lo_closed());
    match a.lo.cmp(&b.lo) {
        std::cmp::Ordering::Equal => (a.lo.clone(), if outermost { ac || bc } else { ac && bc }),
        std::cmp::Ordering::Less => {
            if outermost {
                (a.lo.clone(), ac)
            } else {
                (b.lo.clone(), bc)
            }
        }
        std::cmp::Ordering::Greater => {
            if outermost {
                (b.lo.clone(), bc)
            } else {
                (a.lo.clone(), ac)
            }
        }
    }
}

fn pick_hi(a: &AxisRange, b: &AxisRange, outermost: bool) -> (DyadicRational, bool) {
    let (ac, bc) = (a.closure.hi_closed(), b.closure.hi_closed());
    match a.hi.cmp(&b.hi) {
        std::cmp::Ordering::Equal => (a.hi.clone(), if outermost { ac || bc } else { ac && bc }),
        std::cmp::Ordering::Greater => {
            if outermost {
                (a.hi.clone(), ac)
            } else {
                (b.hi.clone(), bc)
            }
        }
        std::cmp::Ordering::Less => {
            if outermost {
                (b.hi.clone(), bc)
            } else {
                (a.hi.clone(), ac)
            }
        }
    }
}

impl fmt::Display for DyadicBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, a) in self.axes.iter().enumerate() {
            if j > 0 {
                f.write_str("x")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for DyadicBox {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DyadicBox::parse(s)
    }
}

impl Serialize for DyadicBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DyadicBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        DyadicBox::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> DyadicBox {
        s.parse().unwrap()
    }

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    #[test]
    fn volumes() {
        assert_eq!(b("[0,1)x[0,1)x[0,1)").volume(), DyadicRational::one());
        assert_eq!(b("[0,0.5)x[0,0.25)").volume(), DyadicRational::pow2_neg(3));
        assert_eq!(b("[1,1]x[0,2)").volume(), DyadicRational::zero());
        // Closure flags do not change the volume.
        assert_eq!(b("(0,0.5]x[0,0.25]").volume(), DyadicRational::pow2_neg(3));
    }

    #[test]
    fn literal_round_trip() {
        let text = "[-1,0.375)x(0,3/2^4]x[2,2]";
        let parsed = b(text);
        assert_eq!(parsed.to_string(), "[-1,0.375)x(0,0.1875]x[2,2]");
        assert_eq!(b(&parsed.to_string()), parsed);
        assert_eq!(b(" [0, 1) × [0, 1] ").dim(), 2);
    }

    #[test]
    fn literal_errors() {
        assert!(matches!(DyadicBox::parse("[0,1"), Err(GeometryError::BoxSyntax { .. })));
        assert!(matches!(DyadicBox::parse("[0,0.1)"), Err(GeometryError::BoxSyntax { .. })));
        assert!(matches!(DyadicBox::parse("[2,1)"), Err(GeometryError::Inverted { .. })));
        assert!(DyadicBox::parse("[0,1)[0,1)").is_err());
    }

    #[test]
    fn hull_and_intersection() {
        let a = b("[0,1)x[0,1)");
        let c = b("[1,2)x[0,1)");
        assert_eq!(a.hull(&c).unwrap(), b("[0,2)x[0,1)"));
        assert!(a.intersection(&c).unwrap().is_empty());
        let e = b("(0.5,2]x[0,1]");
        assert_eq!(b("[0,1]x[0,1]").intersection(&e).unwrap(), b("(0.5,1]x[0,1]"));
        assert_eq!(a.hull(&DyadicBox::empty(2)).unwrap(), a);
    }

    #[test]
    fn point_membership() {
        let a = b("[0,1)x(0,1]");
        assert!(a.contains_point(&[d("0"), d("1")]));
        assert!(!a.contains_point(&[d("1"), d("0.5")]));
        assert!(!a.contains_point(&[d("0.5"), d("0")]));
        assert!(a.contains_point_f64(&[0.0, 1.0]));
    }
}
