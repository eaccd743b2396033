use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{Cell, CellAxis, DyadicBox, DyadicRational, GeometryError, MAX_LEVEL};

/// A cube of `D_k(R^m)`: `prod_j [n_j 2^-k, (n_j + 1) 2^-k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    level: u32,
    corner: Vec<i64>,
}

impl DyadicCube {
    pub fn new(level: u32, corner: Vec<i64>) -> Result<Self, GeometryError> {
        if corner.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        if level > MAX_LEVEL {
            return Err(GeometryError::LevelCap { level, cap: MAX_LEVEL });
        }
        Ok(DyadicCube { level, corner })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn corner(&self) -> &[i64] {
        &self.corner
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    /// `2^-k`, exact.
    pub fn side(&self) -> DyadicRational {
        DyadicRational::pow2_neg(self.level)
    }

    /// `2^-km`, exact.
    pub fn volume(&self) -> DyadicRational {
        DyadicRational::pow2_neg(self.level * self.dim() as u32)
    }

    /// `2^-km` as a double; exact while `k*m <= 1022`.
    pub fn volume_f64(&self) -> f64 {
        pow2_neg_f64(self.level * self.dim() as u32)
    }

    /// Lower corner coordinate on axis `j`, exact.
    pub fn lower(&self, j: usize) -> DyadicRational {
        DyadicRational::new(self.corner[j], self.level)
    }

    pub fn upper(&self, j: usize) -> DyadicRational {
        DyadicRational::new(BigInt::from(self.corner[j]) + 1, self.level)
    }

    /// The 2^m cubes of level k+1 partitioning this one, first axis varying
    /// fastest.
    pub fn children(&self) -> Result<Vec<DyadicCube>, GeometryError> {
        let level = self.level + 1;
        if level > MAX_LEVEL {
            return Err(GeometryError::LevelCap { level, cap: MAX_LEVEL });
        }
        let m = self.dim();
        let base = self
            .corner
            .iter()
            .map(|&n| n.checked_mul(2).ok_or(GeometryError::CornerOverflow { level }))
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = Vec::with_capacity(1 << m);
        for bits in 0..(1usize << m) {
            let corner = base.iter().enumerate().map(|(j, &n)| n + ((bits >> j) & 1) as i64).collect();
            out.push(DyadicCube { level, corner });
        }
        Ok(out)
    }

    /// The ancestor at a coarser level.
    pub fn ancestor(&self, level: u32) -> Option<DyadicCube> {
        (level <= self.level).then(|| DyadicCube {
            level,
            corner: self.corner.iter().map(|&n| n >> (self.level - level)).collect(),
        })
    }

    /// Shift by integer multiples of the side length.
    pub fn translate(&self, offset: &[i64]) -> Result<DyadicCube, GeometryError> {
        let corner = self
            .corner
            .iter()
            .zip(offset)
            .map(|(&n, &o)| n.checked_add(o).ok_or(GeometryError::CornerOverflow { level: self.level }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DyadicCube { level: self.level, corner })
    }

    /// Whether `other` is this cube or one of its descendants.
    pub fn contains_cube(&self, other: &DyadicCube) -> bool {
        other.ancestor(self.level).as_ref() == Some(self)
    }

    pub fn contains_point(&self, p: &[DyadicRational]) -> bool {
        p.len() == self.dim()
            && p.iter().enumerate().all(|(j, x)| x.floor_scaled(self.level) == BigInt::from(self.corner[j]))
    }

    /// The semiclosed cube as an evaluation cell.
    pub fn cell(&self) -> Cell {
        cell_of(self.level, &self.corner, false)
    }

    /// The closed cube as an evaluation cell.
    pub fn closed_cell(&self) -> Cell {
        cell_of(self.level, &self.corner, true)
    }
}

/// Evaluation cell of the cube `(level, corner)`, semiclosed or closed.
pub(crate) fn cell_of(level: u32, corner: &[i64], closed: bool) -> Cell {
    let h = pow2_neg_f64(level);
    Cell::new(
        corner
            .iter()
            .map(|&n| {
                // Exact whenever |n| < 2^53; otherwise round outward.
                let (lo, hi) = if n.unsigned_abs() < (1 << 53) {
                    (n as f64 * h, (n as f64 + 1.0) * h)
                } else {
                    ((n as f64 * h).next_down(), ((n as f64 + 1.0) * h).next_up())
                };
                if closed {
                    CellAxis::closed(lo, hi)
                } else {
                    CellAxis::semiclosed(lo, hi)
                }
            })
            .collect(),
    )
}

pub(crate) fn pow2_neg_f64(e: u32) -> f64 {
    if e <= 1022 {
        f64::from_bits(((1023 - e as u64) & 0x7ff) << 52)
    } else if e <= 1074 {
        f64::from_bits(1u64 << (1074 - e))
    } else {
        0.0
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cube(level {}, corner {:?})", self.level, self.corner)
    }
}

/// The cube of level `k` containing `p` under the semiclosed convention.
pub fn cube_containing(point: &[DyadicRational], level: u32) -> Result<DyadicCube, GeometryError> {
    let corner = point
        .iter()
        .map(|x| x.floor_scaled(level).to_i64().ok_or(GeometryError::CornerOverflow { level }))
        .collect::<Result<Vec<_>, _>>()?;
    DyadicCube::new(level, corner)
}

/// Cubes of `D_k(R^m)` meeting a box, first axis varying fastest.
#[derive(Clone, Debug)]
pub struct CubeIter {
    level: u32,
    ranges: Vec<(i64, i64)>,
    next: Option<Vec<i64>>,
}

impl CubeIter {
    fn new(level: u32, ranges: Vec<(i64, i64)>) -> Self {
        let next = if ranges.iter().all(|&(a, b)| a <= b) {
            Some(ranges.iter().map(|&(a, _)| a).collect())
        } else {
            None
        };
        CubeIter { level, ranges, next }
    }

    /// Per-axis inclusive corner ranges.
    pub fn ranges(&self) -> &[(i64, i64)] {
        &self.ranges
    }

    /// Number of cubes still to be produced by a fresh iterator.
    pub fn count_total(&self) -> u128 {
        if self.ranges.iter().any(|&(a, b)| a > b) {
            return 0;
        }
        self.ranges.iter().map(|&(a, b)| (b as i128 - a as i128 + 1) as u128).product()
    }
}

impl Iterator for CubeIter {
    type Item = DyadicCube;

    fn next(&mut self) -> Option<DyadicCube> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut advanced = false;
        for (j, &(a, b)) in self.ranges.iter().enumerate() {
            if succ[j] < b {
                succ[j] += 1;
                advanced = true;
                break;
            }
            succ[j] = a;
        }
        if advanced {
            self.next = Some(succ);
        }
        Some(DyadicCube { level: self.level, corner: current })
    }
}

/// Cubes of level `k` whose semiclosed form meets `region`.
///
/// With `margin > 0` each axis range is widened by that many cubes; the closed
/// cube sums use `margin = 1` to pick up cubes whose closure only touches the
/// box.
pub fn cubes_intersecting(region: &DyadicBox, level: u32) -> Result<CubeIter, GeometryError> {
    cubes_intersecting_with_margin(region, level, 0)
}

pub(crate) fn cubes_intersecting_with_margin(
    region: &DyadicBox,
    level: u32,
    margin: i64,
) -> Result<CubeIter, GeometryError> {
    if level > MAX_LEVEL {
        return Err(GeometryError::LevelCap { level, cap: MAX_LEVEL });
    }
    let overflow = || GeometryError::CornerOverflow { level };
    let mut ranges = Vec::with_capacity(region.dim());
    for axis in region.axes() {
        if axis.is_empty() {
            return Ok(CubeIter::new(level, vec![(1, 0); region.dim()]));
        }
        // Need (n+1) 2^-k > a and n 2^-k <= b (closed) or < b (open).
        let first = axis.lo.floor_scaled(level);
        let last = if axis.closure.hi_closed() {
            axis.hi.floor_scaled(level)
        } else {
            axis.hi.ceil_scaled(level) - 1
        };
        let first = first.to_i64().ok_or_else(overflow)?;
        let last = last.to_i64().ok_or_else(overflow)?;
        let first = first.checked_sub(margin).ok_or_else(overflow)?;
        let last = last.checked_add(margin).ok_or_else(overflow)?;
        ranges.push((first, last));
    }
    Ok(CubeIter::new(level, ranges))
}
