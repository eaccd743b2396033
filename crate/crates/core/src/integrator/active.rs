use rayon::prelude::*;
use serde::Serialize;

use super::sum::Accumulator;
use super::LevelSums;
use crate::error::{Error, Result};
use crate::geometry::{cell_of, cubes_intersecting_with_margin, pow2_neg_f64, DyadicCube};
use crate::interval::{mul_down, mul_up, sub_down, sub_up, Interval};
use crate::oracle::BoundOracle;

/// Which form of each cube the oracle is asked about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    /// `[n 2^-k, (n+1) 2^-k)`, the defining form.
    Semiclosed,
    /// The closure of each cube.
    Closed,
}

/// One piece of a dyadic step-function sandwich.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepCell {
    pub level: u32,
    pub corner: Vec<i64>,
    pub lo: f64,
    pub hi: f64,
}

pub(crate) enum Refined {
    Done,
    Nothing,
    OverBudget,
}

/// Number of child evaluations handed to the thread pool at once.
const CHUNK: usize = 1 << 15;

/// The cells of a mixed-level dyadic partition of the support, with bounds.
///
/// Cells whose bounds collapsed to a point are folded into running sums and
/// never refined again: intersecting with the parent's bounds pins every
/// descendant to the same value. The remaining cells are kept in flat arrays
/// in a fixed order, which fixes the summation order.
pub(crate) struct ActiveSet<'a> {
    oracle: &'a dyn BoundOracle,
    dim: usize,
    closed: bool,
    levels: Vec<u8>,
    corners: Vec<i64>,
    bounds: Vec<Interval>,
    frozen_lo: Accumulator,
    frozen_hi: Accumulator,
    frozen_cells: Option<Vec<StepCell>>,
    max_level: u32,
}

fn volume(level: u32, dim: usize) -> f64 {
    pow2_neg_f64(level * dim as u32)
}

fn cube_name(level: u32, corner: &[i64]) -> String {
    DyadicCube::new(level, corner.to_vec())
        .map(|c| c.to_string())
        .unwrap_or_else(|_| format!("cube(level {level}, corner {corner:?})"))
}

impl<'a> ActiveSet<'a> {
    pub fn new(
        oracle: &'a dyn BoundOracle,
        kind: CellKind,
        keep_cells: bool,
        max_cells: usize,
    ) -> Result<Self> {
        let dim = oracle.dim();
        let closed = kind == CellKind::Closed;
        let seeds = cubes_intersecting_with_margin(oracle.support(), 0, i64::from(closed))?;
        if seeds.count_total() > max_cells as u128 {
            return Err(Error::Invalid(format!(
                "support {} needs {} unit cubes, above the cell budget {max_cells}",
                oracle.support(),
                seeds.count_total()
            )));
        }
        let mut corners = Vec::new();
        for c in seeds {
            corners.extend_from_slice(c.corner());
        }
        let levels = vec![0u8; corners.len() / dim.max(1)];
        let mut set = ActiveSet {
            oracle,
            dim,
            closed,
            levels: Vec::new(),
            corners: Vec::new(),
            bounds: Vec::new(),
            frozen_lo: Accumulator::new(),
            frozen_hi: Accumulator::new(),
            frozen_cells: keep_cells.then(Vec::new),
            max_level: 0,
        };
        let evaluated = set.evaluate(&levels, &corners)?;
        for (i, b) in evaluated.into_iter().enumerate() {
            set.absorb(0, &corners[i * dim..(i + 1) * dim], b);
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    fn evaluate(&self, levels: &[u8], corners: &[i64]) -> Result<Vec<Interval>> {
        let dim = self.dim;
        let closed = self.closed;
        corners
            .par_chunks(dim)
            .zip(levels.par_iter())
            .map(|(corner, &level)| {
                let level = u32::from(level);
                self.oracle
                    .bounds_cell(&cell_of(level, corner, closed))
                    .map_err(|e| e.at(cube_name(level, corner)))
            })
            .collect()
    }

    fn absorb(&mut self, level: u32, corner: &[i64], b: Interval) {
        if b.is_point() {
            if b.lo != 0.0 {
                let v = volume(level, self.dim);
                self.frozen_lo.add(mul_down(b.lo, v));
                self.frozen_hi.add(mul_up(b.hi, v));
                if let Some(cells) = &mut self.frozen_cells {
                    cells.push(StepCell { level, corner: corner.to_vec(), lo: b.lo, hi: b.hi });
                }
            }
        } else {
            self.levels.push(level as u8);
            self.corners.extend_from_slice(corner);
            self.bounds.push(b);
        }
    }

    /// Current lower and upper sums.
    pub fn sums(&self) -> LevelSums {
        let mut lo = self.frozen_lo.clone();
        let mut hi = self.frozen_hi.clone();
        let mut osc_dn = Accumulator::new();
        let mut osc_up = Accumulator::new();
        for (b, &level) in self.bounds.iter().zip(&self.levels) {
            let v = volume(u32::from(level), self.dim);
            lo.add(mul_down(b.lo, v));
            hi.add(mul_up(b.hi, v));
            osc_dn.add(mul_down(sub_down(b.hi, b.lo), v));
            osc_up.add(mul_up(sub_up(b.hi, b.lo), v));
        }
        LevelSums {
            level: self.max_level,
            lower: lo.value(),
            upper: hi.value(),
            pad: lo.pad().max(hi.pad()),
            cubes: self.len(),
            oscillation: Interval::new(
                sub_down(osc_dn.value(), osc_dn.pad()),
                crate::interval::add_up(osc_up.value(), osc_up.pad()),
            ),
        }
    }

    /// Contribution `(hi - lo) * volume` of active cell `i`.
    pub fn contribution(&self, i: usize) -> f64 {
        let b = self.bounds[i];
        mul_up(sub_up(b.hi, b.lo), volume(u32::from(self.levels[i]), self.dim))
    }

    pub fn level_of(&self, i: usize) -> u32 {
        u32::from(self.levels[i])
    }

    /// Split every selected cell below `cap` into its `2^m` children.
    pub fn refine(&mut self, select: impl Fn(usize) -> bool, cap: u32, max_cells: usize) -> Result<Refined> {
        let dim = self.dim;
        let fan = 1usize << dim;
        let chosen: Vec<bool> = (0..self.len()).map(|i| self.level_of(i) < cap && select(i)).collect();
        let n_split = chosen.iter().filter(|&&c| c).count();
        if n_split == 0 {
            return Ok(Refined::Nothing);
        }
        if (self.len() - n_split) as u128 + (n_split as u128) * (fan as u128) > max_cells as u128 {
            return Ok(Refined::OverBudget);
        }

        let levels = std::mem::take(&mut self.levels);
        let corners = std::mem::take(&mut self.corners);
        let bounds = std::mem::take(&mut self.bounds);
        let mut i = 0;
        while i < levels.len() {
            // Gather a chunk of parents whose children fit in one batch.
            let start = i;
            let mut kids = 0;
            while i < levels.len() && kids < CHUNK {
                if chosen[i] {
                    kids += fan;
                }
                i += 1;
            }
            let mut child_levels = Vec::with_capacity(kids);
            let mut child_corners = Vec::with_capacity(kids * dim);
            for p in start..i {
                if !chosen[p] {
                    continue;
                }
                let level = levels[p] + 1;
                let corner = &corners[p * dim..(p + 1) * dim];
                for c in 0..fan {
                    for (j, &n) in corner.iter().enumerate() {
                        let doubled = n.checked_mul(2).ok_or(Error::Geometry(
                            crate::geometry::GeometryError::CornerOverflow { level: u32::from(level) },
                        ))?;
                        child_corners.push(doubled + ((c >> j) & 1) as i64);
                    }
                    child_levels.push(level);
                }
            }
            let evaluated = self.evaluate(&child_levels, &child_corners)?;
            let mut next = 0;
            for p in start..i {
                let parent = bounds[p];
                let corner = &corners[p * dim..(p + 1) * dim];
                if !chosen[p] {
                    self.levels.push(levels[p]);
                    self.corners.extend_from_slice(corner);
                    self.bounds.push(parent);
                    continue;
                }
                for _ in 0..fan {
                    let level = u32::from(child_levels[next]);
                    let ccorner = &child_corners[next * dim..(next + 1) * dim];
                    let b = evaluated[next].intersect(&parent).ok_or_else(|| Error::Inconsistent {
                        cube: cube_name(level, ccorner),
                        parent: parent.to_string(),
                        child: evaluated[next].to_string(),
                    })?;
                    self.absorb(level, ccorner, b);
                    self.max_level = self.max_level.max(level);
                    next += 1;
                }
            }
        }
        Ok(Refined::Done)
    }

    /// The current step-function sandwich: frozen cells, then active cells.
    pub fn step_cells(&self) -> Option<Vec<StepCell>> {
        let mut cells = self.frozen_cells.clone()?;
        for (i, b) in self.bounds.iter().enumerate() {
            cells.push(StepCell {
                level: self.level_of(i),
                corner: self.corners[i * self.dim..(i + 1) * self.dim].to_vec(),
                lo: b.lo,
                hi: b.hi,
            });
        }
        Some(cells)
    }
}
