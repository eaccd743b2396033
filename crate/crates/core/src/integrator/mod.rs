//! Upper and lower dyadic sums, integrability verdicts, Jordan measure.
//!
//! `U_k(f) = 2^{-km} sum_I hi(I)` and `L_k(f) = 2^{-km} sum_I lo(I)` over the
//! cubes `I` of level `k`, where `[lo(I), hi(I)]` is the oracle's enclosure.
//! Each child's enclosure is intersected with its parent's, so the computed
//! sequences are monotone for every sound oracle. Sums are accumulated in a
//! fixed cube order with compensated summation; `pad` bounds the rounding
//! error, so `[L - pad, U + pad]` encloses the exact sums.

mod active;
mod report;
mod sum;

use serde::Serialize;

pub use active::{CellKind, StepCell};
pub use report::{DyadicSumReport, Row, Stop, Verdict};
pub use sum::Accumulator;

use crate::error::{Error, Result};
use crate::geometry::{DEFAULT_LEVEL_CAP, MAX_LEVEL};
use crate::interval::{add_up, sub_down, Interval};
use crate::oracle::{self, BoundOracle, Oracle, Region};
use active::{ActiveSet, Refined};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Whole-level sums, the literal definition.
    Uniform,
    /// Mixed-level refinement of the cells that dominate the gap.
    Adaptive,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Strategy::Uniform),
            "adaptive" => Ok(Strategy::Adaptive),
            _ => Err(Error::Invalid(format!("unknown strategy `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    pub epsilon: f64,
    pub k_max: u32,
    pub strategy: Strategy,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    pub level_cap: u32,
    /// Report `NotConverging` for indicators whose gap stops moving.
    pub detect_stall: bool,
    pub keep_step_function: bool,
    /// Largest number of active cells held at once.
    pub max_cells: usize,
}

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_MAX_CELLS: usize = 1 << 24;

/// Default finest level: keeps `2^{km}` near `10^7`.
pub fn default_k_max(dim: usize) -> u32 {
    match dim {
        0 | 1 => 24,
        2 => 14,
        3 => 9,
        m => (27 / m as u32).max(2),
    }
}

impl IntegrateOptions {
    pub fn new(dim: usize) -> Self {
        IntegrateOptions {
            epsilon: DEFAULT_EPSILON,
            k_max: default_k_max(dim),
            strategy: Strategy::Adaptive,
            threads: None,
            level_cap: DEFAULT_LEVEL_CAP,
            detect_stall: false,
            keep_step_function: false,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }

    pub fn epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn k_max(mut self, k_max: u32) -> Self {
        self.k_max = k_max;
        self
    }

    pub fn strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.level_cap > MAX_LEVEL {
            return Err(Error::Invalid(format!("level cap {} exceeds {MAX_LEVEL}", self.level_cap)));
        }
        if self.k_max > self.level_cap {
            return Err(
                crate::geometry::GeometryError::LevelCap { level: self.k_max, cap: self.level_cap }.into()
            );
        }
        if dim == 0 || dim * self.k_max as usize > 1022 {
            return Err(Error::Invalid(format!(
                "dimension {dim} with k_max {} underflows cube volumes",
                self.k_max
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::Invalid("threads must be at least 1".into()));
        }
        Ok(())
    }
}

/// Run `f` on a pool with the requested number of threads.
pub(crate) fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Sums of one level (or one adaptive round).
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSums {
    pub level: u32,
    pub lower: f64,
    pub upper: f64,
    /// Bound on the rounding error of either sum.
    pub pad: f64,
    /// Cells still carrying a non-degenerate enclosure.
    pub cubes: usize,
    /// Enclosure of `sum_I (hi - lo) vol(I)`.
    pub oscillation: Interval,
}

impl LevelSums {
    /// `[L - pad, U + pad]`.
    pub fn enclosure(&self) -> Interval {
        Interval::new(sub_down(self.lower, self.pad), add_up(self.upper, self.pad))
    }

    pub fn gap(&self) -> f64 {
        self.enclosure().width()
    }

    /// `U - L` agrees with the separately summed oscillation.
    pub fn oscillation_consistent(&self) -> bool {
        oscillation_consistent(self.lower, self.upper, self.pad, &self.oscillation)
    }
}

pub(crate) fn oscillation_consistent(lower: f64, upper: f64, pad: f64, osc: &Interval) -> bool {
    let diff = Interval::new(
        sub_down(sub_down(upper, lower), 2.0 * pad),
        add_up(crate::interval::sub_up(upper, lower), 2.0 * pad),
    );
    diff.overlaps(osc)
}

/// `(L_k, U_k)` with the semiclosed cubes of level `k`.
pub fn dyadic_sums(o: &dyn BoundOracle, k: u32) -> Result<LevelSums> {
    level_sums(o, k, CellKind::Semiclosed)
}

pub(crate) fn level_sums(o: &dyn BoundOracle, k: u32, kind: CellKind) -> Result<LevelSums> {
    if k > DEFAULT_LEVEL_CAP {
        return Err(crate::geometry::GeometryError::LevelCap { level: k, cap: DEFAULT_LEVEL_CAP }.into());
    }
    let mut set = ActiveSet::new(o, kind, false, DEFAULT_MAX_CELLS)?;
    for _ in 0..k {
        if let Refined::OverBudget = set.refine(|_| true, k, DEFAULT_MAX_CELLS)? {
            return Err(Error::Invalid(format!("level {k} needs more than {DEFAULT_MAX_CELLS} cells")));
        }
    }
    let mut s = set.sums();
    s.level = k;
    Ok(s)
}

/// Uniform refinement, one callback per level; the callback returns `true`
/// to stop. Levels without active cells reuse the previous sums.
pub(crate) fn uniform_levels(
    o: &dyn BoundOracle,
    kind: CellKind,
    k_max: u32,
    max_cells: usize,
    mut visit: impl FnMut(&LevelSums) -> bool,
) -> Result<Option<Stop>> {
    let mut set = ActiveSet::new(o, kind, false, max_cells)?;
    for k in 0..=k_max {
        let mut s = set.sums();
        s.level = k;
        if visit(&s) {
            return Ok(None);
        }
        if k == k_max {
            break;
        }
        if let Refined::OverBudget = set.refine(|_| true, k_max, max_cells)? {
            return Ok(Some(Stop::CellBudget));
        }
    }
    Ok(Some(Stop::KMax))
}

/// Integrate an oracle to within `epsilon`, or report why not.
pub fn integrate(o: &dyn BoundOracle, opts: &IntegrateOptions) -> Result<DyadicSumReport> {
    opts.validate(o.dim())?;
    with_threads(opts.threads, || integrate_in_pool(o, opts, CellKind::Semiclosed))?
}

pub(crate) fn integrate_in_pool(
    o: &dyn BoundOracle,
    opts: &IntegrateOptions,
    kind: CellKind,
) -> Result<DyadicSumReport> {
    let mut set = ActiveSet::new(o, kind, opts.keep_step_function, opts.max_cells)?;
    let mut rows: Vec<Row> = Vec::new();
    let max_rounds = 4 * opts.k_max + 16;
    let stop = loop {
        let round = rows.len() as u32;
        let mut s = set.sums();
        if opts.strategy == Strategy::Uniform {
            s.level = round;
        }
        rows.push(Row::new(round, &s));
        if s.gap() <= opts.epsilon {
            break Stop::Converged;
        }
        if opts.detect_stall && o.is_indicator() && stalled(&rows) {
            break Stop::Stalled;
        }
        let refined = match opts.strategy {
            Strategy::Uniform => {
                if round >= opts.k_max {
                    break Stop::KMax;
                }
                set.refine(|_| true, opts.k_max, opts.max_cells)?
            }
            Strategy::Adaptive => {
                if round >= max_rounds {
                    break Stop::RoundLimit;
                }
                let threshold = opts.epsilon / set.len().max(1) as f64;
                let snapshot = &set;
                let chosen: Vec<bool> =
                    (0..snapshot.len()).map(|i| snapshot.contribution(i) > threshold).collect();
                set.refine(|i| chosen[i], opts.k_max, opts.max_cells)?
            }
        };
        match refined {
            Refined::Done => {}
            Refined::Nothing => {
                if opts.strategy == Strategy::Uniform {
                    // Every cell collapsed; later levels repeat these sums.
                    continue;
                }
                break Stop::KMax;
            }
            Refined::OverBudget => break Stop::CellBudget,
        }
    };
    Ok(DyadicSumReport::build(o.dim(), opts, rows, stop, set.step_cells()))
}

fn stalled(rows: &[Row]) -> bool {
    let n = rows.len();
    n >= 3 && {
        let g = |r: &Row| r.upper - r.lower;
        g(&rows[n - 1]) == g(&rows[n - 2]) && g(&rows[n - 2]) == g(&rows[n - 3])
    }
}

/// Jordan measure of a region: the integral of its indicator.
pub fn jordan_measure(region: &Region, opts: &IntegrateOptions) -> Result<DyadicSumReport> {
    integrate(&oracle::IndicatorOracle::new(region.clone()), opts)
}

/// Outcome of the very-small (Jordan null) test.
#[derive(Clone, Debug, Serialize)]
pub struct VerySmallReport {
    pub very_small: bool,
    /// First level with `U_k(chi_E) <= epsilon`.
    pub witness_k: Option<u32>,
    /// Total volume of the cubes meeting the set at the last level computed.
    pub cover_volume: f64,
    pub epsilon: f64,
    pub k_max: u32,
    pub rows: Vec<Row>,
}

/// Whether `U_k(chi_E) <= epsilon` for some `k <= k_max`.
pub fn is_very_small(region: &Region, opts: &IntegrateOptions) -> Result<VerySmallReport> {
    opts.validate(region.dim())?;
    let ind = oracle::IndicatorOracle::new(region.clone());
    let mut rows = Vec::new();
    let mut witness = None;
    with_threads(opts.threads, || {
        uniform_levels(&ind, CellKind::Semiclosed, opts.k_max, opts.max_cells, |s| {
            rows.push(Row::new(s.level, s));
            if add_up(s.upper, s.pad) <= opts.epsilon {
                witness = Some(s.level);
                return true;
            }
            false
        })
    })??;
    let last = rows.last().expect("level 0 is always computed");
    Ok(VerySmallReport {
        very_small: witness.is_some(),
        witness_k: witness,
        cover_volume: add_up(last.upper, last.pad),
        epsilon: opts.epsilon,
        k_max: opts.k_max,
        rows,
    })
}

/// Integrals over a union and over its two parts.
#[derive(Clone, Debug, Serialize)]
pub struct AdditivityReport {
    pub union: DyadicSumReport,
    pub first: DyadicSumReport,
    pub second: DyadicSumReport,
    /// Enclosure of the sum of the two parts.
    pub parts_sum: [f64; 2],
    /// The union's enclosure meets the sum of the parts.
    pub consistent: bool,
    pub overlap: VerySmallReport,
}

/// Compare the integral over `r1 ∪ r2` with the sum over the parts.
pub fn additivity_check(
    o: &Oracle,
    r1: &Region,
    r2: &Region,
    opts: &IntegrateOptions,
) -> Result<AdditivityReport> {
    let both = r1.intersection(r2)?;
    let overlap = is_very_small(&both, opts)?;
    if !overlap.very_small {
        return Err(Error::Precondition(format!(
            "the regions overlap in a set that is not very small by level {} (cover volume {})",
            opts.k_max, overlap.cover_volume
        )));
    }
    let union_ind = oracle::max(oracle::indicator(r1.clone()), oracle::indicator(r2.clone()))?;
    let on_union = oracle::mul(o.clone(), union_ind)?;
    let on_first = oracle::restrict(o.clone(), r1.clone())?;
    let on_second = oracle::restrict(o.clone(), r2.clone())?;
    let union = integrate(on_union.as_ref(), opts)?;
    let first = integrate(on_first.as_ref(), opts)?;
    let second = integrate(on_second.as_ref(), opts)?;
    let parts = first.enclosure().add(&second.enclosure());
    Ok(AdditivityReport {
        consistent: union.enclosure().overlaps(&parts),
        parts_sum: [parts.lo, parts.hi],
        union,
        first,
        second,
        overlap,
    })
}
