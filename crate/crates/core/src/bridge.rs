//! Closed-cube dyadic sums and classical Darboux sums over arbitrary
//! rectangular partitions, for comparing the dyadic integral with the
//! classical one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cell, DyadicBox, DyadicRational};
use crate::integrator::{self, level_sums, Accumulator, CellKind, LevelSums};
use crate::interval::{sub_down, sub_up, Interval};
use crate::oracle::BoundOracle;

/// Per-axis cut points `t_0 < ... < t_N`; cells are products of the closed
/// intervals `[t_i, t_{i+1}]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPartition", into = "RawPartition")]
pub struct Partition {
    cuts: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawPartition {
    cuts: Vec<Vec<f64>>,
}

impl TryFrom<RawPartition> for Partition {
    type Error = Error;

    fn try_from(raw: RawPartition) -> Result<Self> {
        Partition::new(raw.cuts)
    }
}

impl From<Partition> for RawPartition {
    fn from(p: Partition) -> Self {
        RawPartition { cuts: p.cuts }
    }
}

impl Partition {
    pub fn new(cuts: Vec<Vec<f64>>) -> Result<Self> {
        if cuts.is_empty() {
            return Err(Error::Invalid("a partition needs at least one axis".into()));
        }
        for (j, axis) in cuts.iter().enumerate() {
            if axis.len() < 2 {
                return Err(Error::Invalid(format!("axis {} needs at least two cut points", j + 1)));
            }
            if let Some(t) = axis.iter().find(|t| !t.is_finite()) {
                return Err(Error::Invalid(format!("axis {}: cut point {t} is not finite", j + 1)));
            }
            if let Some(w) = axis.windows(2).find(|w| w[0] >= w[1]) {
                return Err(Error::Invalid(format!(
                    "axis {}: cut points must be strictly increasing, got {} then {}",
                    j + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(Partition { cuts })
    }

    /// `n[j]` equal cells along axis `j` of the rectangle.
    pub fn uniform(rect: &[(f64, f64)], n: &[usize]) -> Result<Self> {
        check_shape(rect, n)?;
        Partition::new(
            rect.iter()
                .zip(n)
                .map(|(&(a, b), &n)| {
                    let mut axis: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
                    axis.push(b);
                    axis
                })
                .collect(),
        )
    }

    /// `n[j]` cells along axis `j` with interior cuts drawn uniformly at
    /// random from a ChaCha stream seeded by `seed`.
    pub fn random(rect: &[(f64, f64)], n: &[usize], seed: u64) -> Result<Self> {
        check_shape(rect, n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cuts = Vec::with_capacity(rect.len());
        for (&(a, b), &n) in rect.iter().zip(n) {
            let mut axis = vec![a, b];
            while axis.len() < n + 1 {
                let t = rng.gen_range(a..b);
                if t > a && !axis.contains(&t) {
                    axis.push(t);
                }
            }
            axis.sort_by(f64::total_cmp);
            cuts.push(axis);
        }
        Partition::new(cuts)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("partition: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("partition serializes")
    }

    pub fn dim(&self) -> usize {
        self.cuts.len()
    }

    pub fn cuts(&self) -> &[Vec<f64>] {
        &self.cuts
    }

    pub fn cell_count(&self) -> usize {
        self.cuts.iter().map(|a| a.len() - 1).product()
    }

    /// The closed rectangle the partition spans.
    pub fn rectangle(&self) -> Vec<(f64, f64)> {
        self.cuts.iter().map(|a| (a[0], a[a.len() - 1])).collect()
    }

    /// Coarsest common refinement.
    pub fn common_refinement(&self, other: &Partition) -> Result<Partition> {
        if self.rectangle() != other.rectangle() {
            return Err(Error::Invalid("partitions span different rectangles".into()));
        }
        Partition::new(
            self.cuts
                .iter()
                .zip(&other.cuts)
                .map(|(a, b)| {
                    let mut c: Vec<f64> = a.iter().chain(b).copied().collect();
                    c.sort_by(f64::total_cmp);
                    c.dedup();
                    c
                })
                .collect(),
        )
    }

    /// The closed cell with the given per-axis indices.
    fn cell(&self, index: &[usize]) -> Cell {
        Cell::closed(
            &self.cuts.iter().zip(index).map(|(a, &i)| Interval::new(a[i], a[i + 1])).collect::<Vec<_>>(),
        )
    }

    fn volume(&self, index: &[usize]) -> Interval {
        self.cuts.iter().zip(index).fold(Interval::point(1.0), |v, (a, &i)| {
            v.mul(&Interval::new(sub_down(a[i + 1], a[i]), sub_up(a[i + 1], a[i])))
        })
    }

    fn index(&self, mut flat: usize) -> Vec<usize> {
        self.cuts
            .iter()
            .map(|a| {
                let n = a.len() - 1;
                let i = flat % n;
                flat /= n;
                i
            })
            .collect()
    }
}

fn check_shape(rect: &[(f64, f64)], n: &[usize]) -> Result<()> {
    if rect.len() != n.len() {
        return Err(Error::Invalid(format!("{} axes but {} cell counts", rect.len(), n.len())));
    }
    if n.contains(&0) {
        return Err(Error::Invalid("cell counts must be positive".into()));
    }
    Ok(())
}

/// `E^#`: the half-open form of a closed rectangle, with the same volume.
#[derive(Clone, Debug, PartialEq)]
pub struct EsharpBox {
    closed: DyadicBox,
}

impl EsharpBox {
    pub fn new(rect: &DyadicBox) -> Self {
        EsharpBox { closed: rect.closure() }
    }

    pub fn closed(&self) -> &DyadicBox {
        &self.closed
    }

    pub fn sharp(&self) -> DyadicBox {
        self.closed.half_open()
    }

    pub fn volume(&self) -> DyadicRational {
        self.closed.volume()
    }
}

/// Dyadic sums at level `k` with bounds taken over closed cubes.
pub fn closed_cube_sums(o: &dyn BoundOracle, k: u32) -> Result<LevelSums> {
    level_sums(o, k, CellKind::Closed)
}

/// Lower and upper Darboux sums of an oracle over a partition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassicalSums {
    pub cells: usize,
    /// Outward-rounded bounds: `lower <= L(f, P)` and `U(f, P) <= upper`.
    pub lower: f64,
    pub upper: f64,
}

impl ClassicalSums {
    pub fn enclosure(&self) -> Interval {
        Interval::new(self.lower, self.upper)
    }
}

const CHUNK: usize = 1 << 15;

pub fn classical_sums(o: &dyn BoundOracle, p: &Partition) -> Result<ClassicalSums> {
    if p.dim() != o.dim() {
        return Err(Error::Invalid(format!("partition has {} axes, oracle has {}", p.dim(), o.dim())));
    }
    let support = o.support();
    if !support.is_empty() {
        for (j, (a, b)) in p.rectangle().into_iter().enumerate() {
            let axis = support.axis(j);
            if DyadicRational::from_f64(a)? > axis.lo || DyadicRational::from_f64(b)? < axis.hi {
                return Err(Error::Precondition(format!(
                    "partition axis {} spans [{a}, {b}], which does not cover the support {support}",
                    j + 1
                )));
            }
        }
    }
    let n = p.cell_count();
    let mut lower = Accumulator::new();
    let mut upper = Accumulator::new();
    for start in (0..n).step_by(CHUNK) {
        let terms: Vec<Interval> = (start..n.min(start + CHUNK))
            .into_par_iter()
            .map(|flat| {
                let index = p.index(flat);
                let b = o.bounds_cell(&p.cell(&index))?;
                Ok(b.mul(&p.volume(&index)))
            })
            .collect::<Result<_>>()?;
        for t in terms {
            lower.add(t.lo);
            upper.add(t.hi);
        }
    }
    Ok(ClassicalSums {
        cells: n,
        lower: sub_down(lower.value(), lower.pad()),
        upper: sub_up(upper.value(), -upper.pad()),
    })
}

/// One row of a dyadic bracket sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BracketRow {
    pub k: u32,
    #[serde(rename = "L")]
    pub lower: f64,
    #[serde(rename = "U")]
    pub upper: f64,
    pub pad: f64,
}

impl From<&LevelSums> for BracketRow {
    fn from(s: &LevelSums) -> Self {
        BracketRow { k: s.level, lower: s.lower, upper: s.upper, pad: s.pad }
    }
}

impl BracketRow {
    pub fn enclosure(&self) -> Interval {
        Interval::new(sub_down(self.lower, self.pad), sub_up(self.upper, -self.pad))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalRow {
    pub label: String,
    #[serde(flatten)]
    pub sums: ClassicalSums,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairwiseOverlap {
    pub semiclosed_closed: bool,
    pub semiclosed_classical: bool,
    pub closed_classical: bool,
}

impl PairwiseOverlap {
    pub fn all(&self) -> bool {
        self.semiclosed_closed && self.semiclosed_classical && self.closed_classical
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub dim: usize,
    pub k_max: u32,
    pub semiclosed: Vec<BracketRow>,
    pub closed: Vec<BracketRow>,
    pub classical: Vec<ClassicalRow>,
    pub overlap: PairwiseOverlap,
    /// `|closed U - semiclosed U|` at `k_max`.
    pub upper_difference: f64,
    /// The wider of the two dyadic gaps at `k_max`.
    pub dyadic_gap: f64,
    /// `upper_difference <= 10 * dyadic_gap`.
    pub upper_agreement: bool,
}

/// Partitions used by [`equivalence_report`].
#[derive(Clone, Debug)]
pub struct PartitionSchedule {
    pub partitions: Vec<(String, Partition)>,
}

impl PartitionSchedule {
    /// Dyadic-aligned uniform partitions with `2^j` cells per axis for
    /// `j = 1, 3, 5, ...` up to `2^finest`, each followed by a random
    /// partition with the same number of cells.
    pub fn standard(rect: &[(f64, f64)], finest: u32, seed: u64) -> Result<Self> {
        let mut partitions = Vec::new();
        for j in (1..=finest).step_by(2).chain(if finest % 2 == 0 { Some(finest) } else { None }) {
            let n = vec![1usize << j; rect.len()];
            partitions.push((format!("uniform 2^{j}"), Partition::uniform(rect, &n)?));
            partitions.push((
                format!("random 2^{j} seed {seed}"),
                Partition::random(rect, &n, seed.wrapping_add(j as u64))?,
            ));
        }
        Ok(PartitionSchedule { partitions })
    }
}

/// Run all three bracket families and compare their final enclosures.
///
/// The classical family is compared through the intersection of its
/// enclosures, each of which contains the integral.
pub fn equivalence_report(
    o: &dyn BoundOracle,
    k_max: u32,
    schedule: &PartitionSchedule,
) -> Result<EquivalenceReport> {
    if schedule.partitions.is_empty() {
        return Err(Error::Invalid("empty partition schedule".into()));
    }
    let mut semiclosed = Vec::new();
    integrator::uniform_levels(o, CellKind::Semiclosed, k_max, usize::MAX, |s| {
        semiclosed.push(BracketRow::from(s));
        false
    })?;
    let mut closed = Vec::new();
    integrator::uniform_levels(o, CellKind::Closed, k_max, usize::MAX, |s| {
        closed.push(BracketRow::from(s));
        false
    })?;
    let classical = schedule
        .partitions
        .iter()
        .map(|(label, p)| Ok(ClassicalRow { label: label.clone(), sums: classical_sums(o, p)? }))
        .collect::<Result<Vec<_>>>()?;

    let semi = semiclosed.last().expect("level 0 row");
    let clos = closed.last().expect("level 0 row");
    let classic = classical
        .iter()
        .map(|r| r.sums.enclosure())
        .try_fold(Interval::new(f64::NEG_INFINITY, f64::INFINITY), |acc, e| acc.intersect(&e));
    let overlaps = |e: &Interval| classic.is_some_and(|c| c.overlaps(e));
    let upper_difference = sub_up(clos.upper, semi.upper).abs().max(sub_up(semi.upper, clos.upper).abs());
    let dyadic_gap = semi.enclosure().width().max(clos.enclosure().width());
    Ok(EquivalenceReport {
        dim: o.dim(),
        k_max,
        overlap: PairwiseOverlap {
            semiclosed_closed: semi.enclosure().overlaps(&clos.enclosure()),
            semiclosed_classical: overlaps(&semi.enclosure()),
            closed_classical: overlaps(&clos.enclosure()),
        },
        upper_agreement: upper_difference <= 10.0 * dyadic_gap,
        upper_difference,
        dyadic_gap,
        semiclosed,
        closed,
        classical,
    })
}
