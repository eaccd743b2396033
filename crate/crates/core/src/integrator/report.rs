use serde::Serialize;

use super::{IntegrateOptions, LevelSums, StepCell, Strategy};
use crate::interval::{add_up, sub_down, Interval};

/// One level (uniform) or one refinement round (adaptive).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub k: u32,
    /// Finest cube level present.
    pub level: u32,
    #[serde(rename = "L")]
    pub lower: f64,
    #[serde(rename = "U")]
    pub upper: f64,
    pub pad: f64,
    pub cubes: usize,
    #[serde(skip)]
    pub oscillation: Interval,
}

impl Row {
    pub(crate) fn new(k: u32, s: &LevelSums) -> Self {
        Row {
            k,
            level: s.level,
            lower: s.lower,
            upper: s.upper,
            pad: s.pad,
            cubes: s.cubes,
            oscillation: s.oscillation,
        }
    }

    pub fn enclosure(&self) -> Interval {
        Interval::new(sub_down(self.lower, self.pad), add_up(self.upper, self.pad))
    }

    pub fn gap(&self) -> f64 {
        self.enclosure().width()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    /// `U - L <= epsilon` at row `k`; the enclosure contains the integral.
    Integrable { enclosure: [f64; 2], k: u32, gap: f64 },
    /// The gap at the last row exceeds epsilon.
    Undecided { enclosure: [f64; 2], k: u32, gap: f64 },
    /// The gap of an indicator stopped moving (heuristic).
    NotConverging { enclosure: [f64; 2], k: u32, gap: f64 },
}

impl Verdict {
    pub fn is_integrable(&self) -> bool {
        matches!(self, Verdict::Integrable { .. })
    }

    pub fn enclosure(&self) -> Interval {
        let (Verdict::Integrable { enclosure, .. }
        | Verdict::Undecided { enclosure, .. }
        | Verdict::NotConverging { enclosure, .. }) = self;
        Interval::new(enclosure[0], enclosure[1])
    }

    pub fn gap(&self) -> f64 {
        let (Verdict::Integrable { gap, .. }
        | Verdict::Undecided { gap, .. }
        | Verdict::NotConverging { gap, .. }) = self;
        *gap
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stop {
    Converged,
    KMax,
    CellBudget,
    RoundLimit,
    Stalled,
}

/// The sequences `L_k`, `U_k` and the verdict drawn from them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadicSumReport {
    pub dim: usize,
    pub strategy: Strategy,
    pub epsilon: f64,
    pub k_max: u32,
    pub rows: Vec<Row>,
    pub verdict: Verdict,
    /// Largest rounding pad over all rows.
    pub pad: f64,
    pub stopped: Stop,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_function: Option<Vec<StepCell>>,
}

impl DyadicSumReport {
    pub(crate) fn build(
        dim: usize,
        opts: &IntegrateOptions,
        rows: Vec<Row>,
        stopped: Stop,
        step_function: Option<Vec<StepCell>>,
    ) -> Self {
        let last = rows.last().expect("at least one row");
        let e = last.enclosure();
        let enclosure = [e.lo, e.hi];
        let (k, gap) = (last.k, last.gap());
        let verdict = match stopped {
            Stop::Converged => Verdict::Integrable { enclosure, k, gap },
            Stop::Stalled => Verdict::NotConverging { enclosure, k, gap },
            _ => Verdict::Undecided { enclosure, k, gap },
        };
        let pad = rows.iter().map(|r| r.pad).fold(0.0, f64::max);
        DyadicSumReport {
            dim,
            strategy: opts.strategy,
            epsilon: opts.epsilon,
            k_max: opts.k_max,
            rows,
            verdict,
            pad,
            stopped,
            step_function,
        }
    }

    /// Rigorous enclosure from the last row.
    pub fn enclosure(&self) -> Interval {
        self.verdict.enclosure()
    }

    pub fn last(&self) -> &Row {
        self.rows.last().expect("at least one row")
    }

    /// Breaks of `L_0 <= L_1 <= ... <= U_1 <= U_0`, each relaxed by the pads
    /// of the rows involved.
    pub fn monotonicity_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            if sub_down(r.lower, r.pad) > add_up(r.upper, r.pad) {
                out.push(format!("row {i}: L = {} > U = {}", r.lower, r.upper));
            }
            if i == 0 {
                continue;
            }
            let p = &self.rows[i - 1];
            let slack = add_up(p.pad, r.pad);
            if add_up(r.lower, slack) < p.lower {
                out.push(format!("row {i}: L fell from {} to {}", p.lower, r.lower));
            }
            if sub_down(r.upper, slack) > p.upper {
                out.push(format!("row {i}: U rose from {} to {}", p.upper, r.upper));
            }
        }
        out
    }

    /// Every row satisfies `U - L = sum (hi - lo) vol`.
    pub fn oscillation_identity_holds(&self) -> bool {
        self.rows.iter().all(|r| super::oscillation_consistent(r.lower, r.upper, r.pad, &r.oscillation))
    }
}
