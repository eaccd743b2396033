//! Dyadic cubes, m-rectangles and exact volumes.
//!
//! Cubes are identified by `(level, corner)` and are always semiclosed,
//! `prod_j [n_j 2^-k, (n_j + 1) 2^-k)`. Boxes carry per-axis closure flags.
//! Oracles never see cube identities; they receive a [`Cell`], the same
//! region expressed with double endpoints plus closure flags.

mod boxes;
mod cell;
mod cube;
mod dyadic;

pub use boxes::{AxisRange, Closure, DyadicBox};
pub use cell::{Cell, CellAxis};
pub(crate) use cube::{cell_of, cubes_intersecting_with_margin, pow2_neg_f64};
pub use cube::{cube_containing, cubes_intersecting, CubeIter, DyadicCube};
pub use dyadic::DyadicRational;

use thiserror::Error;

/// Finest level the library will enumerate unless configured otherwise.
pub const DEFAULT_LEVEL_CAP: u32 = 40;

/// Hard ceiling: cube corners are `i64`, and `n * 2^-k` must stay exact.
pub const MAX_LEVEL: u32 = 62;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("`{0}` is not an exactly dyadic literal")]
    NotDyadic(String),
    #[error("non-finite coordinate {0}")]
    NonFinite(f64),
    #[error("box literal error at byte {pos}: {message}")]
    BoxSyntax { pos: usize, message: String },
    #[error("inverted axis {axis}: lower bound {lo} exceeds upper bound {hi}")]
    Inverted { axis: usize, lo: String, hi: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("cube corner overflows i64 at level {level}")]
    CornerOverflow { level: u32 },
    #[error("level {level} exceeds the cap {cap}")]
    LevelCap { level: u32, cap: u32 },
}
