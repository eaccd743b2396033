use serde::{Deserialize, Serialize};

use super::BoundOracle;
use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::geometry::{Cell, DyadicBox};
use crate::interval::Interval;

/// `expr <= 0`, or `expr < 0` when strict.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub expr: Expr,
    pub strict: bool,
}

impl Constraint {
    pub fn parse(source: &str, dim: usize, strict: bool) -> Result<Self> {
        Ok(Constraint { expr: expr::parse(source, dim)?, strict })
    }

    fn holds_at(&self, p: &[f64]) -> bool {
        match self.expr.eval_point(p) {
            Ok(v) if self.strict => v < 0.0,
            Ok(v) => v <= 0.0,
            Err(_) => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Inside,
    Outside,
    Boundary,
}

/// A conjunction of constraints inside a bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    bbox: DyadicBox,
    constraints: Vec<Constraint>,
}

#[derive(Serialize, Deserialize)]
struct RawConstraint {
    expr: String,
    #[serde(default)]
    strict: bool,
}

#[derive(Serialize, Deserialize)]
struct RawRegion {
    dim: usize,
    bbox: String,
    #[serde(default)]
    constraints: Vec<RawConstraint>,
}

impl Region {
    pub fn new(bbox: DyadicBox, constraints: Vec<Constraint>) -> Result<Self> {
        let dim = bbox.dim();
        for c in &constraints {
            if c.expr.min_dim() > dim {
                return Err(expr::ExprError::Dimension { var: format!("x{}", c.expr.min_dim()), dim }.into());
            }
        }
        Ok(Region { bbox, constraints })
    }

    /// The box itself, with no constraints.
    pub fn from_box(bbox: DyadicBox) -> Self {
        Region { bbox, constraints: Vec::new() }
    }

    /// Constraints given as `(source, strict)` pairs.
    pub fn parse(bbox: DyadicBox, constraints: &[(&str, bool)]) -> Result<Self> {
        let dim = bbox.dim();
        let cs = constraints
            .iter()
            .map(|&(src, strict)| Constraint::parse(src, dim, strict))
            .collect::<Result<Vec<_>>>()?;
        Region::new(bbox, cs)
    }

    /// Parse the JSON form `{dim, bbox, constraints: [{expr, strict}]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawRegion =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("region JSON: {e}")))?;
        let bbox = DyadicBox::parse(&raw.bbox)?;
        if bbox.dim() != raw.dim {
            return Err(Error::Invalid(format!(
                "region declares dim {} but its bbox has dimension {}",
                raw.dim,
                bbox.dim()
            )));
        }
        let cs = raw
            .constraints
            .iter()
            .map(|c| Constraint::parse(&c.expr, raw.dim, c.strict))
            .collect::<Result<Vec<_>>>()?;
        Region::new(bbox, cs)
    }

    pub fn to_json(&self) -> String {
        let raw = RawRegion {
            dim: self.dim(),
            bbox: self.bbox.to_string(),
            constraints: self
                .constraints
                .iter()
                .map(|c| RawConstraint { expr: c.expr.to_string(), strict: c.strict })
                .collect(),
        };
        serde_json::to_string(&raw).expect("region serializes")
    }

    pub fn dim(&self) -> usize {
        self.bbox.dim()
    }

    pub fn bbox(&self) -> &DyadicBox {
        &self.bbox
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Both regions at once: boxes intersected, constraints concatenated.
    pub fn intersection(&self, other: &Region) -> Result<Region> {
        let bbox = self.bbox.intersection(&other.bbox)?;
        let mut constraints = self.constraints.clone();
        constraints.extend(other.constraints.iter().cloned());
        Ok(Region { bbox, constraints })
    }

    /// Reorder coordinates: new axis `i` is old axis `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Region> {
        let bbox = self.bbox.select(perm)?;
        // Old variable perm[i] becomes new variable i.
        let mut inverse = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let constraints = self
            .constraints
            .iter()
            .map(|c| Constraint { expr: c.expr.remap_vars(&inverse), strict: c.strict })
            .collect();
        Ok(Region { bbox, constraints })
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.bbox.contains_point_f64(p) && self.constraints.iter().all(|c| c.holds_at(p))
    }

    /// Sound three-way classification of a cell.
    pub fn classify_cell(&self, cell: &Cell) -> Classification {
        let Some(part) = self.bbox.intersect_cell(cell) else {
            return Classification::Outside;
        };
        let closure = part.closure();
        let mut all_satisfied = self.bbox.contains_cell(cell);
        for c in &self.constraints {
            match c.expr.eval_interval(&closure) {
                Ok(r) => {
                    let violated = if c.strict { r.lo >= 0.0 } else { r.lo > 0.0 };
                    if violated {
                        return Classification::Outside;
                    }
                    let satisfied = if c.strict { r.hi < 0.0 } else { r.hi <= 0.0 };
                    all_satisfied &= satisfied;
                }
                Err(_) => all_satisfied = false,
            }
        }
        if all_satisfied {
            Classification::Inside
        } else {
            Classification::Boundary
        }
    }
}

/// `chi_E` for a region `E`.
#[derive(Debug, Clone)]
pub struct IndicatorOracle {
    region: Region,
}

impl IndicatorOracle {
    pub fn new(region: Region) -> Self {
        IndicatorOracle { region }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }
}

impl BoundOracle for IndicatorOracle {
    fn dim(&self) -> usize {
        self.region.dim()
    }

    fn support(&self) -> &DyadicBox {
        self.region.bbox()
    }

    fn bounds_cell(&self, cell: &Cell) -> Result<Interval> {
        Ok(match self.region.classify_cell(cell) {
            Classification::Inside => Interval::ONE,
            Classification::Outside => Interval::ZERO,
            Classification::Boundary => Interval::UNIT,
        })
    }

    fn is_indicator(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("indicator {}", self.region.to_json())
    }
}
