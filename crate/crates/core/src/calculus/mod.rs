//! Newton-Leibniz checks, parameter integrals and repeated integration.

mod parameter;

pub use parameter::{InnerOptions, ParameterIntegral, Slice};

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::DyadicBox;
use crate::integrator::{self, DyadicSumReport, IntegrateOptions};
use crate::interval::Interval;
use crate::oracle::{self, Constraint, ExprOracle, Oracle, Region};

/// Outcome of comparing `int_a^b g` with `F(b) - F(a)`.
#[derive(Clone, Debug, Serialize)]
pub struct NlCheck {
    pub integral: DyadicSumReport,
    /// `F(b) - F(a)` in double precision.
    pub nl_value: f64,
    /// Rigorous enclosure of `F(b) - F(a)`.
    pub nl_enclosure: [f64; 2],
    /// Whether `F(b) - F(a)` lies in the integral's enclosure.
    pub contained: bool,
    /// Points where a central difference of `F` disagrees with `g`.
    pub warnings: Vec<String>,
}

const FD_POINTS: usize = 17;
const FD_TOLERANCE: f64 = 1e-4;

/// Integrate `g` over `[a, b)` and compare with `F(b) - F(a)`.
///
/// `F' = g` is taken on trust; a finite-difference spot check at Chebyshev
/// points only produces warnings.
#[allow(non_snake_case)]
pub fn newton_leibniz_check(g: &Expr, F: &Expr, a: f64, b: f64, opts: &IntegrateOptions) -> Result<NlCheck> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Precondition(format!("need a < b, got a = {a}, b = {b}")));
    }
    if g.min_dim() > 1 || F.min_dim() > 1 {
        return Err(Error::Invalid("g and F must be functions of x1".into()));
    }
    let support = DyadicBox::semiclosed(&[(a, b)])?;
    let integral = integrator::integrate(&ExprOracle::new(g.clone(), support)?, opts)?;
    let nl_value = F.eval_point(&[b])? - F.eval_point(&[a])?;
    let nl = F.eval_interval(&[Interval::point(b)])?.sub(&F.eval_interval(&[Interval::point(a)])?);
    let enclosure = integral.enclosure();
    Ok(NlCheck {
        contained: enclosure.overlaps(&nl),
        nl_value,
        nl_enclosure: [nl.lo, nl.hi],
        warnings: derivative_warnings(g, F, a, b),
        integral,
    })
}

#[allow(non_snake_case)]
fn derivative_warnings(g: &Expr, F: &Expr, a: f64, b: f64) -> Vec<String> {
    let mut out = Vec::new();
    let (c, r) = ((a + b) / 2.0, (b - a) / 2.0);
    for i in 0..FD_POINTS {
        let t = c + r * ((2 * i + 1) as f64 * PI / (2 * FD_POINTS) as f64).cos();
        let h = f64::EPSILON.cbrt() * t.abs().max(1.0);
        let fd = F.eval_point(&[t + h]).and_then(|p| Ok((p - F.eval_point(&[t - h])?) / (2.0 * h)));
        match (fd, g.eval_point(&[t])) {
            (Ok(d), Ok(v)) => {
                if (d - v).abs() > FD_TOLERANCE * v.abs().max(1.0) {
                    out.push(format!("at {t}: difference quotient of F is {d}, g is {v}"));
                }
            }
            (Err(e), _) | (_, Err(e)) => out.push(format!("at {t}: {e}")),
        }
    }
    out
}

/// An iterated integral: outer integration of a parameter integral.
#[derive(Clone, Debug)]
pub struct RepeatedIntegralPlan {
    pub inner: ParameterIntegral,
    pub outer: IntegrateOptions,
}

impl RepeatedIntegralPlan {
    /// Split the inner tolerance off the outer one.
    pub fn inner_options(outer_epsilon: f64, outer_volume: f64) -> InnerOptions {
        InnerOptions {
            epsilon: outer_epsilon / (outer_volume.max(f64::MIN_POSITIVE) * 4.0),
            ..InnerOptions::default()
        }
    }

    /// `int_outer int_{u}^{v} f dy dx`.
    pub fn graph(f: Expr, u: Expr, v: Expr, outer_box: DyadicBox, outer: IntegrateOptions) -> Result<Self> {
        let inner = Self::inner_options(outer.epsilon, outer_box.volume().to_f64_up());
        Ok(RepeatedIntegralPlan { inner: ParameterIntegral::graph(f, u, v, outer_box, inner)?, outer })
    }

    /// Integrate out the last variable of an oracle, then the rest.
    pub fn of_oracle(o: Oracle, outer: IntegrateOptions) -> Result<Self> {
        let m = o.dim();
        let outer_box = o.support().select(&(0..m.saturating_sub(1)).collect::<Vec<_>>())?;
        let inner = Self::inner_options(outer.epsilon, outer_box.volume().to_f64_up());
        Ok(RepeatedIntegralPlan { inner: ParameterIntegral::of_oracle(o, inner)?, outer })
    }
}

/// Outer integration of the plan's parameter integral.
pub fn repeated_integral(plan: &RepeatedIntegralPlan) -> Result<DyadicSumReport> {
    integrator::integrate(&plan.inner, &plan.outer)
}

/// Where a Fubini comparison integrates.
#[derive(Clone, Debug)]
pub enum FubiniDomain {
    Box(DyadicBox),
    Region(Region),
    /// `{(x, y): x in outer, u(x) <= y <= v(x)}`.
    Graph {
        outer: DyadicBox,
        u: Expr,
        v: Expr,
    },
}

impl FubiniDomain {
    fn dim(&self) -> usize {
        match self {
            FubiniDomain::Box(b) => b.dim(),
            FubiniDomain::Region(r) => r.dim(),
            FubiniDomain::Graph { outer, .. } => outer.dim() + 1,
        }
    }

    /// The domain as a region.
    pub fn to_region(&self) -> Result<Region> {
        match self {
            FubiniDomain::Box(b) => Ok(Region::from_box(b.clone())),
            FubiniDomain::Region(r) => Ok(r.clone()),
            FubiniDomain::Graph { outer, u, v } => {
                let m = outer.dim() + 1;
                let y = Box::new(Expr::Var(m - 1));
                let xs = outer.outer_cell().closure();
                let span = u.eval_interval(&xs)?.hull(&v.eval_interval(&xs)?);
                let mut bounds: Vec<(f64, f64)> = xs.iter().map(|i| (i.lo, i.hi)).collect();
                bounds.push((span.lo, span.hi));
                let mut axes = outer.axes().to_vec();
                axes.push(DyadicBox::closed(&bounds[m - 1..])?.axis(0).clone());
                let bbox = DyadicBox::new(axes)?;
                Region::new(
                    bbox,
                    vec![
                        Constraint { expr: Expr::Sub(Box::new(u.clone()), y.clone()), strict: false },
                        Constraint { expr: Expr::Sub(y, Box::new(v.clone())), strict: false },
                    ],
                )
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FubiniReport {
    pub direct: DyadicSumReport,
    pub repeated: DyadicSumReport,
    pub overlap: bool,
    /// Repeated integral with the first and last variables exchanged.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swapped: Option<DyadicSumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swapped_overlap: Option<bool>,
    /// Two integrable verdicts whose enclosures miss each other.
    pub critical: bool,
}

/// Compare the direct integral of `f` over a domain with its repeated
/// integral (and optionally the order-swapped repeated integral).
pub fn fubini_check(
    f: &Expr,
    domain: &FubiniDomain,
    opts: &IntegrateOptions,
    swap: bool,
) -> Result<FubiniReport> {
    let m = domain.dim();
    if m < 2 {
        return Err(Error::Invalid("a Fubini check needs at least two variables".into()));
    }
    if f.min_dim() > m {
        return Err(crate::expr::ExprError::Dimension { var: format!("x{}", f.min_dim()), dim: m }.into());
    }
    let region = domain.to_region()?;
    let direct_oracle = restricted(f, &region)?;
    let direct = integrator::integrate(direct_oracle.as_ref(), opts)?;

    let outer_opts = opts.clone();
    let plan = match domain {
        FubiniDomain::Graph { outer, u, v } => {
            RepeatedIntegralPlan::graph(f.clone(), u.clone(), v.clone(), outer.clone(), outer_opts.clone())?
        }
        FubiniDomain::Box(b) => RepeatedIntegralPlan::of_oracle(
            Arc::new(ExprOracle::new(f.clone(), b.clone())?),
            outer_opts.clone(),
        )?,
        FubiniDomain::Region(_) => {
            RepeatedIntegralPlan::of_oracle(direct_oracle.clone(), outer_opts.clone())?
        }
    };
    let repeated = repeated_integral(&plan)?;

    let (swapped, swapped_overlap) = if swap {
        let mut perm: Vec<usize> = (0..m).collect();
        perm.swap(0, m - 1);
        let g = f.remap_vars(&perm);
        let r = region.permute(&perm)?;
        let plan = RepeatedIntegralPlan::of_oracle(restricted(&g, &r)?, outer_opts)?;
        let s = repeated_integral(&plan)?;
        let ok = s.enclosure().overlaps(&direct.enclosure());
        (Some(s), Some(ok))
    } else {
        (None, None)
    };

    let overlap = direct.enclosure().overlaps(&repeated.enclosure());
    let both_integrable = direct.verdict.is_integrable() && repeated.verdict.is_integrable();
    let swapped_bad = swapped.as_ref().is_some_and(|s| {
        s.verdict.is_integrable() && direct.verdict.is_integrable() && swapped_overlap == Some(false)
    });
    Ok(FubiniReport {
        critical: (both_integrable && !overlap) || swapped_bad,
        direct,
        repeated,
        overlap,
        swapped,
        swapped_overlap,
    })
}

/// `f chi_R`, with no restriction when the region is its own box.
fn restricted(f: &Expr, region: &Region) -> Result<Oracle> {
    let base: Oracle = Arc::new(ExprOracle::new(f.clone(), region.bbox().clone())?);
    if region.constraints().is_empty() {
        Ok(base)
    } else {
        oracle::restrict(base, region.clone())
    }
}
