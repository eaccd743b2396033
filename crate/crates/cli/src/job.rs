use std::sync::Arc;

use dyadint_core::bridge::{equivalence_report, Partition, PartitionSchedule};
use dyadint_core::calculus::{fubini_check, newton_leibniz_check, FubiniDomain};
use dyadint_core::expr::{self, Expr};
use dyadint_core::geometry::DyadicBox;
use dyadint_core::integrator::{self, IntegrateOptions, Strategy};
use dyadint_core::oracle::{parse_pipeline, ExprOracle, Oracle, Region};
use dyadint_core::{Error, Result};
use serde_json::{json, Value};

use crate::args::{Budget, Command, Integrand, StrategyArg};
use crate::render::{self, Report};

pub const SCHEMA: &str = "dyadint/1";

/// A fully validated command.
pub enum JobSpec {
    Integrate { oracle: Oracle, opts: IntegrateOptions },
    Measure { region: Region, opts: IntegrateOptions },
    VerySmall { region: Region, opts: IntegrateOptions },
    Fubini { f: Expr, domain: FubiniDomain, swap: bool, opts: IntegrateOptions },
    NlCheck { g: Expr, antiderivative: Expr, a: f64, b: f64, opts: IntegrateOptions },
    Equivalence { oracle: Oracle, k_max: u32, schedule: PartitionSchedule, seed: u64 },
}

/// Invalid command lines that clap cannot catch.
#[derive(Debug)]
pub struct Usage(pub String);

pub enum Failure {
    Usage(Usage),
    Run(Error),
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Run(e.into())
    }
}

fn usage<T>(message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(Usage(message.into())))
}

fn load_region(arg: &str) -> Result<Region> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::Invalid(format!("cannot read `{arg}`: {e}")))?
    };
    Region::from_json(&text)
}

fn load_partition(path: &str) -> Result<Partition> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read `{path}`: {e}")))?;
    Partition::from_json(&text)
}

fn check_dim(declared: Option<usize>, actual: usize) -> Result<()> {
    match declared {
        Some(d) if d != actual => Err(Error::Invalid(format!("--dim {d} does not match dimension {actual}"))),
        _ => Ok(()),
    }
}

fn options(dim: usize, budget: &Budget) -> IntegrateOptions {
    let mut opts = IntegrateOptions::new(dim).strategy(match budget.strategy {
        StrategyArg::Uniform => Strategy::Uniform,
        StrategyArg::Adaptive => Strategy::Adaptive,
    });
    if let Some(eps) = budget.epsilon {
        opts = opts.epsilon(eps);
    }
    if let Some(k) = budget.k_max {
        opts = opts.k_max(k);
    }
    opts
}

fn integrand(i: &Integrand) -> Result<Oracle, Failure> {
    if let Some(p) = &i.oracle {
        let o = parse_pipeline(p, &load_region)?;
        check_dim(i.dim, o.dim())?;
        return Ok(o);
    }
    let (Some(e), Some(s)) = (&i.expr, &i.support) else {
        return usage("give --expr with --support, or --oracle");
    };
    let support = DyadicBox::parse(s)?;
    let dim = i.dim.unwrap_or(support.dim());
    check_dim(Some(dim), support.dim())?;
    let e = expr::parse(e, dim)?;
    Ok(Arc::new(ExprOracle::new(e, support)?))
}

impl JobSpec {
    pub fn from_command(cmd: &Command) -> Result<JobSpec, Failure> {
        Ok(match cmd {
            Command::Integrate { integrand: i, budget, step_function, detect_stall } => {
                let oracle = integrand(i)?;
                let mut opts = options(oracle.dim(), budget);
                opts.keep_step_function = *step_function;
                opts.detect_stall = *detect_stall;
                JobSpec::Integrate { oracle, opts }
            }
            Command::Measure { region, dim, budget, detect_stall } => {
                let region = load_region(region)?;
                check_dim(*dim, region.dim())?;
                let mut opts = options(region.dim(), budget);
                opts.detect_stall = *detect_stall;
                JobSpec::Measure { region, opts }
            }
            Command::VerySmall { region, dim, budget } => {
                let region = load_region(region)?;
                check_dim(*dim, region.dim())?;
                let opts = options(region.dim(), budget);
                JobSpec::VerySmall { region, opts }
            }
            Command::FubiniCheck { dim, expr: src, support, region, outer, lower, upper, swap, budget } => {
                let domain = match (support, region, outer) {
                    (Some(s), None, None) => FubiniDomain::Box(DyadicBox::parse(s)?),
                    (None, Some(r), None) => FubiniDomain::Region(load_region(r)?),
                    (None, None, Some(o)) => {
                        let outer = DyadicBox::parse(o)?;
                        let m = outer.dim() + 1;
                        let (Some(u), Some(v)) = (lower, upper) else {
                            return usage("--outer needs --lower and --upper");
                        };
                        FubiniDomain::Graph { outer, u: expr::parse(u, m)?, v: expr::parse(v, m)? }
                    }
                    _ => {
                        return usage("give one of --support, --region, or --outer with --lower and --upper")
                    }
                };
                let m = match &domain {
                    FubiniDomain::Box(b) => b.dim(),
                    FubiniDomain::Region(r) => r.dim(),
                    FubiniDomain::Graph { outer, .. } => outer.dim() + 1,
                };
                check_dim(*dim, m)?;
                JobSpec::Fubini { f: expr::parse(src, m)?, domain, swap: *swap, opts: options(m, budget) }
            }
            Command::NlCheck { g, antiderivative, a, b, budget } => JobSpec::NlCheck {
                g: expr::parse(g, 1)?,
                antiderivative: expr::parse(antiderivative, 1)?,
                a: *a,
                b: *b,
                opts: options(1, budget),
            },
            Command::EquivalenceReport { integrand: i, k_max, seed, finest, partition } => {
                let oracle = integrand(i)?;
                let dim = oracle.dim();
                let k_max = k_max.unwrap_or((20 / dim as u32).clamp(1, 14));
                if dim * k_max as usize > 24 {
                    return Err(Error::Invalid(format!(
                        "uniform level {k_max} in dimension {dim} needs more than 2^24 cubes"
                    ))
                    .into());
                }
                let support = oracle.support();
                if support.is_empty() {
                    return Err(Error::Precondition("the integrand has empty support".into()).into());
                }
                let rect: Vec<(f64, f64)> =
                    support.axes().iter().map(|a| (a.lo.to_f64_down(), a.hi.to_f64_up())).collect();
                let mut schedule = PartitionSchedule::standard(&rect, finest.unwrap_or(k_max), *seed)?;
                for path in partition {
                    schedule.partitions.push((path.clone(), load_partition(path)?));
                }
                JobSpec::Equivalence { oracle, k_max, schedule, seed: *seed }
            }
        })
    }

    pub fn command(&self) -> &'static str {
        match self {
            JobSpec::Integrate { .. } => "integrate",
            JobSpec::Measure { .. } => "measure",
            JobSpec::VerySmall { .. } => "very-small",
            JobSpec::Fubini { .. } => "fubini-check",
            JobSpec::NlCheck { .. } => "nl-check",
            JobSpec::Equivalence { .. } => "equivalence-report",
        }
    }

    pub fn run(&self) -> Result<Report> {
        let command = self.command();
        let envelope = |input: Value, report: Value| json!({ "schema": SCHEMA, "command": command, "input": input, "report": report });
        Ok(match self {
            JobSpec::Integrate { oracle, opts } => {
                let r = integrator::integrate(oracle.as_ref(), opts)?;
                let input =
                    json!({ "integrand": oracle.describe(), "support": oracle.support().to_string() });
                Report {
                    exit: if r.verdict.is_integrable() { 0 } else { 2 },
                    json: envelope(input, to_value(&r)),
                    table: render::rows_table(None, &r.rows),
                    summary: render::verdict_summary(&r),
                }
            }
            JobSpec::Measure { region, opts } => {
                let r = integrator::jordan_measure(region, opts)?;
                let input = json!({ "region": serde_json::from_str::<Value>(&region.to_json()).expect("valid json") });
                Report {
                    exit: if r.verdict.is_integrable() { 0 } else { 2 },
                    json: envelope(input, to_value(&r)),
                    table: render::rows_table(None, &r.rows),
                    summary: render::verdict_summary(&r),
                }
            }
            JobSpec::VerySmall { region, opts } => {
                let r = integrator::is_very_small(region, opts)?;
                let input = json!({ "region": serde_json::from_str::<Value>(&region.to_json()).expect("valid json") });
                Report {
                    exit: if r.very_small { 0 } else { 2 },
                    json: envelope(input, to_value(&r)),
                    table: render::rows_table(None, &r.rows),
                    summary: vec![
                        format!("very small: {}", r.very_small),
                        match r.witness_k {
                            Some(k) => format!("witness level: {k}, cover volume {}", r.cover_volume),
                            None => format!("smallest cover volume found: {}", r.cover_volume),
                        },
                    ],
                }
            }
            JobSpec::Fubini { f, domain, swap, opts } => {
                let r = fubini_check(f, domain, opts, *swap)?;
                let input = json!({ "expr": f.to_string(), "domain": describe_domain(domain) });
                let mut table = render::rows_table(Some("direct"), &r.direct.rows);
                table.extend(render::rows_table(Some("repeated"), &r.repeated.rows).into_iter().skip(1));
                if let Some(s) = &r.swapped {
                    table.extend(render::rows_table(Some("swapped"), &s.rows).into_iter().skip(1));
                }
                let mut summary = vec![
                    format!("direct:   {}", render::verdict_line(&r.direct)),
                    format!("repeated: {}", render::verdict_line(&r.repeated)),
                ];
                if let Some(s) = &r.swapped {
                    summary.push(format!("swapped:  {}", render::verdict_line(s)));
                }
                summary.push(format!("overlap: {}", r.overlap && r.swapped_overlap != Some(false)));
                if r.critical {
                    summary.push("CRITICAL: integrable enclosures do not intersect".into());
                }
                Report {
                    exit: if r.critical {
                        1
                    } else if r.overlap && r.swapped_overlap != Some(false) {
                        0
                    } else {
                        2
                    },
                    json: envelope(input, to_value(&r)),
                    table,
                    summary,
                }
            }
            JobSpec::NlCheck { g, antiderivative, a, b, opts } => {
                let r = newton_leibniz_check(g, antiderivative, *a, *b, opts)?;
                let input = json!({ "g": g.to_string(), "F": antiderivative.to_string(), "a": a, "b": b });
                let mut summary = vec![
                    format!("integral: {}", render::verdict_line(&r.integral)),
                    format!("F(b) - F(a) = {} in [{}, {}]", r.nl_value, r.nl_enclosure[0], r.nl_enclosure[1]),
                    format!("contained: {}", r.contained),
                ];
                summary.extend(r.warnings.iter().map(|w| format!("warning: {w}")));
                Report {
                    exit: if r.contained { 0 } else { 2 },
                    json: envelope(input, to_value(&r)),
                    table: render::rows_table(None, &r.integral.rows),
                    summary,
                }
            }
            JobSpec::Equivalence { oracle, k_max, schedule, seed } => {
                let r = equivalence_report(oracle.as_ref(), *k_max, schedule)?;
                let input = json!({
                    "integrand": oracle.describe(),
                    "support": oracle.support().to_string(),
                    "seed": seed,
                });
                let ok = r.overlap.all() && r.upper_agreement;
                Report {
                    exit: if ok { 0 } else { 2 },
                    table: render::equivalence_table(&r),
                    summary: vec![
                        format!(
                            "pairwise overlap: semiclosed/closed {}, semiclosed/classical {}, closed/classical {}",
                            r.overlap.semiclosed_closed, r.overlap.semiclosed_classical, r.overlap.closed_classical
                        ),
                        format!(
                            "|closed U - semiclosed U| = {} against dyadic gap {} (agreement: {})",
                            r.upper_difference, r.dyadic_gap, r.upper_agreement
                        ),
                    ],
                    json: envelope(input, to_value(&r)),
                }
            }
        })
    }
}

fn describe_domain(d: &FubiniDomain) -> Value {
    match d {
        FubiniDomain::Box(b) => json!({ "box": b.to_string() }),
        FubiniDomain::Region(r) => {
            json!({ "region": serde_json::from_str::<Value>(&r.to_json()).expect("valid json") })
        }
        FubiniDomain::Graph { outer, u, v } => {
            json!({ "graph": { "outer": outer.to_string(), "lower": u.to_string(), "upper": v.to_string() } })
        }
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}
