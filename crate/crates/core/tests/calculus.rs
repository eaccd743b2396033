mod common;

use std::sync::Arc;
use std::time::Instant;

use dyadint_core::calculus::{
    fubini_check, newton_leibniz_check, repeated_integral, FubiniDomain, InnerOptions, ParameterIntegral,
    RepeatedIntegralPlan,
};
use dyadint_core::expr::parse;
use dyadint_core::geometry::{DyadicBox, DyadicCube};
use dyadint_core::integrator::{integrate, IntegrateOptions};
use dyadint_core::oracle::{self, BoundOracle, Oracle};
use dyadint_core::Error;

fn e1(s: &str) -> dyadint_core::expr::Expr {
    parse(s, 1).unwrap()
}

fn e2(s: &str) -> dyadint_core::expr::Expr {
    parse(s, 2).unwrap()
}

fn unit(dim: usize) -> DyadicBox {
    DyadicBox::semiclosed(&vec![(0.0, 1.0); dim]).unwrap()
}

#[test]
fn nl_golden_examples() {
    let opts = IntegrateOptions::new(1).epsilon(1e-6);
    for (g, f, a, b) in
        [("2*x1", "x1^2", 0.0, 1.0), ("cos(x1)", "sin(x1)", 0.0, 1.5), ("1", "x1+5", 0.0, 1.0)]
    {
        let r = newton_leibniz_check(&e1(g), &e1(f), a, b, &opts).unwrap();
        assert!(r.contained, "{g} / {f}: {:?} vs {}", r.integral.enclosure(), r.nl_value);
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    }
}

#[test]
fn nl_flags_wrong_antiderivative() {
    let opts = IntegrateOptions::new(1).epsilon(1e-6);
    let r = newton_leibniz_check(&e1("2*x1"), &e1("x1^3"), 0.0, 2.0, &opts).unwrap();
    assert!(!r.contained);
    assert!(!r.warnings.is_empty());
}

#[test]
fn nl_rejects_reversed_limits() {
    let opts = IntegrateOptions::new(1);
    let err = newton_leibniz_check(&e1("1"), &e1("x1"), 1.0, 0.0, &opts).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

#[test]
fn triangle_parameter_integral() {
    let outer = DyadicBox::closed(&[(0.0, 1.0)]).unwrap();
    let p = ParameterIntegral::graph(e2("1"), e2("0"), e2("x1"), outer, InnerOptions::default()).unwrap();
    let r = integrate(&p, &IntegrateOptions::new(1).epsilon(1e-4)).unwrap();
    assert!(r.enclosure().contains(0.5), "{:?}", r.enclosure());
}

#[test]
fn constant_slice_parameter_integral() {
    let outer = DyadicBox::closed(&[(0.0, 1.0)]).unwrap();
    let p = ParameterIntegral::graph(e2("x2"), e2("0"), e2("1"), outer, InnerOptions::default()).unwrap();
    for (level, corner) in [(0u32, 0i64), (3, 5), (6, 63)] {
        let b = p.bounds(&DyadicCube::new(level, vec![corner]).unwrap()).unwrap();
        assert!(b.contains(0.5), "{b:?}");
        assert!(b.width() < 1e-4, "{b:?}");
    }
}

#[test]
fn reversed_limits_are_rejected() {
    let outer = DyadicBox::closed(&[(0.0, 1.0)]).unwrap();
    let err =
        ParameterIntegral::graph(e2("1"), e2("1"), e2("0"), outer, InnerOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

#[test]
fn repeated_product_of_indicators() {
    let o: Oracle = oracle::from_expr(e2("1"), unit(2)).unwrap();
    let plan = RepeatedIntegralPlan::of_oracle(o, IntegrateOptions::new(1).epsilon(1e-6)).unwrap();
    let r = repeated_integral(&plan).unwrap();
    assert!(r.enclosure().contains(1.0));
    assert!(r.verdict.is_integrable());
}

#[test]
fn repeated_xy() {
    let o = common::oracle_on("x1*x2", unit(2));
    let plan = RepeatedIntegralPlan::of_oracle(o, IntegrateOptions::new(1).epsilon(1e-3)).unwrap();
    let r = repeated_integral(&plan).unwrap();
    assert!(r.enclosure().contains(0.25), "{:?}", r.enclosure());
}

#[test]
fn fubini_examples() {
    let opts = IntegrateOptions::new(2).epsilon(1e-3).k_max(10);
    for (f, want) in [("x1*x2", 0.25), ("x1+x2", 1.0)] {
        let r = fubini_check(&e2(f), &FubiniDomain::Box(unit(2)), &opts, true).unwrap();
        assert!(r.direct.enclosure().contains(want), "{f} {:?}", r.direct.enclosure());
        assert!(r.repeated.enclosure().contains(want), "{f} {:?}", r.repeated.enclosure());
        assert!(r.overlap && r.swapped_overlap == Some(true) && !r.critical);
    }
}

#[test]
fn fubini_disk_by_graph_and_region() {
    let t = Instant::now();
    let opts = IntegrateOptions::new(2).epsilon(0.05).k_max(9);
    let graph = FubiniDomain::Graph {
        outer: DyadicBox::closed(&[(-1.0, 1.0)]).unwrap(),
        u: e2("-sqrt(1 - x1^2)"),
        v: e2("sqrt(1 - x1^2)"),
    };
    let region = FubiniDomain::Region(common::disk());
    for d in [graph, region] {
        let r = fubini_check(&e2("1"), &d, &opts, true).unwrap();
        let pi = std::f64::consts::PI;
        assert!(r.direct.enclosure().contains(pi), "{:?}", r.direct.enclosure());
        assert!(r.repeated.enclosure().contains(pi), "{:?}", r.repeated.enclosure());
        assert!(r.overlap && r.swapped_overlap == Some(true));
    }
    eprintln!("disk fubini: {:?}", t.elapsed());
}

#[test]
fn triple_integral_over_prism() {
    // int over [0,1]^2 of int_0^{x1 + x2} 1 dz = 1
    let outer = DyadicBox::closed(&[(0.0, 1.0), (0.0, 1.0)]).unwrap();
    let p = ParameterIntegral::graph(
        parse("1", 3).unwrap(),
        parse("0", 3).unwrap(),
        parse("x1 + x2", 3).unwrap(),
        outer,
        InnerOptions::default(),
    )
    .unwrap();
    let r = integrate(&p, &IntegrateOptions::new(2).epsilon(1e-3).k_max(9)).unwrap();
    assert!(r.enclosure().contains(1.0), "{:?}", r.enclosure());
}

#[test]
fn parameter_integral_is_shareable() {
    let outer = DyadicBox::closed(&[(0.0, 1.0)]).unwrap();
    let p = ParameterIntegral::graph(e2("x2"), e2("0"), e2("x1"), outer, InnerOptions::default()).unwrap();
    let o: Oracle = Arc::new(p);
    let r = integrate(o.as_ref(), &IntegrateOptions::new(1).epsilon(1e-3)).unwrap();
    assert!(r.enclosure().contains(1.0 / 6.0), "{:?}", r.enclosure());
}
