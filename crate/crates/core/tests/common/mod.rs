#![allow(dead_code)]

use std::sync::Arc;

use dyadint_core::expr;
use dyadint_core::geometry::DyadicBox;
use dyadint_core::oracle::{ExprOracle, Oracle, Region};
use proptest::prelude::*;

/// Random expression source text in `dim` variables, free of domain errors
/// on bounded boxes.
pub fn expr_source(dim: usize) -> impl Strategy<Value = String> {
    let var = (1..=dim).prop_map(|j| format!("x{j}"));
    let constant = prop_oneof![
        Just("0.5".to_string()),
        Just("2".to_string()),
        Just("1/3".to_string()),
        Just("0.1".to_string()),
        Just("3".to_string()),
    ];
    let leaf = prop_oneof![3 => var, 1 => constant];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("min({a}, {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("max({a}, {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} / (1 + ({b})^2))")),
            inner.clone().prop_map(|a| format!("abs({a})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(min({a}, 2))")),
            inner.clone().prop_map(|a| format!("sqrt(({a})^2 + 1)")),
            inner.clone().prop_map(|a| format!("({a})^2")),
            inner.prop_map(|a| format!("-({a})^3")),
        ]
    })
}

/// Random box with endpoints on the 1/8 grid inside `[-2, 2]^dim`.
pub fn dyadic_box(dim: usize) -> impl Strategy<Value = DyadicBox> {
    proptest::collection::vec((-16i32..16, 1i32..16), dim).prop_map(|axes| {
        let bounds: Vec<(f64, f64)> = axes
            .iter()
            .map(|&(a, w)| {
                let lo = a as f64 / 8.0;
                (lo, (lo + w as f64 / 8.0).min(2.0))
            })
            .collect();
        DyadicBox::semiclosed(&bounds).unwrap()
    })
}

pub fn oracle(src: &str, support: &str) -> Oracle {
    let b = DyadicBox::parse(support).unwrap();
    Arc::new(ExprOracle::new(expr::parse(src, b.dim()).unwrap(), b).unwrap())
}

pub fn oracle_on(src: &str, support: DyadicBox) -> Oracle {
    Arc::new(ExprOracle::new(expr::parse(src, support.dim()).unwrap(), support).unwrap())
}

pub fn region(bbox: &str, constraints: &[(&str, bool)]) -> Region {
    Region::parse(DyadicBox::parse(bbox).unwrap(), constraints).unwrap()
}

pub fn disk() -> Region {
    region("[-1,1]x[-1,1]", &[("x1^2 + x2^2 - 1", false)])
}
