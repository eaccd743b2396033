//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use dyadint_core::geometry::DyadicBox;
use dyadint_core::oracle::{ExprOracle, Oracle, Region};

pub fn expr_oracle(src: &str, support: &str) -> Oracle {
    let support = DyadicBox::parse(support).expect("valid box");
    Arc::new(ExprOracle::parse(src, support).expect("valid expression"))
}

pub fn disk() -> Region {
    Region::parse(DyadicBox::parse("[-1,1]x[-1,1]").expect("valid box"), &[("x1^2 + x2^2 - 1", false)])
        .expect("valid region")
}
