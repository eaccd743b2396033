use crate::interval::{add_up, mul_up};

const U: f64 = 1.0 / 9_007_199_254_740_992.0;

/// Neumaier compensated summation with a rigorous error bound.
///
/// The bound is zero when every partial sum was exact.
#[derive(Clone, Debug)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
    abs_sum: f64,
    n: u64,
    exact: bool,
}

impl Default for Accumulator {
    fn default() -> Self {
        Accumulator { sum: 0.0, comp: 0.0, abs_sum: 0.0, n: 0, exact: true }
    }
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        let e = if self.sum.abs() >= x.abs() { (self.sum - t) + x } else { (x - t) + self.sum };
        if e != 0.0 {
            self.exact = false;
        }
        self.comp += e;
        self.sum = t;
        self.abs_sum = add_up(self.abs_sum, x.abs());
        self.n += 1;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Bound on `|value() - exact sum|`.
    pub fn pad(&self) -> f64 {
        if self.exact {
            return 0.0;
        }
        let first = mul_up(3.0 * U, self.value().abs());
        let second = mul_up(mul_up(4.0 * (self.n as f64 + 2.0), U * U), self.abs_sum);
        add_up(first, second)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use crate::geometry::DyadicRational;

    fn exact_sum(xs: &[f64]) -> DyadicRational {
        xs.iter().fold(DyadicRational::zero(), |acc, &x| &acc + &DyadicRational::from_f64(x).unwrap())
    }

    #[test]
    fn dyadic_terms_sum_exactly() {
        let mut acc = Accumulator::new();
        for n in 0..1024 {
            acc.add(n as f64 / 1024.0);
        }
        assert!(acc.is_exact());
        assert_eq!(acc.value(), 511.5);
        assert_eq!(acc.pad(), 0.0);
    }

    #[test]
    fn cancellation_is_recovered() {
        let mut acc = Accumulator::new();
        for x in [1e100, 1.0, -1e100] {
            acc.add(x);
        }
        assert_eq!(acc.value(), 1.0);
    }

    proptest! {
        #[test]
        fn pad_bounds_the_error(xs in proptest::collection::vec(-1e6f64..1e6, 1..200)) {
            let mut acc = Accumulator::new();
            for &x in &xs {
                acc.add(x);
            }
            let exact = exact_sum(&xs);
            let v = DyadicRational::from_f64(acc.value()).unwrap();
            let pad = DyadicRational::from_f64(acc.pad()).unwrap();
            let err = &v - &exact;
            let err = if err.is_negative() { -err } else { err };
            prop_assert!(err <= pad, "error {} exceeds pad {}", err, pad);
        }
    }
}
