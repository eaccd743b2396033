//! Closed intervals of doubles with outward rounding.
//!
//! Round-to-nearest is the only mode Rust exposes, so every operation checks
//! whether its result was exact (via error-free transformations: two-sum for
//! addition, fused multiply-add residuals for multiplication, division and
//! square root) and steps one ulp outward only when it was not. Inexact or
//! libm-backed transcendentals are always widened.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Below this magnitude the fma residual may itself underflow.
const TINY: f64 = 1e-290;

/// A closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    if two_sum_err(a, b, s) < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return s;
    }
    if two_sum_err(a, b, s) > 0.0 {
        s.next_up()
    } else {
        s
    }
}

pub(crate) fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

pub(crate) fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bp = s - a;
    let ap = s - bp;
    (a - ap) + (b - bp)
}

/// Sign of `exact(a*b) - fl(a*b)`: -1, 0 or 1; `None` when it cannot be
/// decided reliably.
fn mul_residual_sign(a: f64, b: f64, p: f64) -> Option<i8> {
    if a == 0.0 || b == 0.0 {
        return Some(0);
    }
    if !p.is_finite() || p.abs() < TINY {
        return None;
    }
    let r = a.mul_add(b, -p);
    Some(sign(r))
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    match mul_residual_sign(a, b, p) {
        Some(s) if s >= 0 => p,
        _ if p.is_nan() => p,
        _ => p.next_down(),
    }
}

pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    match mul_residual_sign(a, b, p) {
        Some(s) if s <= 0 => p,
        _ if p.is_nan() => p,
        _ => p.next_up(),
    }
}

/// Sign of `exact(a/b) - fl(a/b)`.
fn div_residual_sign(a: f64, b: f64, q: f64) -> Option<i8> {
    if a == 0.0 {
        return Some(0);
    }
    if !q.is_finite() || q.abs() < TINY || b.abs() < TINY {
        return None;
    }
    // a - q*b, exact for non-extreme operands.
    let r = (-q).mul_add(b, a);
    Some(sign(r) * sign(b))
}

pub(crate) fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    match div_residual_sign(a, b, q) {
        Some(s) if s >= 0 => q,
        _ if q.is_nan() => q,
        _ => q.next_down(),
    }
}

pub(crate) fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    match div_residual_sign(a, b, q) {
        Some(s) if s <= 0 => q,
        _ if q.is_nan() => q,
        _ => q.next_up(),
    }
}

fn sqrt_residual_sign(a: f64, s: f64) -> Option<i8> {
    if a == 0.0 {
        return Some(0);
    }
    if !s.is_finite() || s < TINY {
        return None;
    }
    Some(sign((-s).mul_add(s, a)))
}

pub(crate) fn sqrt_down(a: f64) -> f64 {
    let s = a.sqrt();
    match sqrt_residual_sign(a, s) {
        Some(r) if r >= 0 => s,
        _ => s.next_down().max(0.0),
    }
}

pub(crate) fn sqrt_up(a: f64) -> f64 {
    let s = a.sqrt();
    match sqrt_residual_sign(a, s) {
        Some(r) if r <= 0 => s,
        _ => s.next_up(),
    }
}

/// Two ulps outward; libm results are within one ulp on the supported targets.
fn libm_down(x: f64) -> f64 {
    x.next_down().next_down()
}

fn libm_up(x: f64) -> f64 {
    x.next_up().next_up()
}

fn pow_down_nonneg(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, _| mul_down(acc, x))
}

fn pow_up_nonneg(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, _| mul_up(acc, x))
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Greater), "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// The tightest interval enclosing `x`, widened one ulp each way when the
    /// double is only the nearest approximation of some real.
    pub fn around(x: f64) -> Self {
        Interval { lo: x.next_down(), hi: x.next_up() }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    pub fn width(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    pub fn mid(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn hull_zero(&self) -> Interval {
        self.hull(&Interval::ZERO)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value over the interval.
    pub fn mig(&self) -> f64 {
        if self.lo <= 0.0 && 0.0 <= self.hi {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn add(&self, rhs: &Interval) -> Interval {
        Interval { lo: add_down(self.lo, rhs.lo), hi: add_up(self.hi, rhs.hi) }
    }

    pub fn sub(&self, rhs: &Interval) -> Interval {
        Interval { lo: sub_down(self.lo, rhs.hi), hi: sub_up(self.hi, rhs.lo) }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(&self, rhs: &Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = mul_down(a, c).min(mul_down(a, d)).min(mul_down(b, c)).min(mul_down(b, d));
        let hi = mul_up(a, c).max(mul_up(a, d)).max(mul_up(b, c)).max(mul_up(b, d));
        Interval { lo, hi }
    }

    pub fn scale(&self, c: f64) -> Interval {
        self.mul(&Interval::point(c))
    }

    /// `None` when the divisor contains zero.
    pub fn div(&self, rhs: &Interval) -> Option<Interval> {
        if rhs.lo <= 0.0 && 0.0 <= rhs.hi {
            return None;
        }
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = div_down(a, c).min(div_down(a, d)).min(div_down(b, c)).min(div_down(b, d));
        let hi = div_up(a, c).max(div_up(a, d)).max(div_up(b, c)).max(div_up(b, d));
        Some(Interval { lo, hi })
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval { lo: 0.0, hi: self.mag() }
        }
    }

    pub fn min(&self, rhs: &Interval) -> Interval {
        Interval { lo: self.lo.min(rhs.lo), hi: self.hi.min(rhs.hi) }
    }

    pub fn max(&self, rhs: &Interval) -> Interval {
        Interval { lo: self.lo.max(rhs.lo), hi: self.hi.max(rhs.hi) }
    }

    /// Integer power; even exponents never go negative.
    pub fn powi(&self, n: u32) -> Interval {
        if n == 0 {
            return Interval::ONE;
        }
        if n % 2 == 0 {
            let lo_mag = self.mig();
            let hi_mag = self.mag();
            Interval { lo: pow_down_nonneg(lo_mag, n), hi: pow_up_nonneg(hi_mag, n) }
        } else {
            let odd_down = |x: f64| {
                if x >= 0.0 {
                    pow_down_nonneg(x, n)
                } else {
                    -pow_up_nonneg(-x, n)
                }
            };
            let odd_up = |x: f64| {
                if x >= 0.0 {
                    pow_up_nonneg(x, n)
                } else {
                    -pow_down_nonneg(-x, n)
                }
            };
            Interval { lo: odd_down(self.lo), hi: odd_up(self.hi) }
        }
    }

    /// `None` when the whole interval is negative; a straddling argument is
    /// clamped to `[0, hi]`.
    pub fn sqrt(&self) -> Option<Interval> {
        if self.hi < 0.0 {
            return None;
        }
        let lo = self.lo.max(0.0);
        Some(Interval { lo: sqrt_down(lo), hi: sqrt_up(self.hi) })
    }

    pub fn exp(&self) -> Interval {
        let down = |x: f64| {
            if x == 0.0 {
                1.0
            } else {
                libm_down(x.exp()).max(0.0)
            }
        };
        let up = |x: f64| if x == 0.0 { 1.0 } else { libm_up(x.exp()) };
        Interval { lo: down(self.lo), hi: up(self.hi) }
    }

    pub fn sin(&self) -> Interval {
        // Maxima at pi/2 + 2k*pi, minima at -pi/2 + 2k*pi.
        trig_range(self, f64::sin, std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2)
    }

    pub fn cos(&self) -> Interval {
        // Maxima at 2k*pi, minima at pi + 2k*pi.
        trig_range(self, f64::cos, 0.0, std::f64::consts::PI)
    }
}

/// Whether `phase + 2k*pi` may lie in `[lo, hi]` for some integer k. Errs on
/// the side of `true`, which only loosens the enclosure.
fn hits_critical_point(lo: f64, hi: f64, phase: f64) -> bool {
    let tau = std::f64::consts::TAU;
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    let k = ((lo - slack - phase) / tau).ceil();
    phase + k * tau <= hi + slack
}

fn trig_range(x: &Interval, f: fn(f64) -> f64, max_at: f64, min_at: f64) -> Interval {
    if !x.is_finite() || x.hi - x.lo >= std::f64::consts::TAU {
        return Interval { lo: -1.0, hi: 1.0 };
    }
    if x.lo == 0.0 && x.hi == 0.0 {
        let v = f(0.0);
        return Interval::point(v);
    }
    let a = f(x.lo);
    let b = f(x.hi);
    let hi = if hits_critical_point(x.lo, x.hi, max_at) { 1.0 } else { libm_up(a.max(b)).min(1.0) };
    let lo = if hits_critical_point(x.lo, x.hi, min_at) { -1.0 } else { libm_down(a.min(b)).max(-1.0) };
    Interval { lo, hi }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval::new(v[0], v[1])
    }
}
