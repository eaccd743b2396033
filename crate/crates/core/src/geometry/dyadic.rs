//! Exact dyadic rationals `n / 2^e`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::GeometryError;

/// A rational number whose denominator is a power of two.
///
/// Kept in canonical form: when the exponent is positive the numerator is
/// odd, and zero is always `0 / 2^0`. Addition, subtraction and
/// multiplication are exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: BigInt,
    exponent: u32,
}

impl DyadicRational {
    pub fn new(numerator: impl Into<BigInt>, exponent: u32) -> Self {
        let mut value = DyadicRational { numerator: numerator.into(), exponent };
        value.normalize();
        value
    }

    pub fn zero() -> Self {
        DyadicRational::new(0, 0)
    }

    pub fn one() -> Self {
        DyadicRational::new(1, 0)
    }

    pub fn from_integer(n: i64) -> Self {
        DyadicRational::new(n, 0)
    }

    /// `2^-e`.
    pub fn pow2_neg(e: u32) -> Self {
        DyadicRational::new(1, e)
    }

    /// Exact conversion; every finite double is a dyadic rational.
    pub fn from_f64(x: f64) -> Result<Self, GeometryError> {
        if !x.is_finite() {
            return Err(GeometryError::NonFinite(x));
        }
        if x == 0.0 {
            return Ok(DyadicRational::zero());
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let fraction = bits & ((1u64 << 52) - 1);
        let (mantissa, exp2) =
            if biased == 0 { (fraction, -1074) } else { (fraction | (1u64 << 52), biased - 1075) };
        let mut numerator = BigInt::from(mantissa);
        if negative {
            numerator = -numerator;
        }
        Ok(if exp2 >= 0 {
            DyadicRational::new(numerator << exp2 as usize, 0)
        } else {
            DyadicRational::new(numerator, (-exp2) as u32)
        })
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.numerator.is_negative()
    }

    fn normalize(&mut self) {
        if self.numerator.is_zero() {
            self.exponent = 0;
            return;
        }
        let twos = self.numerator.trailing_zeros().unwrap_or(0);
        let shift = twos.min(u64::from(self.exponent)) as u32;
        if shift > 0 {
            self.numerator >>= shift as usize;
            self.exponent -= shift;
        }
    }

    /// Numerator rescaled to exponent `e >= self.exponent`.
    fn scaled_numerator(&self, e: u32) -> BigInt {
        &self.numerator << (e - self.exponent) as usize
    }

    /// `floor(self * 2^k)`.
    pub fn floor_scaled(&self, k: u32) -> BigInt {
        if k >= self.exponent {
            &self.numerator << (k - self.exponent) as usize
        } else {
            let denom = BigInt::one() << (self.exponent - k) as usize;
            self.numerator.div_floor(&denom)
        }
    }

    /// `ceil(self * 2^k)`.
    pub fn ceil_scaled(&self, k: u32) -> BigInt {
        -(-self).floor_scaled(k)
    }

    /// Multiply by `2^shift` (exact).
    pub fn shl(&self, shift: u32) -> Self {
        if shift <= self.exponent {
            DyadicRational::new(self.numerator.clone(), self.exponent - shift)
        } else {
            DyadicRational::new(&self.numerator << (shift - self.exponent) as usize, 0)
        }
    }

    /// Nearest double (ties to even).
    pub fn to_f64(&self) -> f64 {
        match self.to_f64_exact() {
            Some(x) => x,
            None => {
                // Correct rounding via the decimal string path; rare (wide numerators).
                let text = self.to_decimal_string();
                text.parse::<f64>().unwrap_or(f64::NAN)
            }
        }
    }

    /// The double equal to this value, if one exists.
    pub fn to_f64_exact(&self) -> Option<f64> {
        if self.numerator.is_zero() {
            return Some(0.0);
        }
        let bits = self.numerator.bits();
        if bits > 53 {
            return None;
        }
        let n = self.numerator.to_i64()? as f64;
        let e = self.exponent as i32;
        if e > 1074 {
            return None;
        }
        let x = if e <= 1022 { n * 2f64.powi(-e) } else { n * 2f64.powi(-1022) * 2f64.powi(-(e - 1022)) };
        // Guard against underflow losing bits.
        if DyadicRational::from_f64(x).ok()? == *self {
            Some(x)
        } else {
            None
        }
    }

    /// Largest double `<= self`.
    pub fn to_f64_down(&self) -> f64 {
        let x = self.to_f64();
        match DyadicRational::from_f64(x) {
            Ok(d) if d > *self => x.next_down(),
            _ => x,
        }
    }

    /// Smallest double `>= self`.
    pub fn to_f64_up(&self) -> f64 {
        let x = self.to_f64();
        match DyadicRational::from_f64(x) {
            Ok(d) if d < *self => x.next_up(),
            _ => x,
        }
    }

    /// Exact decimal expansion (dyadic rationals always terminate in base 10).
    pub fn to_decimal_string(&self) -> String {
        if self.exponent == 0 {
            return self.numerator.to_string();
        }
        let five = BigInt::from(5u32);
        let scaled = self.numerator.abs() * num_traits::pow(five, self.exponent as usize);
        let digits = scaled.to_string();
        let e = self.exponent as usize;
        let padded = if digits.len() <= e {
            format!("{}{}", "0".repeat(e - digits.len() + 1), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = padded.split_at(padded.len() - e);
        let frac_part = frac_part.trim_end_matches('0');
        let sign = if self.numerator.is_negative() { "-" } else { "" };
        if frac_part.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }

    /// Parse a decimal (`0.375`, `-12`, `1.5e-3`) or `p/2^e` literal. Decimals
    /// must denote a dyadic rational exactly.
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let bad = || GeometryError::NotDyadic(text.to_string());
        let s = text.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
            let den = den.trim();
            let e = if let Some(exp) = den.strip_prefix("2^") {
                exp.trim().parse::<u32>().map_err(|_| bad())?
            } else {
                let d = BigInt::from_str(den).map_err(|_| bad())?;
                if d.sign() != Sign::Plus || d.trailing_zeros() != Some(d.bits() - 1) {
                    return Err(bad());
                }
                (d.bits() - 1) as u32
            };
            return Ok(DyadicRational::new(num, e));
        }
        let (mantissa, exp10) = split_decimal(s).ok_or_else(bad)?;
        // value = mantissa * 10^exp10
        if exp10 >= 0 {
            let m = mantissa * num_traits::pow(BigInt::from(10u32), exp10 as usize);
            return Ok(DyadicRational::new(m, 0));
        }
        let d = (-exp10) as usize;
        let five_d = num_traits::pow(BigInt::from(5u32), d);
        let (q, r) = mantissa.div_rem(&five_d);
        if !r.is_zero() {
            return Err(bad());
        }
        Ok(DyadicRational::new(q, d as u32))
    }
}

/// Split a decimal literal into an integer mantissa and a power of ten.
fn split_decimal(s: &str) -> Option<(BigInt, i64)> {
    let (body, exp_part) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let mut exp10: i64 = match exp_part {
        Some(e) => e.parse().ok()?,
        None => 0,
    };
    let (sign, body) = match body.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, body.strip_prefix('+').unwrap_or(body)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    exp10 -= frac_part.len() as i64;
    let mantissa = BigInt::from_str(&digits).ok()? * sign;
    Some((mantissa, exp10))
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        self.scaled_numerator(e).cmp(&other.scaled_numerator(e))
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let e = self.exponent.max(rhs.exponent);
        DyadicRational::new(self.scaled_numerator(e) + rhs.scaled_numerator(e), e)
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        let e = self.exponent.max(rhs.exponent);
        DyadicRational::new(self.scaled_numerator(e) - rhs.scaled_numerator(e), e)
    }
}

impl Mul for &DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(&self.numerator * &rhs.numerator, self.exponent + rhs.exponent)
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational { numerator: -&self.numerator, exponent: self.exponent }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for DyadicRational {
            type Output = DyadicRational;
            fn $m(self, rhs: DyadicRational) -> DyadicRational {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        -&self
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl FromStr for DyadicRational {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DyadicRational::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_form() {
        let x = DyadicRational::new(12, 3);
        assert_eq!(x.numerator(), &BigInt::from(3));
        assert_eq!(x.exponent(), 1);
        assert_eq!(DyadicRational::new(0, 9).exponent(), 0);
        assert_eq!(DyadicRational::new(8, 0).numerator(), &BigInt::from(8));
    }

    #[test]
    fn parses_decimals_and_powers() {
        assert_eq!(d("0.375"), DyadicRational::new(3, 3));
        assert_eq!(d("-0.25"), DyadicRational::new(-1, 2));
        assert_eq!(d("3/2^4"), DyadicRational::new(3, 4));
        assert_eq!(d("5/8"), DyadicRational::new(5, 3));
        assert_eq!(d("1.5e1"), DyadicRational::from_integer(15));
        assert_eq!(d("12"), DyadicRational::from_integer(12));
        assert!(DyadicRational::parse("0.1").is_err());
        assert!(DyadicRational::parse("1/3").is_err());
        assert!(DyadicRational::parse("abc").is_err());
    }

    #[test]
    fn decimal_display() {
        assert_eq!(d("0.375").to_string(), "0.375");
        assert_eq!(d("-0.0625").to_string(), "-0.0625");
        assert_eq!(d("7").to_string(), "7");
        assert_eq!(d("-3/2^1").to_string(), "-1.5");
    }

    #[test]
    fn floor_and_ceil_scaled() {
        assert_eq!(d("-0.25").floor_scaled(2), BigInt::from(-1));
        assert_eq!(d("-0.3125").floor_scaled(2), BigInt::from(-2));
        assert_eq!(d("-0.3125").ceil_scaled(2), BigInt::from(-1));
        assert_eq!(d("0.5").floor_scaled(0), BigInt::from(0));
        assert_eq!(d("1").floor_scaled(3), BigInt::from(8));
    }

    #[test]
    fn f64_round_trip_is_exact() {
        let third = 1.0f64 / 3.0;
        let x = DyadicRational::from_f64(third).unwrap();
        assert_eq!(x.to_f64_exact(), Some(third));
        assert_eq!(DyadicRational::from_f64(-0.0).unwrap(), DyadicRational::zero());
        assert!(DyadicRational::from_f64(f64::INFINITY).is_err());
        let tiny = f64::from_bits(1);
        assert_eq!(DyadicRational::from_f64(tiny).unwrap().exponent(), 1074);
    }

    #[test]
    fn directed_conversion_brackets() {
        // 1 + 2^-60 is not a double.
        let x = &DyadicRational::one() + &DyadicRational::pow2_neg(60);
        assert_eq!(x.to_f64_exact(), None);
        assert_eq!(x.to_f64_down(), 1.0);
        assert_eq!(x.to_f64_up(), 1.0f64.next_up());
    }

    proptest! {
        #[test]
        fn arithmetic_matches_f64_when_exact(a in -1_000_000i64..1_000_000, ea in 0u32..20,
                                             b in -1_000_000i64..1_000_000, eb in 0u32..20) {
            let x = DyadicRational::new(a, ea);
            let y = DyadicRational::new(b, eb);
            let xf = x.to_f64();
            let yf = y.to_f64();
            prop_assert_eq!((&x + &y).to_f64(), xf + yf);
            prop_assert_eq!((&x - &y).to_f64(), xf - yf);
            prop_assert_eq!(x.cmp(&y), xf.partial_cmp(&yf).unwrap());
            prop_assert_eq!(DyadicRational::parse(&x.to_string()).unwrap(), x);
        }
    }
}
