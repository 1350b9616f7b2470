//! Arbitrary-precision decimal floating point.
//!
//! A [`Decimal`] is `mantissa * 10^exponent` with an unbounded integer
//! mantissa. Arithmetic through the operator traits is exact; the `*_round`
//! methods round the exact result to a number of significant digits with an
//! explicit [`Rounding`] mode, which is what both the pointwise evaluator
//! (round half even) and the interval evaluator (floor / ceiling) build on.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Rounding direction used when a result has more digits than allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rounding {
    /// Round to nearest, ties to an even last digit.
    HalfEven,
    /// Round toward negative infinity.
    Floor,
    /// Round toward positive infinity.
    Ceiling,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid decimal literal `{0}`")]
pub struct ParseDecimalError(pub String);

#[derive(Clone)]
pub struct Decimal {
    mantissa: BigInt,
    exponent: i64,
}

const LOG10_2: f64 = std::f64::consts::LOG10_2;

pub(crate) fn pow10(n: u64) -> BigInt {
    BigInt::from(10u32).pow(n as u32)
}

/// Number of decimal digits of `|m|`; zero has zero digits.
fn digit_count(m: &BigInt) -> u64 {
    if m.is_zero() {
        return 0;
    }
    let bits = m.bits();
    let est = ((bits - 1) as f64 * LOG10_2).floor() as u64 + 1;
    if m.magnitude() >= pow10(est).magnitude() {
        est + 1
    } else {
        est
    }
}

/// Drops `drop` trailing digits of `mantissa`, rounding by `mode`.
/// `sticky` marks a nonzero tail already discarded below the mantissa.
fn round_off(mantissa: &BigInt, drop: u64, sticky: bool, mode: Rounding) -> BigInt {
    let divisor = pow10(drop);
    let (q, r) = mantissa.div_rem(&divisor);
    let negative = mantissa.is_negative();
    let r = r.abs();
    let inexact = sticky || !r.is_zero();
    let away = match mode {
        Rounding::HalfEven => match (&r * 2u32).cmp(&divisor) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => sticky || q.is_odd(),
        },
        Rounding::Floor => negative && inexact,
        Rounding::Ceiling => !negative && inexact,
    };
    if !away {
        q
    } else if negative {
        q - 1
    } else {
        q + 1
    }
}

impl Decimal {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        if mantissa.is_zero() {
            Self::zero()
        } else {
            Decimal { mantissa, exponent }
        }
    }

    pub fn zero() -> Self {
        Decimal { mantissa: BigInt::zero(), exponent: 0 }
    }

    pub fn one() -> Self {
        Decimal::from(1)
    }

    /// `10^k`.
    pub fn pow10(k: i64) -> Self {
        Decimal { mantissa: BigInt::one(), exponent: k }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn abs(&self) -> Self {
        Decimal { mantissa: self.mantissa.abs(), exponent: self.exponent }
    }

    /// Number of significant digits currently held (trailing zeros included).
    pub fn digits(&self) -> u64 {
        digit_count(&self.mantissa)
    }

    /// `floor(log10(|self|))`, or `None` for zero.
    pub fn magnitude(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.digits() as i64 + self.exponent - 1)
        }
    }

    /// Strips trailing zeros from the mantissa. Value is unchanged.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut m = self.mantissa.clone();
        let mut e = self.exponent;
        let ten = BigInt::from(10u32);
        loop {
            let (q, r) = m.div_rem(&ten);
            if !r.is_zero() {
                break;
            }
            m = q;
            e += 1;
        }
        Decimal { mantissa: m, exponent: e }
    }

    pub fn is_integer(&self) -> bool {
        let n = self.normalized();
        n.exponent >= 0
    }

    pub fn to_i64(&self) -> Option<i64> {
        let n = self.normalized();
        if n.exponent < 0 {
            return None;
        }
        if n.exponent > 18 {
            return None;
        }
        (n.mantissa * pow10(n.exponent as u64)).to_i64()
    }

    pub fn to_f64(&self) -> f64 {
        self.to_string().parse().unwrap_or(f64::NAN)
    }

    /// Multiplies by `10^k` exactly.
    pub fn scale_pow10(&self, k: i64) -> Self {
        Decimal::new(self.mantissa.clone(), self.exponent + k)
    }

    /// Exact `self / 2`.
    pub fn half(&self) -> Self {
        Decimal::new(&self.mantissa * 5u32, self.exponent - 1)
    }

    /// Exact `self / 2^k`.
    pub fn div_pow2(&self, k: u32) -> Self {
        Decimal::new(&self.mantissa * BigInt::from(5u32).pow(k), self.exponent - k as i64)
    }

    /// Rounds to at most `precision` significant digits.
    pub fn round(&self, precision: u32, mode: Rounding) -> Self {
        self.round_sticky(precision, false, mode)
    }

    fn round_sticky(&self, precision: u32, sticky: bool, mode: Rounding) -> Self {
        let precision = precision.max(1) as u64;
        let d = self.digits();
        if d <= precision {
            debug_assert!(!sticky, "sticky rounding requires dropped digits");
            return self.clone();
        }
        let drop = d - precision;
        let m = round_off(&self.mantissa, drop, sticky, mode);
        Decimal::new(m, self.exponent + drop as i64)
    }

    /// Rounds to a multiple of `10^exponent`.
    pub fn quantize(&self, exponent: i64, mode: Rounding) -> Self {
        if self.exponent >= exponent || self.is_zero() {
            return self.clone();
        }
        let drop = (exponent - self.exponent) as u64;
        let m = round_off(&self.mantissa, drop, false, mode);
        Decimal::new(m, exponent)
    }

    pub fn floor(&self) -> Self {
        self.quantize(0, Rounding::Floor)
    }

    pub fn ceil(&self) -> Self {
        self.quantize(0, Rounding::Ceiling)
    }

    /// One unit in the last place at `precision` significant digits.
    pub fn ulp(&self, precision: u32) -> Self {
        match self.magnitude() {
            Some(m) => Decimal::pow10(m - precision as i64 + 1),
            None => Decimal::zero(),
        }
    }

    pub fn add_round(&self, other: &Decimal, precision: u32, mode: Rounding) -> Self {
        if self.is_zero() {
            return other.round(precision, mode);
        }
        if other.is_zero() {
            return self.round(precision, mode);
        }
        let (big, small) = if self.magnitude() >= other.magnitude() {
            (self, other)
        } else {
            (other, self)
        };
        let big_mag = big.magnitude().unwrap_or(0);
        // Every rounding boundary is a multiple of 10^floor_pos, and so is
        // `big`; an addend smaller than that can be replaced by any value of
        // the same sign and smaller size without changing the rounded sum.
        let floor_pos = big.exponent.min(big_mag - precision as i64 - 3);
        if small.magnitude().unwrap_or(0) < floor_pos {
            let unit = if small.is_negative() { -1 } else { 1 };
            let proxy = Decimal::new(BigInt::from(unit), floor_pos - 1);
            return (big + &proxy).round(precision, mode);
        }
        (self + other).round(precision, mode)
    }

    pub fn sub_round(&self, other: &Decimal, precision: u32, mode: Rounding) -> Self {
        self.add_round(&-other, precision, mode)
    }

    pub fn mul_round(&self, other: &Decimal, precision: u32, mode: Rounding) -> Self {
        (self * other).round(precision, mode)
    }

    /// Quotient rounded to `precision` digits; `None` when `other` is zero.
    pub fn div_round(&self, other: &Decimal, precision: u32, mode: Rounding) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Decimal::zero());
        }
        let p = precision.max(1) as i64;
        let shift = p + 1 + other.digits() as i64 - self.digits() as i64;
        let (num, den) = if shift >= 0 {
            (&self.mantissa * pow10(shift as u64), other.mantissa.clone())
        } else {
            (self.mantissa.clone(), &other.mantissa * pow10((-shift) as u64))
        };
        let (q, r) = num.div_rem(&den);
        let raw = Decimal::new(q, self.exponent - other.exponent - shift);
        Some(raw.round_sticky(precision, !r.is_zero(), mode))
    }

    /// Square root rounded to `precision` digits; `None` for negative input.
    pub fn sqrt_round(&self, precision: u32, mode: Rounding) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        if self.is_zero() {
            return Some(Decimal::zero());
        }
        let p = precision.max(1) as i64;
        let mut shift = (2 * p + 2 - self.digits() as i64).max(0);
        if (self.exponent - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let radicand = &self.mantissa * pow10(shift as u64);
        let root = radicand.sqrt();
        let exact = &root * &root == radicand;
        let raw = Decimal::new(root, (self.exponent - shift) / 2);
        if exact {
            Some(raw.round(precision, mode))
        } else {
            Some(raw.round_sticky(precision, true, mode))
        }
    }

    pub fn min<'a>(&'a self, other: &'a Decimal) -> &'a Decimal {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max<'a>(&'a self, other: &'a Decimal) -> &'a Decimal {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Default for Decimal {
    fn default() -> Self {
        Decimal::zero()
    }
}

impl From<i64> for Decimal {
    fn from(v: i64) -> Self {
        Decimal::new(BigInt::from(v), 0)
    }
}

impl From<i32> for Decimal {
    fn from(v: i32) -> Self {
        Decimal::from(v as i64)
    }
}

impl From<BigInt> for Decimal {
    fn from(v: BigInt) -> Self {
        Decimal::new(v, 0)
    }
}

fn aligned(a: &Decimal, b: &Decimal) -> (BigInt, BigInt, i64) {
    let e = a.exponent.min(b.exponent);
    let ma = if a.exponent > e {
        &a.mantissa * pow10((a.exponent - e) as u64)
    } else {
        a.mantissa.clone()
    };
    let mb = if b.exponent > e {
        &b.mantissa * pow10((b.exponent - e) as u64)
    } else {
        b.mantissa.clone()
    };
    (ma, mb, e)
}

impl Add<&Decimal> for &Decimal {
    type Output = Decimal;
    fn add(self, rhs: &Decimal) -> Decimal {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b, e) = aligned(self, rhs);
        Decimal::new(a + b, e)
    }
}

impl Sub<&Decimal> for &Decimal {
    type Output = Decimal;
    fn sub(self, rhs: &Decimal) -> Decimal {
        self + &(-rhs)
    }
}

impl Mul<&Decimal> for &Decimal {
    type Output = Decimal;
    fn mul(self, rhs: &Decimal) -> Decimal {
        Decimal::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &Decimal {
    type Output = Decimal;
    fn neg(self) -> Decimal {
        Decimal { mantissa: -&self.mantissa, exponent: self.exponent }
    }
}

impl Neg for Decimal {
    type Output = Decimal;
    fn neg(self) -> Decimal {
        Decimal { mantissa: -self.mantissa, exponent: self.exponent }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Decimal> for Decimal {
            type Output = Decimal;
            fn $m(self, rhs: Decimal) -> Decimal {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Decimal> for Decimal {
            type Output = Decimal;
            fn $m(self, rhs: &Decimal) -> Decimal {
                (&self).$m(rhs)
            }
        }
        impl $tr<Decimal> for &Decimal {
            type Output = Decimal;
            fn $m(self, rhs: Decimal) -> Decimal {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.mantissa.sign(), other.mantissa.sign());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if self.is_zero() {
            return Ordering::Equal;
        }
        let ma = self.magnitude().unwrap_or(0);
        let mb = other.magnitude().unwrap_or(0);
        if ma != mb {
            let by_size = ma.cmp(&mb);
            return if self.is_negative() { by_size.reverse() } else { by_size };
        }
        let (a, b, _) = aligned(self, other);
        a.cmp(&b)
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Decimal {}

impl fmt::Debug for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Decimal({})", self)
    }
}

/// Plain notation without trailing zeros; scientific notation only for very
/// large or very small magnitudes. Always an exact rendering of the value.
impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let n = self.normalized();
        let sign = if n.is_negative() { "-" } else { "" };
        let digits = n.mantissa.abs().to_string();
        let mag = n.magnitude().unwrap_or(0);
        if !(-24..=40).contains(&mag) {
            let (head, tail) = digits.split_at(1);
            return if tail.is_empty() {
                write!(f, "{sign}{head}e{mag}")
            } else {
                write!(f, "{sign}{head}.{tail}e{mag}")
            };
        }
        if n.exponent >= 0 {
            write!(f, "{sign}{digits}{}", "0".repeat(n.exponent as usize))
        } else {
            let frac_len = (-n.exponent) as usize;
            if digits.len() > frac_len {
                let (int, frac) = digits.split_at(digits.len() - frac_len);
                write!(f, "{sign}{int}.{frac}")
            } else {
                write!(f, "{sign}0.{}{digits}", "0".repeat(frac_len - digits.len()))
            }
        }
    }
}

impl FromStr for Decimal {
    type Err = ParseDecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDecimalError(s.to_string());
        let t = s.trim();
        let (negative, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        let (coeff, exp) = match body.find(['e', 'E']) {
            Some(i) => {
                let e: i64 = body[i + 1..].parse().map_err(|_| err())?;
                (&body[..i], e)
            }
            None => (body, 0),
        };
        let (int, frac) = match coeff.find('.') {
            Some(i) => (&coeff[..i], &coeff[i + 1..]),
            None => (coeff, ""),
        };
        if int.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let all = format!("{int}{frac}");
        let mantissa: BigInt = all.parse().map_err(|_| err())?;
        let mantissa = if negative { -mantissa } else { mantissa };
        Ok(Decimal::new(mantissa, exp - frac.len() as i64))
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(d("0.0400").to_string(), "0.04");
        assert_eq!(d("-12.5e2").to_string(), "-1250");
        assert_eq!(d(".5").to_string(), "0.5");
        assert_eq!(d("1e-30").to_string(), "1e-30");
        assert_eq!(d("123456e-32").to_string(), "1.23456e-27");
        assert!("1.2.3".parse::<Decimal>().is_err());
        assert!("".parse::<Decimal>().is_err());
        assert!("e5".parse::<Decimal>().is_err());
    }

    #[test]
    fn ordering_is_by_value() {
        assert_eq!(d("1.50"), d("1.5"));
        assert!(d("-2") < d("-1.9"));
        assert!(d("0.001") < d("0.01"));
        assert!(d("-0.001") > d("-0.01"));
        assert!(d("100") > d("99.999"));
    }

    #[test]
    fn rounding_modes() {
        let x = d("2.345");
        assert_eq!(x.round(3, Rounding::HalfEven), d("2.34"));
        assert_eq!(d("2.355").round(3, Rounding::HalfEven), d("2.36"));
        assert_eq!(x.round(3, Rounding::Floor), d("2.34"));
        assert_eq!(x.round(3, Rounding::Ceiling), d("2.35"));
        assert_eq!((-&x).round(3, Rounding::Floor), d("-2.35"));
        assert_eq!((-&x).round(3, Rounding::Ceiling), d("-2.34"));
        assert_eq!(d("9.99").round(2, Rounding::HalfEven), d("10"));
    }

    #[test]
    fn division_directed() {
        let one = Decimal::one();
        let three = Decimal::from(3);
        assert_eq!(one.div_round(&three, 5, Rounding::HalfEven).unwrap(), d("0.33333"));
        assert_eq!(one.div_round(&three, 5, Rounding::Ceiling).unwrap(), d("0.33334"));
        assert_eq!((-&one).div_round(&three, 5, Rounding::Floor).unwrap(), d("-0.33334"));
        assert_eq!(d("2").div_round(&d("3"), 3, Rounding::HalfEven).unwrap(), d("0.667"));
        assert!(one.div_round(&Decimal::zero(), 5, Rounding::HalfEven).is_none());
        // exact quotient keeps exact value
        assert_eq!(d("1").div_round(&d("8"), 10, Rounding::Ceiling).unwrap(), d("0.125"));
    }

    #[test]
    fn square_roots() {
        assert_eq!(d("2").sqrt_round(10, Rounding::HalfEven).unwrap(), d("1.414213562"));
        assert_eq!(d("2").sqrt_round(10, Rounding::Ceiling).unwrap(), d("1.414213563"));
        assert_eq!(d("0.0004").sqrt_round(10, Rounding::Ceiling).unwrap(), d("0.02"));
        assert!(d("-1").sqrt_round(10, Rounding::HalfEven).is_none());
    }

    #[test]
    fn far_apart_addition_rounds_like_exact() {
        let big = d("1");
        let tiny = d("1e-400");
        assert_eq!(big.add_round(&tiny, 10, Rounding::Ceiling), d("1.000000001"));
        assert_eq!(big.add_round(&-&tiny, 10, Rounding::Floor), d("0.9999999999"));
        assert_eq!(big.add_round(&tiny, 10, Rounding::HalfEven), d("1"));
        let tie = d("1.0000000005");
        assert_eq!(tie.add_round(&tiny, 10, Rounding::HalfEven), d("1.000000001"));
        assert_eq!(tie.add_round(&-&tiny, 10, Rounding::HalfEven), d("1"));
    }

    #[test]
    fn quantize_and_floor() {
        assert_eq!(d("0.0123456").quantize(-3, Rounding::Floor), d("0.012"));
        assert_eq!(d("-0.0051").quantize(-2, Rounding::Floor), d("-0.01"));
        assert_eq!(d("-2.5").floor(), d("-3"));
        assert_eq!(d("2.5").ceil(), d("3"));
        assert_eq!(d("17").magnitude(), Some(1));
        assert_eq!(d("0.04").magnitude(), Some(-2));
    }
}
