//! Natural interval extension with outward rounding.
//!
//! Each node maps enclosures of its children to an enclosure of its own
//! range. Lower bounds are rounded toward negative infinity and upper bounds
//! toward positive infinity at the working precision, so the true range is
//! always contained in the result.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::eval::kernel_error;
use super::{BinaryOp, Constant, DomainKind, EvalError, Expr, Function, PrecisionContext};
use crate::decimal::{Decimal, Rounding};
use crate::elementary::{self, Approx};

const DOWN: Rounding = Rounding::Floor;
const UP: Rounding = Rounding::Ceiling;
/// Extra digits used for elementary-function kernels in enclosures.
const KERNEL_GUARD: u32 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalValue {
    pub lo: Decimal,
    pub hi: Decimal,
}

impl IntervalValue {
    /// `None` unless `lo <= hi`.
    pub fn new(lo: Decimal, hi: Decimal) -> Option<Self> {
        (lo <= hi).then_some(IntervalValue { lo, hi })
    }

    pub fn point(x: Decimal) -> Self {
        IntervalValue { lo: x.clone(), hi: x }
    }

    pub fn contains(&self, x: &Decimal) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Decimal::zero())
    }

    pub fn is_subset_of(&self, other: &IntervalValue) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn width(&self) -> Decimal {
        &self.hi - &self.lo
    }

    fn hull_of(values: impl IntoIterator<Item = (Decimal, Decimal)>) -> Self {
        let mut it = values.into_iter();
        let (mut lo, mut hi) = it.next().expect("at least one candidate");
        for (l, h) in it {
            if l < lo {
                lo = l;
            }
            if h > hi {
                hi = h;
            }
        }
        IntervalValue { lo, hi }
    }

    fn from_approx(a: &Approx, p: u32) -> Self {
        IntervalValue { lo: a.lower(p), hi: a.upper(p) }
    }
}

impl fmt::Display for IntervalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Encloses `{ e(x) : x in domain }` at `ctx.digits` digits.
pub fn eval_interval(
    e: &Expr,
    var: &str,
    domain: &IntervalValue,
    ctx: PrecisionContext,
) -> Result<IntervalValue, EvalError> {
    let p = ctx.digits();
    let x = IntervalValue { lo: domain.lo.round(p, DOWN), hi: domain.hi.round(p, UP) };
    Enclosure { var, x: &x, p }.eval(e)
}

struct Enclosure<'a> {
    var: &'a str,
    x: &'a IntervalValue,
    p: u32,
}

fn kernel_interval(
    lo: Result<Approx, elementary::KernelError>,
    hi: Result<Approx, elementary::KernelError>,
    p: u32,
) -> Result<IntervalValue, elementary::KernelError> {
    Ok(IntervalValue { lo: lo?.lower(p), hi: hi?.upper(p) })
}

impl Enclosure<'_> {
    fn w(&self) -> u32 {
        self.p + KERNEL_GUARD
    }

    fn eval(&self, e: &Expr) -> Result<IntervalValue, EvalError> {
        let p = self.p;
        match e {
            Expr::Number(l) => Ok(IntervalValue { lo: l.value().round(p, DOWN), hi: l.value().round(p, UP) }),
            Expr::Constant(Constant::Pi) => Ok(IntervalValue::from_approx(&elementary::pi(self.w()), p)),
            Expr::Constant(Constant::Euler) => {
                let a = elementary::exp(&Decimal::one(), self.w()).expect("e");
                Ok(IntervalValue::from_approx(&a, p))
            }
            Expr::Variable(v) if v == self.var => Ok(self.x.clone()),
            Expr::Variable(v) => Err(EvalError::UnboundVariable {
                found: v.clone(),
                expected: self.var.to_string(),
            }),
            Expr::Neg(inner) => {
                let v = self.eval(inner)?;
                Ok(IntervalValue { lo: -v.hi, hi: -v.lo })
            }
            Expr::Binary(op, a, b) => {
                let l = self.eval(a)?;
                let r = self.eval(b)?;
                match op {
                    BinaryOp::Add => Ok(IntervalValue {
                        lo: l.lo.add_round(&r.lo, p, DOWN),
                        hi: l.hi.add_round(&r.hi, p, UP),
                    }),
                    BinaryOp::Sub => Ok(IntervalValue {
                        lo: l.lo.sub_round(&r.hi, p, DOWN),
                        hi: l.hi.sub_round(&r.lo, p, UP),
                    }),
                    BinaryOp::Mul => Ok(self.mul(&l, &r)),
                    BinaryOp::Div => self.div(&l, &r).ok_or_else(|| EvalError::domain(DomainKind::DivisionByZero, e)),
                    BinaryOp::Pow => self.pow(&l, &r, e),
                }
            }
            Expr::Call(f, arg) => {
                let v = self.eval(arg)?;
                self.call(*f, &v, e)
            }
        }
    }

    fn mul(&self, a: &IntervalValue, b: &IntervalValue) -> IntervalValue {
        let p = self.p;
        let pairs = [(&a.lo, &b.lo), (&a.lo, &b.hi), (&a.hi, &b.lo), (&a.hi, &b.hi)];
        IntervalValue::hull_of(pairs.iter().map(|(x, y)| (x.mul_round(y, p, DOWN), x.mul_round(y, p, UP))))
    }

    fn div(&self, a: &IntervalValue, b: &IntervalValue) -> Option<IntervalValue> {
        if b.contains_zero() {
            return None;
        }
        let p = self.p;
        let pairs = [(&a.lo, &b.lo), (&a.lo, &b.hi), (&a.hi, &b.lo), (&a.hi, &b.hi)];
        Some(IntervalValue::hull_of(
            pairs
                .iter()
                .map(|(x, y)| (x.div_round(y, p, DOWN).unwrap(), x.div_round(y, p, UP).unwrap())),
        ))
    }

    /// `x^n` for `x >= 0`, rounding each product in `mode`.
    fn powi_nonneg(&self, x: &Decimal, n: u64, mode: Rounding) -> Decimal {
        let p = self.p;
        let mut acc = Decimal::one();
        let mut base = x.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_round(&base, p, mode);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_round(&base, p, mode);
            }
        }
        acc
    }

    fn powi(&self, base: &IntervalValue, n: i64, at: &Expr) -> Result<IntervalValue, EvalError> {
        if n == 0 {
            return Ok(IntervalValue::point(Decimal::one()));
        }
        let m = n.unsigned_abs();
        let lo_abs = base.lo.abs();
        let hi_abs = base.hi.abs();
        let magnitude = if !base.lo.is_negative() {
            IntervalValue { lo: self.powi_nonneg(&lo_abs, m, DOWN), hi: self.powi_nonneg(&hi_abs, m, UP) }
        } else if !base.hi.is_positive() {
            IntervalValue { lo: self.powi_nonneg(&hi_abs, m, DOWN), hi: self.powi_nonneg(&lo_abs, m, UP) }
        } else {
            let top = Decimal::max(&lo_abs, &hi_abs).clone();
            IntervalValue { lo: Decimal::zero(), hi: self.powi_nonneg(&top, m, UP) }
        };
        let pos = if m.is_multiple_of(2) || !base.lo.is_negative() {
            magnitude
        } else if !base.hi.is_positive() {
            IntervalValue { lo: -magnitude.hi, hi: -magnitude.lo }
        } else {
            // odd power of a sign-changing base is monotone
            let lo = -self.powi_nonneg(&lo_abs, m, UP);
            let hi = self.powi_nonneg(&hi_abs, m, UP);
            IntervalValue { lo, hi }
        };
        if n > 0 {
            return Ok(pos);
        }
        let one = IntervalValue::point(Decimal::one());
        self.div(&one, &pos)
            .ok_or_else(|| EvalError::domain(DomainKind::ZeroToNonPositivePower, at))
    }

    fn pow(&self, base: &IntervalValue, exponent: &IntervalValue, at: &Expr) -> Result<IntervalValue, EvalError> {
        if exponent.lo == exponent.hi {
            if let Some(n) = exponent.lo.to_i64() {
                return self.powi(base, n, at);
            }
        }
        if base.lo.is_negative() {
            return Err(EvalError::domain(DomainKind::NegativeBase, at));
        }
        if base.lo.is_zero() {
            if !exponent.lo.is_positive() {
                return Err(EvalError::domain(DomainKind::ZeroToNonPositivePower, at));
            }
            if base.hi.is_zero() {
                return Ok(IntervalValue::point(Decimal::zero()));
            }
            let top = IntervalValue::point(base.hi.clone());
            let corners = self.pow_positive(&top, exponent, at)?;
            return Ok(IntervalValue { lo: Decimal::zero(), hi: corners.hi });
        }
        self.pow_positive(base, exponent, at)
    }

    /// `exp(y ln x)` for a strictly positive base.
    fn pow_positive(&self, base: &IntervalValue, exponent: &IntervalValue, at: &Expr) -> Result<IntervalValue, EvalError> {
        let ln = self.call(Function::Ln, base, at)?;
        let t = self.mul(exponent, &ln);
        self.call(Function::Exp, &t, at)
    }

    fn call(&self, f: Function, v: &IntervalValue, at: &Expr) -> Result<IntervalValue, EvalError> {
        let (p, w) = (self.p, self.w());
        let map = |k, kind| kernel_error(k, at, kind);
        match f {
            Function::Abs => Ok(if !v.lo.is_negative() {
                v.clone()
            } else if !v.hi.is_positive() {
                IntervalValue { lo: -&v.hi, hi: -&v.lo }
            } else {
                IntervalValue { lo: Decimal::zero(), hi: std::cmp::max(v.lo.abs(), v.hi.clone()) }
            }),
            Function::Sqrt => match (v.lo.sqrt_round(p, DOWN), v.hi.sqrt_round(p, UP)) {
                (Some(lo), Some(hi)) => Ok(IntervalValue { lo, hi }),
                _ => Err(EvalError::domain(DomainKind::SqrtOfNegative, at)),
            },
            Function::Exp => kernel_interval(elementary::exp(&v.lo, w), elementary::exp(&v.hi, w), p)
                .map_err(|k| map(k, DomainKind::Overflow)),
            Function::Ln => kernel_interval(elementary::ln(&v.lo, w), elementary::ln(&v.hi, w), p)
                .map_err(|k| map(k, DomainKind::LogOfNonPositive)),
            Function::Log10 => kernel_interval(elementary::log10(&v.lo, w), elementary::log10(&v.hi, w), p)
                .map_err(|k| map(k, DomainKind::LogOfNonPositive)),
            Function::Sin => self.sin_cos(v, false).map_err(|k| map(k, DomainKind::Overflow)),
            Function::Cos => self.sin_cos(v, true).map_err(|k| map(k, DomainKind::Overflow)),
            Function::Tan => self.tan(v, at),
        }
    }

    /// Range of multiples `k + offset` of pi that may fall inside `v`, as an
    /// inclusive integer range of `k`. Conservative: uses both pi bounds.
    fn critical_indices(&self, v: &IntervalValue, offset_half: bool) -> (i64, i64) {
        let q = self.p + 4;
        let pi = elementary::pi(q + KERNEL_GUARD);
        let (pl, ph) = (pi.lower(q), pi.upper(q));
        let ratio = |x: &Decimal, mode: Rounding| {
            let a = x.div_round(&pl, q, mode).unwrap();
            let b = x.div_round(&ph, q, mode).unwrap();
            if mode == DOWN { std::cmp::min(a, b) } else { std::cmp::max(a, b) }
        };
        let mut lower = ratio(&v.lo, DOWN);
        let mut upper = ratio(&v.hi, UP);
        if offset_half {
            let half = Decimal::one().half();
            lower = &lower - &half;
            upper = &upper - &half;
        }
        let k_lo = lower.ceil().to_i64().unwrap_or(i64::MIN / 2);
        let k_hi = upper.floor().to_i64().unwrap_or(i64::MAX / 2);
        (k_lo, k_hi)
    }

    fn sin_cos(&self, v: &IntervalValue, cosine: bool) -> Result<IntervalValue, elementary::KernelError> {
        let full = IntervalValue { lo: Decimal::from(-1), hi: Decimal::one() };
        if v.width() >= Decimal::from(7) {
            return Ok(full);
        }
        let (p, w) = (self.p, self.w());
        let pick = |x: &Decimal| elementary::sin_cos(x, w).map(|(s, c)| if cosine { c } else { s });
        let a = pick(&v.lo)?;
        let b = pick(&v.hi)?;
        let mut out = IntervalValue::hull_of([(a.lower(p), a.upper(p)), (b.lower(p), b.upper(p))]);
        // sin peaks at (k + 1/2) pi, cos at k pi; value (-1)^k
        let (k_lo, k_hi) = self.critical_indices(v, !cosine);
        for k in k_lo..=k_hi.min(k_lo + 3) {
            if k.rem_euclid(2) == 0 {
                out.hi = Decimal::one();
            } else {
                out.lo = Decimal::from(-1);
            }
        }
        if out.lo < full.lo {
            out.lo = full.lo;
        }
        if out.hi > full.hi {
            out.hi = full.hi;
        }
        Ok(out)
    }

    fn tan(&self, v: &IntervalValue, at: &Expr) -> Result<IntervalValue, EvalError> {
        let (k_lo, k_hi) = self.critical_indices(v, true);
        if k_lo <= k_hi {
            return Err(EvalError::domain(DomainKind::TanPole, at));
        }
        let w = self.w();
        kernel_interval(elementary::tan(&v.lo, w), elementary::tan(&v.hi, w), self.p)
            .map_err(|k| kernel_error(k, at, DomainKind::TanPole))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval_point, parse};

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn enclose(src: &str, lo: &str, hi: &str, digits: u32) -> Result<IntervalValue, EvalError> {
        let b = IntervalValue::new(d(lo), d(hi)).unwrap();
        eval_interval(&parse(src).unwrap(), "x", &b, PrecisionContext::new(digits).unwrap())
    }

    #[test]
    fn identity_and_constants() {
        assert_eq!(enclose("x", "0", "1", 10).unwrap(), IntervalValue::new(d("0"), d("1")).unwrap());
        assert_eq!(enclose("2", "-3", "5", 10).unwrap(), IntervalValue::point(d("2")));
        let pi = enclose("pi", "0", "0", 10).unwrap();
        assert_eq!(pi.lo.to_string(), "3.141592653");
        assert_eq!(pi.hi.to_string(), "3.141592654");
    }

    #[test]
    fn degenerate_box_contains_ten_digit_value() {
        let g1 = "((1-3*x)/2)*ln((1-3*x)/2) + 2*((1-24*x)/5)*ln((1-24*x)/5)";
        let v = enclose(g1, "0.023", "0.023", 10).unwrap();
        assert!(v.contains(&d("-0.7882434741")), "{v}");
        assert!(v.contains(&d("-0.78824347399738902397")), "{v}");
        assert!(v.width() < d("1e-8"));
    }

    #[test]
    fn trig_ranges_include_interior_extrema() {
        let v = enclose("sin(x)", "1", "2", 10).unwrap();
        assert_eq!(v.hi, d("1"));
        assert!(v.lo < d("0.8415") && v.lo > d("0.84"));
        let v = enclose("cos(x)", "3", "3.5", 10).unwrap();
        assert_eq!(v.lo, d("-1"));
        let v = enclose("sin(x)", "0", "100", 10).unwrap();
        assert_eq!(v, IntervalValue::new(d("-1"), d("1")).unwrap());
        let v = enclose("sin(x)", "0.1", "0.2", 10).unwrap();
        assert!(v.hi < d("0.2"));
    }

    #[test]
    fn singular_boxes_are_domain_errors() {
        assert!(matches!(enclose("1/x", "-1", "1", 10), Err(EvalError::Domain { kind: DomainKind::DivisionByZero, .. })));
        assert!(matches!(enclose("ln(x)", "0", "1", 10), Err(EvalError::Domain { kind: DomainKind::LogOfNonPositive, .. })));
        assert!(matches!(enclose("tan(x)", "1", "2", 10), Err(EvalError::Domain { kind: DomainKind::TanPole, .. })));
        assert!(matches!(enclose("sqrt(x)", "-0.1", "1", 10), Err(EvalError::Domain { .. })));
    }

    #[test]
    fn powers_of_sign_changing_bases() {
        assert_eq!(enclose("x^2", "-2", "1", 10).unwrap(), IntervalValue::new(d("0"), d("4")).unwrap());
        assert_eq!(enclose("x^3", "-2", "1", 10).unwrap(), IntervalValue::new(d("-8"), d("1")).unwrap());
        assert_eq!(enclose("x^-2", "1", "2", 10).unwrap(), IntervalValue::new(d("0.25"), d("1")).unwrap());
        let v = enclose("x^0.5", "0", "4", 10).unwrap();
        assert_eq!(v.lo, d("0"));
        assert!(v.contains(&d("2")));
        assert!(enclose("x^-1", "-1", "1", 10).is_err());
    }

    #[test]
    fn point_values_land_inside() {
        let ctx = PrecisionContext::default();
        for src in ["exp(x)*sin(3*x)", "ln(1+x^2)/(2+cos(x))", "sqrt(x)*2^x - tan(x/3)", "abs(x-0.7)^3"] {
            let e = parse(src).unwrap();
            let b = IntervalValue::new(d("0.25"), d("1.5")).unwrap();
            let enc = eval_interval(&e, "x", &b, ctx).unwrap();
            for x in ["0.25", "0.5", "0.7", "1.1", "1.5"] {
                let v = eval_point(&e, "x", &d(x), ctx).unwrap();
                assert!(enc.contains(&v), "{src} at {x}: {v} not in {enc}");
            }
        }
    }
}
