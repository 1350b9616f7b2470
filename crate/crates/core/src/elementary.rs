//! Elementary functions on [`Decimal`] with explicit error bounds.
//!
//! Every kernel takes a target precision `w` and returns an [`Approx`]: a
//! value together with an absolute error bound. Kernels work internally
//! with several guard digits beyond `w`, so the reported bound (about
//! `10^-w` relative) over-covers the actual accumulated rounding by a wide
//! margin. Callers either round correctly (retrying at higher `w` until the
//! rounding is decided) or round outward for interval enclosures.

use crate::decimal::{Decimal, Rounding};

const HALF_EVEN: Rounding = Rounding::HalfEven;
const GUARD: u32 = 8;

/// Largest argument accepted by `exp`, `sin`, `cos`.
const ARG_LIMIT_MAGNITUDE: i64 = 15;

#[derive(Clone, Debug)]
pub struct Approx {
    pub value: Decimal,
    pub err: Decimal,
}

impl Approx {
    pub fn exact(value: Decimal) -> Self {
        Approx { value, err: Decimal::zero() }
    }

    fn relative(value: Decimal, w: u32) -> Self {
        let err = value.abs().mul_round(&Decimal::pow10(-(w as i64)), 4, Rounding::Ceiling);
        Approx { value, err }
    }

    pub fn lower(&self, precision: u32) -> Decimal {
        (&self.value - &self.err).round(precision, Rounding::Floor)
    }

    pub fn upper(&self, precision: u32) -> Decimal {
        (&self.value + &self.err).round(precision, Rounding::Ceiling)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelError {
    /// Argument outside the mathematical domain.
    Domain,
    /// Argument too large to reduce.
    Overflow,
    /// Evaluation too close to a pole to separate it from the pole.
    Pole,
}

fn digits_of(n: i64) -> u32 {
    n.unsigned_abs().checked_ilog10().map_or(1, |d| d + 1)
}

fn round_w(x: &Decimal, w: u32) -> Decimal {
    x.round(w, HALF_EVEN)
}

/// `sum_k (-1)^k z^(2k+1)/(2k+1)` for `alternate`, else the atanh series.
fn odd_series(z: &Decimal, w: u32, alternate: bool) -> Decimal {
    let z2 = z.mul_round(z, w, HALF_EVEN);
    let stop = Decimal::pow10(-(w as i64) - 2);
    let mut power = z.clone();
    let mut sum = z.clone();
    let mut k: i64 = 1;
    loop {
        power = power.mul_round(&z2, w, HALF_EVEN);
        if power.abs() < stop {
            break;
        }
        let term = power
            .div_round(&Decimal::from(2 * k + 1), w, HALF_EVEN)
            .expect("nonzero divisor");
        sum = if alternate && k % 2 == 1 {
            sum.sub_round(&term, w, HALF_EVEN)
        } else {
            sum.add_round(&term, w, HALF_EVEN)
        };
        k += 1;
    }
    sum
}

/// `atan(1/n)` for a small positive integer `n`.
fn atan_inv(n: i64, w: u32) -> Decimal {
    let z = Decimal::one().div_round(&Decimal::from(n), w, HALF_EVEN).unwrap();
    odd_series(&z, w, true)
}

/// `atanh(1/n)` for an integer `n >= 2`.
fn atanh_inv(n: i64, w: u32) -> Decimal {
    let z = Decimal::one().div_round(&Decimal::from(n), w, HALF_EVEN).unwrap();
    odd_series(&z, w, false)
}

/// Raw pi at `w` digits, with absolute error far below `10^-w`.
fn pi_raw(w: u32) -> Decimal {
    let wi = w + GUARD;
    let a = atan_inv(5, wi).mul_round(&Decimal::from(16), wi, HALF_EVEN);
    let b = atan_inv(239, wi).mul_round(&Decimal::from(4), wi, HALF_EVEN);
    a.sub_round(&b, wi, HALF_EVEN)
}

pub fn pi(w: u32) -> Approx {
    Approx::relative(pi_raw(w), w)
}

fn ln2_raw(w: u32) -> Decimal {
    let wi = w + GUARD;
    atanh_inv(3, wi).mul_round(&Decimal::from(2), wi, HALF_EVEN)
}

/// ln 10 = 3 ln 2 + ln(5/4) = 3 ln 2 + 2 atanh(1/9).
fn ln10_raw(w: u32) -> Decimal {
    let wi = w + GUARD;
    let three_ln2 = ln2_raw(wi).mul_round(&Decimal::from(3), wi, HALF_EVEN);
    let tail = atanh_inv(9, wi).mul_round(&Decimal::from(2), wi, HALF_EVEN);
    three_ln2.add_round(&tail, wi, HALF_EVEN)
}

pub fn exp(x: &Decimal, w: u32) -> Result<Approx, KernelError> {
    if x.is_zero() {
        return Ok(Approx::exact(Decimal::one()));
    }
    if x.magnitude().unwrap_or(0) >= ARG_LIMIT_MAGNITUDE {
        return Err(KernelError::Overflow);
    }
    // x = n ln10 + r, |r| <= ~1.2
    let rough_ln10 = ln10_raw(24);
    let n = x
        .div_round(&rough_ln10, 24, HALF_EVEN)
        .unwrap()
        .quantize(0, HALF_EVEN)
        .to_i64()
        .unwrap_or(0);
    let wl = w + GUARD + digits_of(n);
    let r = if n == 0 {
        x.clone()
    } else {
        let shift = ln10_raw(wl).mul_round(&Decimal::from(n), wl, HALF_EVEN);
        x.sub_round(&shift, wl, HALF_EVEN)
    };
    // 2^-12 scaling then 12 squarings; squaring amplifies relative error by 4096
    const HALVINGS: u32 = 12;
    let wi = wl + 5;
    let s = round_w(&r.div_pow2(HALVINGS), wi);
    let stop = Decimal::pow10(-(wi as i64) - 2);
    let mut term = Decimal::one();
    let mut sum = Decimal::one();
    let mut k = 1i64;
    loop {
        term = term
            .mul_round(&s, wi, HALF_EVEN)
            .div_round(&Decimal::from(k), wi, HALF_EVEN)
            .unwrap();
        if term.abs() < stop {
            break;
        }
        sum = sum.add_round(&term, wi, HALF_EVEN);
        k += 1;
    }
    for _ in 0..HALVINGS {
        sum = sum.mul_round(&sum, wi, HALF_EVEN);
    }
    let value = round_w(&sum.scale_pow10(n), w + 2);
    Ok(Approx::relative(value, w))
}

pub fn ln(x: &Decimal, w: u32) -> Result<Approx, KernelError> {
    if !x.is_positive() {
        return Err(KernelError::Domain);
    }
    if *x == Decimal::one() {
        return Ok(Approx::exact(Decimal::zero()));
    }
    let half = Decimal::one().half();
    let two = Decimal::from(2);
    let (y, halvings, decade) = if *x >= half && *x <= two {
        (x.clone(), 0u32, 0i64)
    } else {
        let e = x.magnitude().unwrap();
        let mut y = x.scale_pow10(-e);
        let mut j = 0;
        while y >= two {
            y = y.half();
            j += 1;
        }
        (y, j, e)
    };
    let wi = w + GUARD + digits_of(decade);
    let num = y.sub_round(&Decimal::one(), wi, HALF_EVEN);
    let den = y.add_round(&Decimal::one(), wi, HALF_EVEN);
    let z = num.div_round(&den, wi, HALF_EVEN).unwrap();
    let mut value = odd_series(&z, wi, false).mul_round(&two, wi, HALF_EVEN);
    if halvings > 0 {
        let t = ln2_raw(wi).mul_round(&Decimal::from(halvings as i64), wi, HALF_EVEN);
        value = value.add_round(&t, wi, HALF_EVEN);
    }
    if decade != 0 {
        let t = ln10_raw(wi).mul_round(&Decimal::from(decade), wi, HALF_EVEN);
        value = value.add_round(&t, wi, HALF_EVEN);
    }
    let value = round_w(&value, w + 2);
    if halvings == 0 && decade == 0 {
        Ok(Approx::relative(value, w))
    } else {
        // |ln x| >= ln 2 here, so an absolute 10^-w term is still relative-sized
        let mut a = Approx::relative(value, w);
        a.err = &a.err + &Decimal::pow10(-(w as i64));
        Ok(a)
    }
}

pub fn log10(x: &Decimal, w: u32) -> Result<Approx, KernelError> {
    if !x.is_positive() {
        return Err(KernelError::Domain);
    }
    let n = x.normalized();
    if n.mantissa() == &num_bigint::BigInt::from(1) {
        return Ok(Approx::exact(Decimal::from(n.exponent())));
    }
    let num = ln(x, w + 4)?;
    let den = ln10_raw(w + 4);
    let value = num.value.div_round(&den, w + 2, HALF_EVEN).unwrap();
    let mut a = Approx::relative(value, w);
    // ln10 > 2, so the numerator's error shrinks in the quotient
    a.err = &a.err + &num.err;
    Ok(a)
}

/// `(sin x, cos x)` with absolute error bounds.
pub fn sin_cos(x: &Decimal, w: u32) -> Result<(Approx, Approx), KernelError> {
    if x.is_zero() {
        return Ok((Approx::exact(Decimal::zero()), Approx::exact(Decimal::one())));
    }
    let mag = x.magnitude().unwrap();
    if mag >= ARG_LIMIT_MAGNITUDE {
        return Err(KernelError::Overflow);
    }
    let int_digits = mag.max(0) as u32 + 1;
    let rough_half_pi = pi_raw(int_digits + 12).half();
    let k = x
        .div_round(&rough_half_pi, int_digits + 6, HALF_EVEN)
        .unwrap()
        .quantize(0, HALF_EVEN)
        .to_i64()
        .unwrap_or(0);
    let wi = w + GUARD + int_digits;
    let r = if k == 0 {
        x.clone()
    } else {
        let half_pi = pi_raw(wi + 2).half();
        x.sub_round(&half_pi.mul_round(&Decimal::from(k), wi + 2, HALF_EVEN), wi, HALF_EVEN)
    };
    let r2 = r.mul_round(&r, wi, HALF_EVEN);
    let stop = Decimal::pow10(-(wi as i64) - 2);
    // sin r
    let mut term = r.clone();
    let mut s = r.clone();
    let mut n = 1i64;
    loop {
        term = term
            .mul_round(&r2, wi, HALF_EVEN)
            .div_round(&Decimal::from((n + 1) * (n + 2)), wi, HALF_EVEN)
            .unwrap();
        if term.abs() < stop {
            break;
        }
        s = if (n / 2) % 2 == 0 {
            s.sub_round(&term, wi, HALF_EVEN)
        } else {
            s.add_round(&term, wi, HALF_EVEN)
        };
        n += 2;
    }
    // cos r
    let mut term = Decimal::one();
    let mut c = Decimal::one();
    let mut n = 0i64;
    loop {
        term = term
            .mul_round(&r2, wi, HALF_EVEN)
            .div_round(&Decimal::from((n + 1) * (n + 2)), wi, HALF_EVEN)
            .unwrap();
        if term.abs() < stop {
            break;
        }
        c = if (n / 2) % 2 == 0 {
            c.sub_round(&term, wi, HALF_EVEN)
        } else {
            c.add_round(&term, wi, HALF_EVEN)
        };
        n += 2;
    }
    let (sv, cv) = match k.rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    };
    let abs_err = Decimal::pow10(-(w as i64));
    Ok((
        Approx { value: round_w(&sv, wi), err: abs_err.clone() },
        Approx { value: round_w(&cv, wi), err: abs_err },
    ))
}

pub fn tan(x: &Decimal, w: u32) -> Result<Approx, KernelError> {
    let (s, c) = sin_cos(x, w + 4)?;
    if c.value.abs() <= c.err.mul_round(&Decimal::from(2), 4, Rounding::Ceiling) {
        return Err(KernelError::Pole);
    }
    let value = s.value.div_round(&c.value, w + 4, HALF_EVEN).unwrap();
    // |s/c - s'/c'| <= (err_s + |t| err_c) / (|c| - err_c)
    let up = Rounding::Ceiling;
    let numer = s.err.add_round(&value.abs().mul_round(&c.err, 6, up), 6, up);
    let denom = (c.value.abs() - &c.err).round(6, Rounding::Floor);
    let err = numer
        .div_round(&denom, 6, up)
        .unwrap()
        .add_round(&value.ulp(w + 4), 6, up);
    Ok(Approx { value, err })
}

/// `x^n` for integer `n`; exact when the result is small enough.
pub fn powi(x: &Decimal, n: i64, w: u32) -> Result<Approx, KernelError> {
    if n == 0 {
        return Ok(Approx::exact(Decimal::one()));
    }
    if x.is_zero() {
        return if n > 0 { Ok(Approx::exact(Decimal::zero())) } else { Err(KernelError::Domain) };
    }
    let m = n.unsigned_abs();
    if n > 0 && x.digits().saturating_mul(m) <= 4 * w as u64 + 40 {
        let mut acc = Decimal::one();
        let mut base = x.clone();
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        return Ok(Approx::exact(acc));
    }
    let wi = w + GUARD + digits_of(n) * 2;
    let mut acc = Decimal::one();
    let mut base = round_w(x, wi);
    let mut e = m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul_round(&base, wi, HALF_EVEN);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul_round(&base, wi, HALF_EVEN);
        }
    }
    if n < 0 {
        acc = Decimal::one().div_round(&acc, wi, HALF_EVEN).unwrap();
    }
    Ok(Approx::relative(round_w(&acc, w + 2), w))
}

/// `x^y = exp(y ln x)` for `x > 0`.
pub fn pow_real(x: &Decimal, y: &Decimal, w: u32) -> Result<Approx, KernelError> {
    if !x.is_positive() {
        return Err(KernelError::Domain);
    }
    let lx = ln(x, w + 6)?;
    let t = lx.value.mul_round(y, w + 6, HALF_EVEN);
    let extra = t.magnitude().unwrap_or(0).max(0) as u32 + 2;
    let wi = w + extra;
    let lx = ln(x, wi + 6)?;
    let t = lx.value.mul_round(y, wi + 6, HALF_EVEN);
    let up = Rounding::Ceiling;
    let t_err = lx
        .err
        .mul_round(&y.abs(), 6, up)
        .add_round(&t.ulp(wi + 6), 6, up);
    let e = exp(&t, wi)?;
    // |exp(t + d) - exp(t)| <= exp(t) * 1.1 |d| for |d| < 0.01
    let spread = e
        .value
        .abs()
        .mul_round(&t_err, 6, up)
        .mul_round(&"1.1".parse().unwrap(), 6, up);
    Ok(Approx { value: e.value, err: e.err.add_round(&spread, 6, up) })
}

/// Rounds to nearest at `precision`, retrying at higher working precision
/// until the bound no longer straddles a rounding boundary.
pub fn correctly_rounded<F>(precision: u32, f: F) -> Result<Decimal, KernelError>
where
    F: Fn(u32) -> Result<Approx, KernelError>,
{
    let mut w = precision + 10;
    let limit = precision + 110;
    loop {
        let a = f(w)?;
        let nearest = a.value.round(precision, HALF_EVEN);
        if a.err.is_zero() {
            return Ok(nearest);
        }
        let lo = (&a.value - &a.err).round(precision, HALF_EVEN);
        let hi = (&a.value + &a.err).round(precision, HALF_EVEN);
        if (lo == hi && lo == nearest) || w >= limit {
            return Ok(nearest);
        }
        w = (w + 25).min(limit);
    }
}
