//! Floor rounding to decimal places, the default accuracy heuristic, and
//! bisection for monotone functions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::{Decimal, Rounding};
use crate::expr::{eval_point, EvalError, Expr, PrecisionContext};

/// Number of decimal places τ candidates are floored to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Accuracy {
    pub decimal_places: u32,
}

impl Accuracy {
    pub fn new(decimal_places: u32) -> Self {
        Accuracy { decimal_places }
    }
}

/// Rounds `x` down to `n` decimal places, without trailing zeros.
pub fn ffloor(x: &Decimal, n: u32) -> Decimal {
    x.quantize(-(n as i64), Rounding::Floor).normalized()
}

/// `2 - floor(log10(b - a))`, clamped at zero. Requires `a < b`.
pub fn default_accuracy(a: &Decimal, b: &Decimal) -> Accuracy {
    let width = b - a;
    let mag = width.magnitude().expect("a < b");
    Accuracy::new((2 - mag).max(0) as u32)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("f({at}) = {value} is already above the target {target}")]
    BracketLow { at: Decimal, value: Decimal, target: Decimal },
    #[error("f({at}) = {value} never reaches the target {target}")]
    BracketHigh { at: Decimal, value: Decimal, target: Decimal },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Bisection tolerance `10^(2 - digits)`.
pub fn solve_tolerance(ctx: PrecisionContext) -> Decimal {
    Decimal::pow10(2 - ctx.digits() as i64)
}

/// Finds `t` in `[lo, hi]` with `f(t)` close to `target`, for `f` increasing.
///
/// Bisects until the bracket is narrower than [`solve_tolerance`]; the
/// returned point is the left end of the final bracket, so `f(t) <= target`
/// holds at working precision.
pub fn solve_monotone(
    f: &Expr,
    var: &str,
    target: &Decimal,
    lo: &Decimal,
    hi: &Decimal,
    ctx: PrecisionContext,
) -> Result<Decimal, SolveError> {
    let f_lo = eval_point(f, var, lo, ctx)?;
    if f_lo > *target {
        return Err(SolveError::BracketLow { at: lo.clone(), value: f_lo, target: target.clone() });
    }
    if f_lo == *target {
        return Ok(lo.clone());
    }
    let f_hi = eval_point(f, var, hi, ctx)?;
    if f_hi < *target {
        return Err(SolveError::BracketHigh { at: hi.clone(), value: f_hi, target: target.clone() });
    }
    let tol = solve_tolerance(ctx);
    let (mut a, mut b) = (lo.clone(), hi.clone());
    // at most a few hundred halvings even for absurd widths
    for _ in 0..2000 {
        if &b - &a <= tol {
            break;
        }
        let mid = (&a + &b).half();
        let v = eval_point(f, var, &mid, ctx)?;
        match v.cmp(target) {
            std::cmp::Ordering::Less => a = mid,
            std::cmp::Ordering::Greater => b = mid,
            std::cmp::Ordering::Equal => return Ok(mid),
        }
    }
    Ok(a)
}

/// `(relax*r + tt)/(relax + 1)`, rounded at `digits` significant digits.
pub fn blend(tt: &Decimal, r: &Decimal, relax: &Decimal, digits: u32) -> Decimal {
    let num = &(relax * r) + tt;
    let den = relax + &Decimal::one();
    num.div_round(&den, digits, Rounding::HalfEven).expect("relax > 0")
}
