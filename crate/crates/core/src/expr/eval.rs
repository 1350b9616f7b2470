//! Pointwise evaluation at a fixed number of significant digits.
//!
//! Every node's result is rounded half-even to `digits` significant digits,
//! the way a decimal computer-algebra float evaluator behaves. Elementary
//! functions are correctly rounded.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{BinaryOp, Constant, Expr, Function};
use crate::decimal::{Decimal, Rounding};
use crate::elementary::{self, Approx, KernelError};

pub const DEFAULT_DIGITS: u32 = 10;

/// Working precision in significant decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrecisionContext {
    digits: u32,
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self, String> {
        if digits < 2 {
            return Err(format!("precision must be at least 2 digits, got {digits}"));
        }
        Ok(PrecisionContext { digits })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext { digits: DEFAULT_DIGITS }
    }
}

impl TryFrom<u32> for PrecisionContext {
    type Error = String;
    fn try_from(d: u32) -> Result<Self, String> {
        PrecisionContext::new(d)
    }
}

impl From<PrecisionContext> for u32 {
    fn from(c: PrecisionContext) -> u32 {
        c.digits
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    LogOfNonPositive,
    DivisionByZero,
    SqrtOfNegative,
    /// Negative base with a non-integer exponent (even roots of negatives).
    NegativeBase,
    ZeroToNonPositivePower,
    TanPole,
    Overflow,
}

impl std::fmt::Display for DomainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DomainKind::LogOfNonPositive => "logarithm of a non-positive number",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::SqrtOfNegative => "square root of a negative number",
            DomainKind::NegativeBase => "negative base raised to a non-integer power",
            DomainKind::ZeroToNonPositivePower => "zero raised to a non-positive power",
            DomainKind::TanPole => "tangent evaluated at a pole",
            DomainKind::Overflow => "argument too large",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{kind} in `{expr}`")]
    Domain { kind: DomainKind, expr: String },
    #[error("variable `{found}` has no value (evaluating in `{expected}`)")]
    UnboundVariable { found: String, expected: String },
}

impl EvalError {
    pub(crate) fn domain(kind: DomainKind, at: &Expr) -> Self {
        EvalError::Domain { kind, expr: at.to_string() }
    }
}

pub(crate) fn kernel_error(err: KernelError, at: &Expr, log_like: DomainKind) -> EvalError {
    let kind = match err {
        KernelError::Domain => log_like,
        KernelError::Overflow => DomainKind::Overflow,
        KernelError::Pole => DomainKind::TanPole,
    };
    EvalError::domain(kind, at)
}

/// Evaluates `e` with `var = x` at `ctx.digits` significant digits.
pub fn eval_point(e: &Expr, var: &str, x: &Decimal, ctx: PrecisionContext) -> Result<Decimal, EvalError> {
    let p = ctx.digits;
    let x = x.round(p, Rounding::HalfEven);
    Evaluator { var, x: &x, p }.eval(e)
}

struct Evaluator<'a> {
    var: &'a str,
    x: &'a Decimal,
    p: u32,
}

impl Evaluator<'_> {
    fn nearest(&self, f: impl Fn(u32) -> Result<Approx, KernelError>) -> Result<Decimal, KernelError> {
        elementary::correctly_rounded(self.p, f)
    }

    fn eval(&self, e: &Expr) -> Result<Decimal, EvalError> {
        let p = self.p;
        let he = Rounding::HalfEven;
        match e {
            Expr::Number(l) => Ok(l.value().round(p, he)),
            Expr::Constant(Constant::Pi) => Ok(self.nearest(|w| Ok(elementary::pi(w))).expect("pi")),
            Expr::Constant(Constant::Euler) => {
                Ok(self.nearest(|w| elementary::exp(&Decimal::one(), w)).expect("e"))
            }
            Expr::Variable(v) if v == self.var => Ok(self.x.clone()),
            Expr::Variable(v) => Err(EvalError::UnboundVariable {
                found: v.clone(),
                expected: self.var.to_string(),
            }),
            Expr::Neg(inner) => Ok(-self.eval(inner)?),
            Expr::Binary(op, a, b) => {
                let l = self.eval(a)?;
                let r = self.eval(b)?;
                match op {
                    BinaryOp::Add => Ok(l.add_round(&r, p, he)),
                    BinaryOp::Sub => Ok(l.sub_round(&r, p, he)),
                    BinaryOp::Mul => Ok(l.mul_round(&r, p, he)),
                    BinaryOp::Div => l
                        .div_round(&r, p, he)
                        .ok_or_else(|| EvalError::domain(DomainKind::DivisionByZero, e)),
                    BinaryOp::Pow => self.pow(&l, &r, e),
                }
            }
            Expr::Call(f, arg) => {
                let v = self.eval(arg)?;
                self.call(*f, &v, e)
            }
        }
    }

    fn pow(&self, base: &Decimal, exponent: &Decimal, at: &Expr) -> Result<Decimal, EvalError> {
        if let Some(n) = exponent.to_i64() {
            if base.is_zero() && n <= 0 {
                if n == 0 {
                    return Ok(Decimal::one());
                }
                return Err(EvalError::domain(DomainKind::ZeroToNonPositivePower, at));
            }
            return self
                .nearest(|w| elementary::powi(base, n, w))
                .map_err(|k| kernel_error(k, at, DomainKind::Overflow));
        }
        if base.is_zero() {
            return if exponent.is_positive() {
                Ok(Decimal::zero())
            } else {
                Err(EvalError::domain(DomainKind::ZeroToNonPositivePower, at))
            };
        }
        if base.is_negative() {
            return Err(EvalError::domain(DomainKind::NegativeBase, at));
        }
        self.nearest(|w| elementary::pow_real(base, exponent, w))
            .map_err(|k| kernel_error(k, at, DomainKind::NegativeBase))
    }

    fn call(&self, f: Function, v: &Decimal, at: &Expr) -> Result<Decimal, EvalError> {
        let p = self.p;
        match f {
            Function::Abs => Ok(v.abs().round(p, Rounding::HalfEven)),
            Function::Sqrt => v
                .sqrt_round(p, Rounding::HalfEven)
                .ok_or_else(|| EvalError::domain(DomainKind::SqrtOfNegative, at)),
            Function::Ln => self
                .nearest(|w| elementary::ln(v, w))
                .map_err(|k| kernel_error(k, at, DomainKind::LogOfNonPositive)),
            Function::Log10 => self
                .nearest(|w| elementary::log10(v, w))
                .map_err(|k| kernel_error(k, at, DomainKind::LogOfNonPositive)),
            Function::Exp => self
                .nearest(|w| elementary::exp(v, w))
                .map_err(|k| kernel_error(k, at, DomainKind::Overflow)),
            Function::Sin => self
                .nearest(|w| elementary::sin_cos(v, w).map(|s| s.0))
                .map_err(|k| kernel_error(k, at, DomainKind::Overflow)),
            Function::Cos => self
                .nearest(|w| elementary::sin_cos(v, w).map(|s| s.1))
                .map_err(|k| kernel_error(k, at, DomainKind::Overflow)),
            Function::Tan => self
                .nearest(|w| elementary::tan(v, w))
                .map_err(|k| kernel_error(k, at, DomainKind::TanPole)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    const G1: &str = "((1-3*x)/2)*ln((1-3*x)/2) + 2*((1-24*x)/5)*ln((1-24*x)/5)";
    const G2: &str = "3*((1-15*x)/4)*ln((1-15*x)/4)";

    fn ev(src: &str, x: &str, digits: u32) -> Result<Decimal, EvalError> {
        eval_point(&parse(src).unwrap(), "x", &x.parse().unwrap(), PrecisionContext::new(digits).unwrap())
    }

    #[test]
    fn identity() {
        assert_eq!(ev("x", "0.5", 10).unwrap().to_string(), "0.5");
    }

    #[test]
    fn entropy_g1_matches_ten_digit_value() {
        assert_eq!(ev(G1, "0.023", 10).unwrap().to_string(), "-0.7882434741");
    }

    #[test]
    fn entropy_g2_at_right_endpoint() {
        // 3 * 0.1 * ln(0.1)
        assert_eq!(ev(G2, "0.04", 10).unwrap().to_string(), "-0.6907755279");
    }

    #[test]
    fn inputs_are_rounded_to_working_precision() {
        assert_eq!(ev("x", "0.123456789012345", 10).unwrap().to_string(), "0.123456789");
        assert_eq!(ev("0.123456789012345", "0", 5).unwrap().to_string(), "0.12346");
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let err = ev("1 + ln(x - 1)", "0.5", 10).unwrap_err();
        assert_eq!(
            err,
            EvalError::Domain { kind: DomainKind::LogOfNonPositive, expr: "ln(x - 1)".into() }
        );
        assert!(matches!(ev("1/(x-2)", "2", 10), Err(EvalError::Domain { kind: DomainKind::DivisionByZero, .. })));
        assert!(matches!(ev("sqrt(x)", "-1", 10), Err(EvalError::Domain { kind: DomainKind::SqrtOfNegative, .. })));
        assert!(matches!(ev("x^0.5", "-4", 10), Err(EvalError::Domain { kind: DomainKind::NegativeBase, .. })));
        assert!(matches!(ev("x^-1", "0", 10), Err(EvalError::Domain { kind: DomainKind::ZeroToNonPositivePower, .. })));
        assert!(matches!(ev("y", "0", 10), Err(EvalError::UnboundVariable { .. })));
    }

    #[test]
    fn powers_and_constants() {
        assert_eq!(ev("(-2)^3", "0", 10).unwrap().to_string(), "-8");
        assert_eq!(ev("x^0", "0", 10).unwrap().to_string(), "1");
        assert_eq!(ev("2^x", "0.5", 10).unwrap().to_string(), "1.414213562");
        assert_eq!(ev("pi", "0", 10).unwrap().to_string(), "3.141592654");
        assert_eq!(ev("e", "0", 12).unwrap().to_string(), "2.71828182846");
        assert_eq!(ev("log10(x)", "0.001", 10).unwrap().to_string(), "-3");
        assert_eq!(ev("abs(x)", "-0.25", 10).unwrap().to_string(), "0.25");
    }

    #[test]
    fn precision_rejects_tiny_contexts() {
        assert!(PrecisionContext::new(1).is_err());
        assert_eq!(PrecisionContext::default().digits(), 10);
    }
}
