//! Symbolic differentiation with light simplification.

use thiserror::Error;

use super::{BinaryOp, Expr, Function};
use crate::decimal::Decimal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("`{0}` is not differentiable everywhere in the variable")]
    NotDifferentiable(String),
}

/// d/d`var` of `e`.
pub fn differentiate(e: &Expr, var: &str) -> Result<Expr, DiffError> {
    if !e.contains_var(var) {
        return Ok(Expr::int(0));
    }
    Ok(match e {
        Expr::Number(_) | Expr::Constant(_) => Expr::int(0),
        Expr::Variable(_) => Expr::int(1),
        Expr::Neg(a) => neg(differentiate(a, var)?),
        Expr::Binary(op, a, b) => {
            let (a, b) = (&**a, &**b);
            match op {
                BinaryOp::Add => add(differentiate(a, var)?, differentiate(b, var)?),
                BinaryOp::Sub => sub(differentiate(a, var)?, differentiate(b, var)?),
                BinaryOp::Mul => add(
                    mul(differentiate(a, var)?, b.clone()),
                    mul(a.clone(), differentiate(b, var)?),
                ),
                BinaryOp::Div => {
                    if !b.contains_var(var) {
                        div(differentiate(a, var)?, b.clone())
                    } else {
                        let num = sub(
                            mul(differentiate(a, var)?, b.clone()),
                            mul(a.clone(), differentiate(b, var)?),
                        );
                        div(num, pow(b.clone(), Expr::int(2)))
                    }
                }
                BinaryOp::Pow => {
                    if !b.contains_var(var) {
                        // c * u^(c-1) * u'
                        let c1 = match b.as_number() {
                            Some(c) => Expr::number(&c - &Decimal::one()),
                            None => sub(b.clone(), Expr::int(1)),
                        };
                        mul(mul(b.clone(), pow(a.clone(), c1)), differentiate(a, var)?)
                    } else if !a.contains_var(var) {
                        // a^v * ln(a) * v'
                        mul(
                            mul(e.clone(), Expr::call(Function::Ln, a.clone())),
                            differentiate(b, var)?,
                        )
                    } else {
                        // u^v * (v' ln u + v u'/u)
                        let inner = add(
                            mul(differentiate(b, var)?, Expr::call(Function::Ln, a.clone())),
                            div(mul(b.clone(), differentiate(a, var)?), a.clone()),
                        );
                        mul(e.clone(), inner)
                    }
                }
            }
        }
        Expr::Call(f, a) => {
            let u = &**a;
            let du = differentiate(u, var)?;
            let outer = match f {
                Function::Ln => div(Expr::int(1), u.clone()),
                Function::Log10 => div(
                    Expr::int(1),
                    mul(u.clone(), Expr::call(Function::Ln, Expr::int(10))),
                ),
                Function::Exp => e.clone(),
                Function::Sin => Expr::call(Function::Cos, u.clone()),
                Function::Cos => neg(Expr::call(Function::Sin, u.clone())),
                Function::Tan => add(Expr::int(1), pow(e.clone(), Expr::int(2))),
                Function::Sqrt => div(Expr::int(1), mul(Expr::int(2), e.clone())),
                Function::Abs => return Err(DiffError::NotDifferentiable(e.to_string())),
            };
            mul(outer, du)
        }
    })
}

fn is_value(e: &Expr, v: i64) -> bool {
    e.as_number().is_some_and(|n| n == Decimal::from(v))
}

fn both_numbers(a: &Expr, b: &Expr) -> Option<(Decimal, Decimal)> {
    Some((a.as_number()?, b.as_number()?))
}

fn neg(a: Expr) -> Expr {
    if let Some(n) = a.as_number() {
        return Expr::number(-n);
    }
    match a {
        Expr::Neg(inner) => *inner,
        other => Expr::neg(other),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if let Some((x, y)) = both_numbers(&a, &b) {
        return Expr::number(&x + &y);
    }
    if is_value(&a, 0) {
        return b;
    }
    if is_value(&b, 0) {
        return a;
    }
    if let Expr::Neg(inner) = b {
        return Expr::binary(BinaryOp::Sub, a, *inner);
    }
    Expr::binary(BinaryOp::Add, a, b)
}

fn sub(a: Expr, b: Expr) -> Expr {
    if let Some((x, y)) = both_numbers(&a, &b) {
        return Expr::number(&x - &y);
    }
    if is_value(&b, 0) {
        return a;
    }
    if is_value(&a, 0) {
        return neg(b);
    }
    if let Expr::Neg(inner) = b {
        return Expr::binary(BinaryOp::Add, a, *inner);
    }
    Expr::binary(BinaryOp::Sub, a, b)
}

fn mul(a: Expr, b: Expr) -> Expr {
    if let Some((x, y)) = both_numbers(&a, &b) {
        return Expr::number(&x * &y);
    }
    if is_value(&a, 0) || is_value(&b, 0) {
        return Expr::int(0);
    }
    if is_value(&a, 1) {
        return b;
    }
    if is_value(&b, 1) {
        return a;
    }
    if is_value(&a, -1) {
        return neg(b);
    }
    if is_value(&b, -1) {
        return neg(a);
    }
    Expr::binary(BinaryOp::Mul, a, b)
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_value(&a, 0) {
        return Expr::int(0);
    }
    if is_value(&b, 1) {
        return a;
    }
    Expr::binary(BinaryOp::Div, a, b)
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is_value(&b, 1) {
        return a;
    }
    if is_value(&b, 0) {
        return Expr::int(1);
    }
    Expr::binary(BinaryOp::Pow, a, b)
}
