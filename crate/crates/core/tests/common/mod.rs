#![allow(dead_code)]

use std::path::PathBuf;

use dif::cli::ProblemFile;
use dif::decimal::Decimal;
use dif::dif::{DifProblem, TauSequence};
use dif::expr::{BinaryOp, Constant, Expr, Function};
use proptest::prelude::*;
use serde::Deserialize;

pub const ENTROPY_G1: &str = "((1-3*x)/2)*ln((1-3*x)/2) + 2*((1-24*x)/5)*ln((1-24*x)/5)";
pub const ENTROPY_G2: &str = "3*((1-15*x)/4)*ln((1-15*x)/4)";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn problem(name: &str) -> DifProblem {
    ProblemFile::load(&fixture(name)).unwrap().to_problem().unwrap()
}

pub fn d(s: &str) -> Decimal {
    s.parse().unwrap()
}

pub fn tau(points: &[&str]) -> TauSequence {
    TauSequence::new(points.iter().map(|s| d(s)).collect()).unwrap()
}

pub fn uniform_tau(n: i64) -> TauSequence {
    let pts = (0..=n)
        .map(|k| Decimal::from(k).div_round(&Decimal::from(n), 12, dif::decimal::Rounding::HalfEven).unwrap())
        .collect();
    TauSequence::new(pts).unwrap()
}

#[derive(Debug, Deserialize)]
pub struct TauFixture {
    pub name: String,
    pub problem: String,
    pub tau: Vec<Decimal>,
    pub accepted: bool,
    pub first_violation: Option<usize>,
    /// Diff of the violating row from an external 20-digit computation.
    pub violation_diff: Option<Decimal>,
}

impl TauFixture {
    pub fn sequence(&self) -> TauSequence {
        TauSequence::new(self.tau.clone()).unwrap()
    }
}

pub fn tau_fixtures() -> Vec<TauFixture> {
    let text = std::fs::read_to_string(fixture("tau_fixtures.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Plain binary floating point evaluation, independent of the decimal code.
pub fn eval_f64(e: &Expr, x: f64) -> f64 {
    match e {
        Expr::Number(l) => l.text().parse().unwrap(),
        Expr::Constant(Constant::Pi) => std::f64::consts::PI,
        Expr::Constant(Constant::Euler) => std::f64::consts::E,
        Expr::Variable(_) => x,
        Expr::Neg(a) => -eval_f64(a, x),
        Expr::Binary(op, a, b) => {
            let (a, b) = (eval_f64(a, x), eval_f64(b, x));
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => a / b,
                BinaryOp::Pow => a.powf(b),
            }
        }
        Expr::Call(f, a) => {
            let a = eval_f64(a, x);
            match f {
                Function::Ln => a.ln(),
                Function::Exp => a.exp(),
                Function::Sin => a.sin(),
                Function::Cos => a.cos(),
                Function::Tan => a.tan(),
                Function::Sqrt => a.sqrt(),
                Function::Abs => a.abs(),
                Function::Log10 => a.log10(),
            }
        }
    }
}

fn small_number() -> impl Strategy<Value = Expr> {
    (1i64..40, 0u32..3).prop_map(|(m, k)| Expr::number(Decimal::new(m.into(), -(k as i64))))
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        3 => Just(Expr::var("x")),
        2 => small_number(),
        1 => Just(Expr::Constant(Constant::Pi)),
        1 => Just(Expr::Constant(Constant::Euler)),
    ]
}

/// Any grammar construct, including ones that may hit a domain error.
pub fn any_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (inner.clone(), inner.clone(), 0usize..5).prop_map(|(a, b, op)| {
                let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Pow][op];
                Expr::binary(op, a, b)
            }),
            (inner, 0usize..Function::ALL.len()).prop_map(|(a, f)| Expr::call(Function::ALL[f], a)),
        ]
    })
}

/// Smooth expressions with moderate values on `[0.2, 1.8]`: no `abs`, no
/// `tan`, logarithms and roots only of sums that stay positive.
pub fn smooth_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (inner.clone(), inner.clone(), 0usize..4).prop_map(|(a, b, op)| {
                let op = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Add][op];
                Expr::binary(op, a, b)
            }),
            (inner.clone(), 1i64..4).prop_map(|(a, n)| Expr::binary(BinaryOp::Pow, a, Expr::int(n))),
            inner.clone().prop_map(|a| Expr::binary(BinaryOp::Div, a, Expr::binary(BinaryOp::Add, Expr::int(2), Expr::call(Function::Sin, Expr::var("x"))))),
            (inner, 0usize..4).prop_map(|(a, f)| {
                let positive = Expr::binary(BinaryOp::Add, Expr::int(1), Expr::binary(BinaryOp::Pow, a.clone(), Expr::int(2)));
                match f {
                    0 => Expr::call(Function::Sin, a),
                    1 => Expr::call(Function::Cos, a),
                    2 => Expr::call(Function::Ln, positive),
                    _ => Expr::call(Function::Sqrt, positive),
                }
            }),
        ]
    })
}

/// Positive expressions without subtraction, so no cancellation amplifies
/// rounding: sums, products, quotients, square roots and `ln(2 + .)`.
pub fn positive_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![3 => Just(Expr::var("x")), 2 => small_number(), 1 => Just(Expr::Constant(Constant::Pi))];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), 0usize..3).prop_map(|(a, b, op)| {
                Expr::binary([BinaryOp::Add, BinaryOp::Mul, BinaryOp::Div][op], a, b)
            }),
            inner.clone().prop_map(|a| Expr::call(Function::Sqrt, a)),
            inner.clone().prop_map(|a| Expr::call(Function::Ln, Expr::binary(BinaryOp::Add, Expr::int(2), a))),
            inner.prop_map(|a| Expr::call(Function::Exp, Expr::binary(BinaryOp::Div, a.clone(), Expr::binary(BinaryOp::Add, Expr::int(1), a)))),
        ]
    })
}

/// A decimal in `[lo, hi]` with at most `places` decimals.
pub fn decimal_in(lo: f64, hi: f64, places: u32) -> impl Strategy<Value = Decimal> {
    let scale = 10f64.powi(places as i32);
    ((lo * scale) as i64..=(hi * scale) as i64).prop_map(move |m| Decimal::new(m.into(), -(places as i64)))
}
