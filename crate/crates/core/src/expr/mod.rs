//! One-variable real expressions.
//!
//! [`Expr`] is a plain tree. Parsing lives in [`parse`], symbolic
//! differentiation in [`diff`], and the two evaluators in [`eval`] (pointwise,
//! at a fixed number of significant digits) and [`interval`] (outward-rounded
//! enclosures).

mod diff;
mod eval;
mod interval;
mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::decimal::Decimal;

pub use diff::{differentiate, DiffError};
pub use eval::{eval_point, DomainKind, EvalError, PrecisionContext, DEFAULT_DIGITS};
pub use interval::{eval_interval, IntervalValue};
pub use parse::{parse, ParseError};

/// A numeric literal. The source text is kept verbatim so that printing a
/// parsed tree reproduces the digits the user wrote.
#[derive(Clone, Debug, PartialEq)]
pub struct Literal {
    text: String,
    value: Decimal,
}

impl Literal {
    /// Builds a literal from a non-negative value.
    pub fn from_value(value: Decimal) -> Self {
        debug_assert!(!value.is_negative());
        Literal { text: value.to_string(), value }
    }

    pub(crate) fn from_text(text: &str) -> Option<Self> {
        let value = text.parse().ok()?;
        Some(Literal { text: text.to_string(), value })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn value(&self) -> &Decimal {
        &self.value
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    Euler,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => " + ",
            BinaryOp::Sub => " - ",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Function {
    Ln,
    Exp,
    Sin,
    Cos,
    Tan,
    Sqrt,
    Abs,
    Log10,
}

impl Function {
    pub const ALL: [Function; 8] = [
        Function::Ln,
        Function::Exp,
        Function::Sin,
        Function::Cos,
        Function::Tan,
        Function::Sqrt,
        Function::Abs,
        Function::Log10,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::Ln => "ln",
            Function::Exp => "exp",
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Sqrt => "sqrt",
            Function::Abs => "abs",
            Function::Log10 => "log10",
        }
    }

    pub fn from_name(name: &str) -> Option<Function> {
        Function::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Number(Literal),
    Constant(Constant),
    Variable(String),
    Neg(Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Function, Box<Expr>),
}

impl Expr {
    /// A numeric node; negative values become `Neg(literal)` so that every
    /// tree prints and re-parses to itself.
    pub fn number(value: Decimal) -> Expr {
        if value.is_negative() {
            Expr::Neg(Box::new(Expr::Number(Literal::from_value(value.abs()))))
        } else {
            Expr::Number(Literal::from_value(value))
        }
    }

    pub fn int(v: i64) -> Expr {
        Expr::number(Decimal::from(v))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Variable(name.to_string())
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(f: Function, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    /// The numeric value of a literal, looking through negations.
    pub fn as_number(&self) -> Option<Decimal> {
        match self {
            Expr::Number(l) => Some(l.value.clone()),
            Expr::Neg(inner) => inner.as_number().map(|v| -v),
            _ => None,
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Expr::Variable(v) => v == name,
            Expr::Number(_) | Expr::Constant(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.contains_var(name),
            Expr::Binary(_, a, b) => a.contains_var(name) || b.contains_var(name),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.variables().is_empty()
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Variable(v) => {
                out.insert(v.clone());
            }
            Expr::Number(_) | Expr::Constant(_) => {}
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Count of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Number(_) | Expr::Constant(_) | Expr::Variable(_) => 1,
            Expr::Neg(e) | Expr::Call(_, e) => 1 + e.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinaryOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

/// Identifiers appearing in either expression. `pi` and `e` are constants
/// and never show up here.
pub fn free_variables(e1: &Expr, e2: &Expr) -> BTreeSet<String> {
    let mut vars = e1.variables();
    vars.extend(e2.variables());
    vars
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(l) => f.write_str(&l.text),
            Expr::Constant(Constant::Pi) => f.write_str("pi"),
            Expr::Constant(Constant::Euler) => f.write_str("e"),
            Expr::Variable(v) => f.write_str(v),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, e.precedence() < 3)
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(BinaryOp::Pow, a, b) => {
                write_child(f, a, a.precedence() <= 4)?;
                f.write_str("^")?;
                write_child(f, b, b.precedence() < 4)
            }
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                write_child(f, a, a.precedence() < p)?;
                f.write_str(op.symbol())?;
                write_child(f, b, b.precedence() <= p)
            }
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printing_uses_minimal_parentheses() {
        let cases = [
            ("a - (b - c)", "a - (b - c)"),
            ("(a - b) - c", "a - b - c"),
            ("2^3^2", "2^3^2"),
            ("(2^3)^2", "(2^3)^2"),
            ("-x^2", "-x^2"),
            ("(-x)^2", "(-x)^2"),
            ("x^-2", "x^(-2)"),
            ("a*-b", "a*-b"),
            ("-(a*b)", "-(a*b)"),
            ("a/(b*c)", "a/(b*c)"),
            ("ln(2)^3/2^s", "ln(2)^3/2^s"),
        ];
        for (src, printed) in cases {
            let e = parse(src).unwrap();
            assert_eq!(e.to_string(), printed, "printing {src}");
            assert_eq!(parse(printed).unwrap(), e, "re-parsing {printed}");
        }
    }

    #[test]
    fn negative_numbers_round_trip() {
        let e = Expr::binary(BinaryOp::Sub, Expr::var("x"), Expr::int(-2));
        assert_eq!(e.to_string(), "x - -2");
        assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn free_variables_skip_constants() {
        let g1 = parse("sin(2*pi*x) + e").unwrap();
        let g2 = parse("x").unwrap();
        assert_eq!(free_variables(&g1, &g2).into_iter().collect::<Vec<_>>(), vec!["x"]);
        let c = free_variables(&parse("3.5").unwrap(), &parse("2").unwrap());
        assert!(c.is_empty());
        let two = free_variables(&parse("x + y").unwrap(), &parse("x").unwrap());
        assert_eq!(two.len(), 2);
    }
}
