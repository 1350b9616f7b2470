//! Certificates for `g1 > g2` on `[alpha, beta]` when both sides move in the
//! same direction.
//!
//! For increasing `g1`, `g2` and points `alpha = t1 < ... < tn = beta`, the
//! chain `g2(t_{i+1}) < g1(t_i)` implies `g2(x) <= g2(t_{i+1}) < g1(t_i) <=
//! g1(x)` on every `[t_i, t_{i+1}]`. The decreasing case is the mirror image.
//! Monotonicity itself is a premise here; see [`crate::proofs`] for
//! discharging it.

mod certificate;
mod generate;
mod verify;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::Decimal;
use crate::expr::{eval_point, free_variables, EvalError, Expr, PrecisionContext};

pub use certificate::{check_certificate, check_certificate_at, Certificate, CertificateCheck, ProblemEcho};
pub use generate::{generate_tau, GenerateError, GenerationFailure, FailureReason};
pub use verify::{verify_tau, verify_tau_interval, IntervalRow, IntervalVerification, Verification, VerificationRow};

pub const SWAP_MESSAGE: &str = "Function 1 is smaller. Swap the functions.";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DifError {
    #[error("Function 1 is smaller. Swap the functions.")]
    Swap,
    #[error("Functions have more than one variable: {}", .0.iter().cloned().collect::<Vec<_>>().join(", "))]
    MultiVariable(BTreeSet<String>),
    #[error("interval [{alpha}, {beta}] is empty")]
    EmptyInterval { alpha: Decimal, beta: Decimal },
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("invalid tau sequence: {0}")]
    Tau(#[from] TauError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("certificate does not match the problem: {0}")]
    ProblemMismatch(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "inc")]
    Increasing,
    #[serde(rename = "dec")]
    Decreasing,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Float,
    Interval,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Float => "float",
            Mode::Interval => "interval",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DifOptions {
    pub steps: u32,
    /// Decimal places for τ candidates; `None` picks the default accuracy.
    pub digits_override: Option<u32>,
    pub relax: Decimal,
    pub precision: PrecisionContext,
    /// Smallest diff counted as rigorous; `None` means `10^(6 - digits)`.
    pub margin: Option<Decimal>,
    pub mode: Mode,
}

impl Default for DifOptions {
    fn default() -> Self {
        DifOptions {
            steps: 100,
            digits_override: None,
            relax: Decimal::from(99),
            precision: PrecisionContext::default(),
            margin: None,
            mode: Mode::Float,
        }
    }
}

impl DifOptions {
    pub fn margin(&self) -> Decimal {
        self.margin
            .clone()
            .unwrap_or_else(|| Decimal::pow10(6 - self.precision.digits() as i64))
    }

    fn validate(&self) -> Result<(), DifError> {
        if self.steps == 0 {
            return Err(DifError::InvalidOption("steps must be at least 1".into()));
        }
        if !self.relax.is_positive() {
            return Err(DifError::InvalidOption(format!("relax must be positive, got {}", self.relax)));
        }
        if let Some(m) = &self.margin {
            if !m.is_positive() {
                return Err(DifError::InvalidOption(format!("margin must be positive, got {m}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DifProblem {
    pub g1: Expr,
    pub g2: Expr,
    pub var: String,
    pub alpha: Decimal,
    pub beta: Decimal,
    pub options: DifOptions,
}

impl DifProblem {
    /// Detects the variable; constant inputs get `x`.
    pub fn new(g1: Expr, g2: Expr, alpha: Decimal, beta: Decimal, options: DifOptions) -> Result<Self, DifError> {
        let vars = free_variables(&g1, &g2);
        if vars.len() > 1 {
            return Err(DifError::MultiVariable(vars));
        }
        let var = vars.into_iter().next().unwrap_or_else(|| "x".to_string());
        Self::with_var(g1, g2, &var, alpha, beta, options)
    }

    pub fn with_var(
        g1: Expr,
        g2: Expr,
        var: &str,
        alpha: Decimal,
        beta: Decimal,
        options: DifOptions,
    ) -> Result<Self, DifError> {
        let vars = free_variables(&g1, &g2);
        if vars.len() > 1 {
            return Err(DifError::MultiVariable(vars));
        }
        if let Some(v) = vars.iter().next() {
            if v != var {
                return Err(DifError::ProblemMismatch(format!("expressions use `{v}`, not `{var}`")));
            }
        }
        if alpha >= beta {
            return Err(DifError::EmptyInterval { alpha, beta });
        }
        options.validate()?;
        Ok(DifProblem { g1, g2, var: var.to_string(), alpha, beta, options })
    }

    pub fn ctx(&self) -> PrecisionContext {
        self.options.precision
    }

    /// Same problem at another working precision.
    pub fn at_precision(&self, ctx: PrecisionContext) -> DifProblem {
        let mut p = self.clone();
        p.options.precision = ctx;
        p
    }

    pub(crate) fn eval(&self, e: &Expr, x: &Decimal) -> Result<Decimal, EvalError> {
        eval_point(e, &self.var, x, self.ctx())
    }
}

/// A strictly increasing list of at least two points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Decimal>", into = "Vec<Decimal>")]
pub struct TauSequence {
    points: Vec<Decimal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TauError {
    #[error("need at least two points, got {0}")]
    TooShort(usize),
    #[error("points must be strictly increasing: entry {index} ({value}) does not exceed its predecessor")]
    NotIncreasing { index: usize, value: Decimal },
    #[error("sequence must start at {expected}, starts at {found}")]
    WrongStart { expected: Decimal, found: Decimal },
    #[error("sequence must end at {expected}, ends at {found}")]
    WrongEnd { expected: Decimal, found: Decimal },
}

impl TauSequence {
    pub fn new(points: Vec<Decimal>) -> Result<Self, TauError> {
        if points.len() < 2 {
            return Err(TauError::TooShort(points.len()));
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(TauError::NotIncreasing { index: i + 1, value: w[1].clone() });
            }
        }
        Ok(TauSequence { points })
    }

    pub fn points(&self) -> &[Decimal] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn check_endpoints(&self, alpha: &Decimal, beta: &Decimal) -> Result<(), TauError> {
        let first = &self.points[0];
        let last = &self.points[self.points.len() - 1];
        if first != alpha {
            return Err(TauError::WrongStart { expected: alpha.clone(), found: first.clone() });
        }
        if last != beta {
            return Err(TauError::WrongEnd { expected: beta.clone(), found: last.clone() });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Decimal>> for TauSequence {
    type Error = TauError;
    fn try_from(points: Vec<Decimal>) -> Result<Self, TauError> {
        TauSequence::new(points)
    }
}

impl From<TauSequence> for Vec<Decimal> {
    fn from(t: TauSequence) -> Self {
        t.points
    }
}

impl fmt::Display for TauSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Direction of the pair plus the normalized increasing pair `(f1, f2)`.
///
/// Fails with [`DifError::Swap`] when `g1(alpha) < g2(alpha)`. The direction is
/// read from `g1(alpha)` versus `g1(beta)`.
pub fn detect_direction(p: &DifProblem) -> Result<(Direction, Expr, Expr), DifError> {
    let ga = p.eval(&p.g1, &p.alpha)?;
    let gb = p.eval(&p.g2, &p.alpha)?;
    if ga < gb {
        return Err(DifError::Swap);
    }
    let g1_beta = p.eval(&p.g1, &p.beta)?;
    if ga < g1_beta {
        Ok((Direction::Increasing, p.g1.clone(), p.g2.clone()))
    } else {
        Ok((Direction::Decreasing, Expr::neg(p.g2.clone()), Expr::neg(p.g1.clone())))
    }
}
