//! Whole proofs: the main certificate plus evidence that each operand is
//! monotone, checked recursively through derivatives.

use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::Decimal;
use crate::dif::{
    check_certificate_at, generate_tau, verify_tau, verify_tau_interval, Certificate, DifError, DifOptions,
    DifProblem, Direction, GenerateError, GenerationFailure, Mode, TauSequence,
};
use crate::expr::{differentiate, eval_point, free_variables, BinaryOp, DiffError, EvalError, Expr, PrecisionContext};

/// Nested monotonicity premises may go this deep.
pub const MAX_DEPTH: usize = 3;
/// Points used to spot-check that `h1 - h2` is the right function.
pub const GUARD_SAMPLES: usize = 64;
const GUARD_SEED: u64 = 0x0D1F_5EED;
const GUARD_DIGITS: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RigorLevel {
    AxiomaticMonotonicity,
    FloatVerified,
    Rigorous,
}

impl fmt::Display for RigorLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RigorLevel::AxiomaticMonotonicity => "axiomatic-monotonicity",
            RigorLevel::FloatVerified => "float-verified",
            RigorLevel::Rigorous => "rigorous",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    /// `h1 - h2` equals the target's derivative (negated for a decreasing
    /// claim), and `h1 > h2` is shown by a τ chain. Missing `tau` is
    /// generated on demand.
    DerivativeDif {
        h1: Expr,
        h2: Expr,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<Vec<Decimal>>,
        /// Monotonicity of `h1` and `h2` themselves.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        premises: Vec<MonotonicityClaim>,
    },
    /// Taken on trust.
    Axiomatic {
        #[serde(default)]
        note: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityClaim {
    pub target: Expr,
    pub claimed: Direction,
    pub evidence: Evidence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub original: Expr,
    pub var: String,
    pub alpha: Decimal,
    pub n: i64,
    pub transformed: Expr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofDocument {
    pub main: Certificate,
    #[serde(default)]
    pub monotonicity: Vec<MonotonicityClaim>,
    #[serde(default)]
    pub transforms: Vec<TransformRecord>,
    #[serde(default)]
    pub narrative: String,
}

impl ProofDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProofError {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Dif(#[from] DifError),
    #[error("{0}")]
    Generation(GenerationFailure),
    #[error("h1 - h2 does not match the derivative at {at}: expected {expected}, found {found}")]
    DecompositionMismatch { at: Decimal, expected: Decimal, found: Decimal },
    #[error("derivative chain fails at row {row}")]
    ChainRejected { row: usize },
    #[error("axiomatic evidence cannot be checked")]
    NotDerivative,
    #[error("monotonicity premises nest deeper than {MAX_DEPTH}")]
    DepthExceeded,
    #[error("exponent must be non-zero")]
    ZeroExponent,
    #[error("{0}")]
    Inconsistent(String),
    #[error("{path}: {source}")]
    Component { path: String, source: Box<ProofError> },
}

impl From<GenerateError> for ProofError {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::Failed(f) => ProofError::Generation(f),
            GenerateError::Problem(p) => ProofError::Dif(p),
        }
    }
}

impl ProofError {
    fn at(self, path: &str) -> ProofError {
        ProofError::Component { path: path.to_string(), source: Box::new(self) }
    }

    /// Dotted location of the failing component, if any.
    pub fn path(&self) -> Option<&str> {
        match self {
            ProofError::Component { path, .. } => Some(path),
            _ => None,
        }
    }
}

/// `(var - alpha + 1)^n * f`.
pub fn shift_power_transform(f: &Expr, var: &str, alpha: &Decimal, n: i64) -> Result<TransformRecord, ProofError> {
    if n == 0 {
        return Err(ProofError::ZeroExponent);
    }
    let shift = &Decimal::one() - alpha;
    let x = Expr::var(var);
    let base = if shift.is_zero() {
        x
    } else if shift.is_positive() {
        Expr::binary(BinaryOp::Add, x, Expr::number(shift))
    } else {
        Expr::binary(BinaryOp::Sub, x, Expr::number(shift.abs()))
    };
    let transformed = Expr::binary(BinaryOp::Mul, Expr::binary(BinaryOp::Pow, base, Expr::int(n)), f.clone());
    Ok(TransformRecord { original: f.clone(), var: var.to_string(), alpha: alpha.clone(), n, transformed })
}

/// A claim whose evidence has been re-checked.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckedClaim {
    /// The claim with `tau` filled in.
    pub claim: MonotonicityClaim,
    pub level: RigorLevel,
    pub float_accepted: bool,
    pub interval_accepted: bool,
    pub min_margin: Decimal,
    /// Largest relative gap seen by the decomposition spot check.
    pub guard_error: Decimal,
    pub premises: Vec<CheckedClaim>,
    pub notes: Vec<String>,
}

fn claim_var(claim: &MonotonicityClaim, h1: &Expr, h2: &Expr) -> Result<String, ProofError> {
    let mut vars = free_variables(h1, h2);
    vars.extend(claim.target.variables());
    if vars.len() > 1 {
        return Err(DifError::MultiVariable(vars).into());
    }
    Ok(vars.into_iter().next().unwrap_or_else(|| "x".to_string()))
}

fn sample_points(alpha: &Decimal, beta: &Decimal, count: usize) -> Vec<Decimal> {
    let mut rng = ChaCha8Rng::seed_from_u64(GUARD_SEED);
    let width = beta - alpha;
    (0..count)
        .map(|_| {
            let u = Decimal::from(BigInt::from(rng.gen::<u64>())).div_pow2(64);
            alpha + &(&width * &u)
        })
        .collect()
}

/// Checks `|(h1 - h2) - s*target'| <= 1e-6 * max(1, |s*target'|)` at seeded
/// random points and returns the largest relative gap.
fn decomposition_guard(
    derivative: &Expr,
    sign: i64,
    h1: &Expr,
    h2: &Expr,
    var: &str,
    interval: (&Decimal, &Decimal),
    ctx: PrecisionContext,
) -> Result<Decimal, ProofError> {
    let gctx = PrecisionContext::new(ctx.digits().max(GUARD_DIGITS)).expect("digits >= 2");
    let tol = Decimal::pow10(-6);
    let mut worst = Decimal::zero();
    for x in sample_points(interval.0, interval.1, GUARD_SAMPLES) {
        let d = eval_point(derivative, var, &x, gctx)?;
        let expected = if sign < 0 { -d } else { d };
        let found = &eval_point(h1, var, &x, gctx)? - &eval_point(h2, var, &x, gctx)?;
        let scale = Decimal::max(&expected.abs(), &Decimal::one()).clone();
        let rel = (&found - &expected).abs().div_round(&scale, 6, crate::decimal::Rounding::Ceiling).expect("scale >= 1");
        if rel > tol {
            return Err(ProofError::DecompositionMismatch { at: x, expected, found });
        }
        if rel > worst {
            worst = rel;
        }
    }
    Ok(worst)
}

/// Checks a derivative-based monotonicity claim on `[alpha, beta]`.
pub fn prove_monotonicity(
    claim: &MonotonicityClaim,
    interval: (&Decimal, &Decimal),
    ctx: PrecisionContext,
) -> Result<CheckedClaim, ProofError> {
    prove_at_depth(claim, interval, ctx, 1)
}

fn prove_at_depth(
    claim: &MonotonicityClaim,
    interval: (&Decimal, &Decimal),
    ctx: PrecisionContext,
    depth: usize,
) -> Result<CheckedClaim, ProofError> {
    if depth > MAX_DEPTH {
        return Err(ProofError::DepthExceeded);
    }
    let Evidence::DerivativeDif { h1, h2, tau, premises } = &claim.evidence else {
        return Err(ProofError::NotDerivative);
    };
    let var = claim_var(claim, h1, h2)?;
    let derivative = differentiate(&claim.target, &var)?;
    let sign = if claim.claimed == Direction::Increasing { 1 } else { -1 };
    let guard_error = decomposition_guard(&derivative, sign, h1, h2, &var, interval, ctx)?;

    let options = DifOptions { precision: ctx, ..DifOptions::default() };
    let p = DifProblem::with_var(h1.clone(), h2.clone(), &var, interval.0.clone(), interval.1.clone(), options)?;
    let mut notes = Vec::new();
    let tau = match tau {
        Some(points) => TauSequence::new(points.clone()).map_err(DifError::from)?,
        None => {
            notes.push("tau generated".to_string());
            generate_tau(&p)?.tau_sequence().map_err(DifError::from)?
        }
    };
    let float = verify_tau(&p, &tau)?;
    if !float.accepted {
        return Err(ProofError::ChainRejected { row: float.first_violation.unwrap_or(tau.len()) });
    }
    let interval_check = verify_tau_interval(&p, &tau)?;
    let mut level = if interval_check.accepted { RigorLevel::Rigorous } else { RigorLevel::FloatVerified };
    if !interval_check.accepted {
        notes.push(format!("interval check rejects row {}", interval_check.first_violation.unwrap_or(tau.len())));
    }

    let mut checked_premises = Vec::new();
    if premises.is_empty() {
        notes.push("monotonicity of h1 and h2 assumed".to_string());
    }
    for (i, premise) in premises.iter().enumerate() {
        let path = format!("premises[{i}]");
        let c = match &premise.evidence {
            Evidence::Axiomatic { .. } => axiomatic(premise),
            Evidence::DerivativeDif { .. } => {
                prove_at_depth(premise, interval, ctx, depth + 1).map_err(|e| e.at(&path))?
            }
        };
        level = level.min(c.level);
        checked_premises.push(c);
    }

    let mut filled = claim.clone();
    if let Evidence::DerivativeDif { tau: slot, premises: prem, .. } = &mut filled.evidence {
        *slot = Some(tau.points().to_vec());
        *prem = checked_premises.iter().map(|c| c.claim.clone()).collect();
    }
    Ok(CheckedClaim {
        claim: filled,
        level,
        float_accepted: true,
        interval_accepted: interval_check.accepted,
        min_margin: float.min_margin,
        guard_error,
        premises: checked_premises,
        notes,
    })
}

fn axiomatic(claim: &MonotonicityClaim) -> CheckedClaim {
    CheckedClaim {
        claim: claim.clone(),
        level: RigorLevel::AxiomaticMonotonicity,
        float_accepted: false,
        interval_accepted: false,
        min_margin: Decimal::zero(),
        guard_error: Decimal::zero(),
        premises: Vec::new(),
        notes: vec!["monotonicity taken on trust".to_string()],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentReport {
    pub path: String,
    pub level: RigorLevel,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RigorReport {
    pub level: RigorLevel,
    /// Path of the first component at the overall level.
    pub weakest_link: String,
    pub components: Vec<ComponentReport>,
}

impl fmt::Display for RigorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rigor level: {}", self.level)?;
        writeln!(f, "weakest link: {}", self.weakest_link)?;
        for c in &self.components {
            writeln!(f, "  {:<24} {:<22} {}", c.path, c.level.to_string(), c.detail)?;
        }
        Ok(())
    }
}

fn check_transform(t: &TransformRecord) -> Result<(), ProofError> {
    let rebuilt = shift_power_transform(&t.original, &t.var, &t.alpha, t.n)?;
    if rebuilt.transformed != t.transformed {
        return Err(ProofError::Inconsistent(format!(
            "transformed expression is `{}`, expected `{}`",
            t.transformed, rebuilt.transformed
        )));
    }
    Ok(())
}

/// Re-checks every part of `doc`, optionally at another precision.
pub fn check_proof_document(doc: &ProofDocument, precision: Option<PrecisionContext>) -> Result<RigorReport, ProofError> {
    let mut components = Vec::new();

    let main = check_certificate_at(&doc.main, precision).map_err(|e| ProofError::from(e).at("main"))?;
    if !main.accepted {
        return Err(ProofError::Inconsistent(main.detail).at("main"));
    }
    let main_level = if doc.main.mode == Mode::Interval { RigorLevel::Rigorous } else { RigorLevel::FloatVerified };
    components.push(ComponentReport {
        path: "main".into(),
        level: main_level,
        detail: format!("{} mode, min margin {}", doc.main.mode, main.min_margin),
    });

    let ctx = match precision {
        Some(c) => c,
        None => PrecisionContext::new(doc.main.precision_digits).map_err(|e| ProofError::Inconsistent(e).at("main"))?,
    };
    let interval = (&doc.main.problem.interval[0], &doc.main.problem.interval[1]);
    let operands = [("g1", &doc.main.problem.g1), ("g2", &doc.main.problem.g2)];

    for (i, claim) in doc.monotonicity.iter().enumerate() {
        let path = format!("monotonicity[{i}]");
        if let Some((name, _)) = operands.iter().find(|(_, e)| **e == claim.target) {
            if claim.claimed != doc.main.direction {
                let msg = format!("{name} is claimed {}, certificate needs {}", claim.claimed, doc.main.direction);
                return Err(ProofError::Inconsistent(msg).at(&path));
            }
        }
        let checked = match &claim.evidence {
            Evidence::Axiomatic { .. } => axiomatic(claim),
            Evidence::DerivativeDif { .. } => prove_monotonicity(claim, interval, ctx).map_err(|e| e.at(&path))?,
        };
        let detail = if checked.level == RigorLevel::AxiomaticMonotonicity {
            format!("{} `{}` assumed", claim.claimed, claim.target)
        } else {
            format!("{} `{}` via derivative chain, min margin {}", claim.claimed, claim.target, checked.min_margin)
        };
        components.push(ComponentReport { path, level: checked.level, detail });
    }
    for (name, e) in operands {
        if !doc.monotonicity.iter().any(|c| c.target == *e) {
            components.push(ComponentReport {
                path: format!("monotonicity({name})"),
                level: RigorLevel::AxiomaticMonotonicity,
                detail: format!("no claim for `{e}`; assumed"),
            });
        }
    }
    for (i, t) in doc.transforms.iter().enumerate() {
        let path = format!("transforms[{i}]");
        check_transform(t).map_err(|e| e.at(&path))?;
        components.push(ComponentReport { path, level: RigorLevel::Rigorous, detail: format!("n = {}", t.n) });
    }

    let (weakest_link, level) = components
        .iter()
        .map(|c| (c.path.clone(), c.level))
        .min_by_key(|(_, l)| *l)
        .expect("main is always present");
    Ok(RigorReport { level, weakest_link, components })
}

/// Proves `p` and bundles the operand claims, filling in generated τ lists.
pub fn build_proof_document(
    p: &DifProblem,
    claims: &[MonotonicityClaim],
    transforms: Vec<TransformRecord>,
    narrative: &str,
) -> Result<ProofDocument, ProofError> {
    let main = generate_tau(p).map_err(|e| ProofError::from(e).at("main"))?;
    let interval = (&p.alpha, &p.beta);
    let mut monotonicity = Vec::new();
    for (i, claim) in claims.iter().enumerate() {
        let filled = match claim.evidence {
            Evidence::Axiomatic { .. } => claim.clone(),
            Evidence::DerivativeDif { .. } => {
                prove_monotonicity(claim, interval, p.ctx()).map_err(|e| e.at(&format!("monotonicity[{i}]")))?.claim
            }
        };
        monotonicity.push(filled);
    }
    Ok(ProofDocument { main, monotonicity, transforms, narrative: narrative.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn claim(target: &str, dir: Direction, h1: &str, h2: &str) -> MonotonicityClaim {
        MonotonicityClaim {
            target: parse(target).unwrap(),
            claimed: dir,
            evidence: Evidence::DerivativeDif { h1: parse(h1).unwrap(), h2: parse(h2).unwrap(), tau: None, premises: vec![] },
        }
    }

    #[test]
    fn transform_prints_as_expected() {
        let t = shift_power_transform(&parse("x*(1-x)").unwrap(), "x", &d("0"), -2).unwrap();
        assert_eq!(t.transformed, parse("(x+1)^(-2) * (x*(1-x))").unwrap());
        let t = shift_power_transform(&parse("x").unwrap(), "x", &d("3"), 2).unwrap();
        assert_eq!(t.transformed.to_string(), "(x - 2)^2*x");
        assert!(matches!(shift_power_transform(&parse("x").unwrap(), "x", &d("0"), 0), Err(ProofError::ZeroExponent)));
    }

    #[test]
    fn identity_is_increasing() {
        let c = claim("x", Direction::Increasing, "1", "0");
        let r = prove_monotonicity(&c, (&d("0"), &d("1")), PrecisionContext::default()).unwrap();
        assert_eq!(r.level, RigorLevel::Rigorous);
    }

    #[test]
    fn wrong_decomposition_is_caught() {
        let c = claim("x^2", Direction::Increasing, "2*x + 0.001", "0");
        let err = prove_monotonicity(&c, (&d("0.5"), &d("1")), PrecisionContext::default()).unwrap_err();
        assert!(matches!(err, ProofError::DecompositionMismatch { .. }), "{err}");
    }

    #[test]
    fn axiomatic_evidence_is_not_provable() {
        let c = MonotonicityClaim {
            target: parse("x").unwrap(),
            claimed: Direction::Increasing,
            evidence: Evidence::Axiomatic { note: "obvious".into() },
        };
        assert!(matches!(prove_monotonicity(&c, (&d("0"), &d("1")), PrecisionContext::default()), Err(ProofError::NotDerivative)));
    }

    #[test]
    fn depth_is_capped() {
        let mut c = claim("x", Direction::Increasing, "1", "0");
        for _ in 0..MAX_DEPTH {
            let inner = c.clone();
            c = claim("x", Direction::Increasing, "1", "0");
            if let Evidence::DerivativeDif { premises, .. } = &mut c.evidence {
                premises.push(inner);
            }
        }
        let err = prove_monotonicity(&c, (&d("0"), &d("1")), PrecisionContext::default()).unwrap_err();
        assert!(err.to_string().contains("deeper than 3"), "{err}");
    }

    #[test]
    fn evidence_json_is_tagged() {
        let c = claim("x", Direction::Increasing, "1", "0");
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        assert_eq!(v["evidence"]["kind"], "derivative-dif");
        assert_eq!(v["claimed"], "inc");
        let back: MonotonicityClaim = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }
}
