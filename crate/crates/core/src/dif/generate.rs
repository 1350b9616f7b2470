use std::fmt;

use thiserror::Error;

use super::certificate::certify;
use super::{detect_direction, Certificate, DifError, DifProblem, TauSequence};
use crate::decimal::Decimal;
use crate::numeric::{blend, default_accuracy, ffloor, solve_monotone, SolveError};

/// Extra digits carried by the blend before it is floored.
const BLEND_GUARD: u32 = 10;

#[derive(Clone, Debug, PartialEq)]
pub enum FailureReason {
    StepLimit,
    /// The larger side is not above the smaller side at this point.
    ViolationAtPoint(Decimal),
    AccuracyExhausted,
    /// The float chain closed but an enclosure comparison did not (row k).
    IntervalRejected(usize),
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::StepLimit => f.write_str("step limit reached"),
            FailureReason::ViolationAtPoint(x) => write!(f, "inequality fails at {x}"),
            FailureReason::AccuracyExhausted => f.write_str("accuracy exhausted"),
            FailureReason::IntervalRejected(k) => write!(f, "interval check rejects row {k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationFailure {
    pub steps_used: u32,
    /// Last `min(steps, 5)` points of the partial sequence.
    pub tail: Vec<Decimal>,
    pub reason: FailureReason,
}

impl fmt::Display for GenerationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tail: Vec<String> = self.tail.iter().map(|t| t.to_string()).collect();
        write!(f, "**** Fails after {} steps ({}); last points: [{}]", self.steps_used, self.reason, tail.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("{0}")]
    Failed(GenerationFailure),
    #[error(transparent)]
    Problem(#[from] DifError),
}

struct Run<'a> {
    p: &'a DifProblem,
    tau: Vec<Decimal>,
    steps_used: u32,
}

impl Run<'_> {
    fn fail(&self, reason: FailureReason) -> GenerateError {
        let keep = (self.p.options.steps as usize).min(5).min(self.tau.len());
        GenerateError::Failed(GenerationFailure {
            steps_used: self.steps_used,
            tail: self.tau[self.tau.len() - keep..].to_vec(),
            reason,
        })
    }
}

/// Builds a τ sequence by walking `t_{k+1}` just short of `f2^{-1}(f1(t_k))`.
///
/// The loop keeps going while `f1(tt) <= f2(beta)`, so the last step always
/// has a strictly positive gap. Each candidate is pulled back toward the
/// previous point by `relax` and floored to `acc` decimal places; a candidate
/// that fails to advance bumps `acc` and costs one step.
pub fn generate_tau(p: &DifProblem) -> Result<Certificate, GenerateError> {
    let (_, f1, f2) = detect_direction(p)?;
    let digits = p.ctx().digits();
    let mut acc = p
        .options
        .digits_override
        .unwrap_or_else(|| default_accuracy(&p.alpha, &p.beta).decimal_places);
    let mut run = Run { p, tau: vec![p.alpha.clone()], steps_used: 0 };
    let mut tt = p.alpha.clone();
    let mut ga = p.eval(&f1, &tt).map_err(DifError::from)?;
    let gb = p.eval(&f2, &p.beta).map_err(DifError::from)?;

    while ga <= gb && tt < p.beta {
        if run.steps_used == p.options.steps {
            return Err(run.fail(FailureReason::StepLimit));
        }
        run.steps_used += 1;
        let r = match solve_monotone(&f2, &p.var, &ga, &tt, &p.beta, p.ctx()) {
            Ok(r) => r,
            Err(SolveError::BracketLow { at, .. }) => {
                return Err(run.fail(FailureReason::ViolationAtPoint(at)))
            }
            Err(SolveError::BracketHigh { at, .. }) => {
                return Err(run.fail(FailureReason::ViolationAtPoint(at)))
            }
            Err(SolveError::Eval(e)) => return Err(DifError::from(e).into()),
        };
        let mixed = blend(&tt, &r, &p.options.relax, digits + BLEND_GUARD);
        let t1 = Decimal::min(&ffloor(&mixed, acc), &p.beta).clone();
        if t1 <= tt {
            acc += 1;
            if acc > digits {
                return Err(run.fail(FailureReason::AccuracyExhausted));
            }
            continue;
        }
        if p.eval(&f2, &t1).map_err(DifError::from)? >= ga {
            return Err(run.fail(FailureReason::AccuracyExhausted));
        }
        run.tau.push(t1.clone());
        tt = t1;
        ga = p.eval(&f1, &tt).map_err(DifError::from)?;
    }

    if tt < p.beta {
        run.tau.push(p.beta.clone());
    }
    let last_f1 = p.eval(&f1, &p.beta).map_err(DifError::from)?;
    if last_f1 <= gb {
        return Err(run.fail(FailureReason::ViolationAtPoint(p.beta.clone())));
    }
    let tau = TauSequence::new(run.tau.clone()).expect("generated points increase");
    match certify(p, tau, p.options.mode)? {
        Ok(cert) => Ok(cert),
        Err(row) => Err(run.fail(FailureReason::IntervalRejected(row))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dif::{verify_tau, DifOptions, Mode};
    use crate::expr::parse;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn problem(g1: &str, g2: &str, a: &str, b: &str, opts: DifOptions) -> DifProblem {
        DifProblem::new(parse(g1).unwrap(), parse(g2).unwrap(), d(a), d(b), opts).unwrap()
    }

    #[test]
    fn affine_gap_of_one() {
        let p = problem("x+1", "x", "0", "1", DifOptions::default());
        let cert = generate_tau(&p).unwrap();
        assert_eq!(cert.tau_sequence().unwrap().to_string(), "[0, 0.98, 1]");
        assert!(verify_tau(&p, &cert.tau_sequence().unwrap()).unwrap().accepted);
    }

    #[test]
    fn large_gap_closes_immediately() {
        let p = problem("x+5", "x", "0", "1", DifOptions::default());
        assert_eq!(generate_tau(&p).unwrap().tau_sequence().unwrap().to_string(), "[0, 1]");
    }

    #[test]
    fn decreasing_pair() {
        let p = problem("exp(-x) + 0.05", "exp(-x)", "0", "2", DifOptions::default());
        let cert = generate_tau(&p).unwrap();
        assert_eq!(cert.direction, crate::dif::Direction::Decreasing);
        assert!(verify_tau(&p, &cert.tau_sequence().unwrap()).unwrap().accepted);
    }

    #[test]
    fn step_limit_reports_tail() {
        let opts = DifOptions { steps: 3, ..DifOptions::default() };
        let p = problem("x+0.001", "x", "0", "1", opts);
        let GenerateError::Failed(f) = generate_tau(&p).unwrap_err() else { panic!() };
        assert_eq!(f.reason, FailureReason::StepLimit);
        assert_eq!(f.steps_used, 3);
        assert!(!f.tail.is_empty() && f.tail.len() <= 3);
        assert!(f.to_string().starts_with("**** Fails after 3 steps"));
    }

    #[test]
    fn crossing_pair_fails() {
        // the two lines cross at 0.3
        let p = problem("x + 0.3", "2*x", "0", "1", DifOptions::default());
        let GenerateError::Failed(f) = generate_tau(&p).unwrap_err() else { panic!() };
        assert!(f.reason != FailureReason::IntervalRejected(0), "{f}");
    }

    #[test]
    fn interval_mode_certificate() {
        let opts = DifOptions { mode: Mode::Interval, ..DifOptions::default() };
        let p = problem("x+1", "x", "0", "1", opts);
        let cert = generate_tau(&p).unwrap();
        assert_eq!(cert.mode, Mode::Interval);
    }
}
