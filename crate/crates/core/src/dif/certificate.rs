use serde::{Deserialize, Serialize};

use super::{verify_tau, verify_tau_interval, DifError, TauError, DifOptions, DifProblem, Direction, Mode, TauSequence};
use crate::decimal::Decimal;
use crate::expr::{Expr, PrecisionContext};

/// Canonical copy of the inequality a certificate speaks about.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemEcho {
    pub g1: Expr,
    pub g2: Expr,
    pub var: String,
    pub interval: [Decimal; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub problem: ProblemEcho,
    pub direction: Direction,
    /// Kept unvalidated so a tampered list reads as a failed check, not a
    /// parse error.
    pub tau: Vec<Decimal>,
    pub precision_digits: u32,
    pub min_margin: Decimal,
    pub mode: Mode,
}

impl Certificate {
    /// Rebuilds the problem at the recorded precision.
    pub fn problem(&self) -> Result<DifProblem, DifError> {
        let precision = PrecisionContext::new(self.precision_digits).map_err(DifError::InvalidOption)?;
        let options = DifOptions { precision, mode: self.mode, ..DifOptions::default() };
        let [alpha, beta] = self.problem.interval.clone();
        DifProblem::with_var(self.problem.g1.clone(), self.problem.g2.clone(), &self.problem.var, alpha, beta, options)
    }

    /// Errors unless this certificate is about `p`.
    pub fn matches(&self, p: &DifProblem) -> Result<(), DifError> {
        let echo = &self.problem;
        let mut diffs = Vec::new();
        if echo.g1 != p.g1 {
            diffs.push(format!("g1 is `{}`, expected `{}`", echo.g1, p.g1));
        }
        if echo.g2 != p.g2 {
            diffs.push(format!("g2 is `{}`, expected `{}`", echo.g2, p.g2));
        }
        if echo.var != p.var {
            diffs.push(format!("variable is `{}`, expected `{}`", echo.var, p.var));
        }
        if echo.interval[0] != p.alpha || echo.interval[1] != p.beta {
            diffs.push(format!(
                "interval is [{}, {}], expected [{}, {}]",
                echo.interval[0], echo.interval[1], p.alpha, p.beta
            ));
        }
        if diffs.is_empty() {
            Ok(())
        } else {
            Err(DifError::ProblemMismatch(diffs.join("; ")))
        }
    }

    pub fn tau_sequence(&self) -> Result<TauSequence, TauError> {
        let t = TauSequence::new(self.tau.clone())?;
        t.check_endpoints(&self.problem.interval[0], &self.problem.interval[1])?;
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Verifies `tau` in `mode` and packages it. The inner `Err` carries the
/// first rejected row.
pub(crate) fn certify(p: &DifProblem, tau: TauSequence, mode: Mode) -> Result<Result<Certificate, usize>, DifError> {
    let (accepted, direction, first_violation, min_margin) = match mode {
        Mode::Float => {
            let v = verify_tau(p, &tau)?;
            (v.accepted, v.direction, v.first_violation, v.min_margin)
        }
        Mode::Interval => {
            let v = verify_tau_interval(p, &tau)?;
            (v.accepted, v.direction, v.first_violation, v.min_margin)
        }
    };
    if !accepted {
        return Ok(Err(first_violation.unwrap_or(tau.len())));
    }
    Ok(Ok(Certificate {
        problem: ProblemEcho {
            g1: p.g1.clone(),
            g2: p.g2.clone(),
            var: p.var.clone(),
            interval: [p.alpha.clone(), p.beta.clone()],
        },
        direction,
        tau: tau.points().to_vec(),
        precision_digits: p.ctx().digits(),
        min_margin,
        mode,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub accepted: bool,
    pub precision_digits: u32,
    pub mode: Mode,
    /// Smallest diff seen on re-verification.
    pub min_margin: Decimal,
    /// How far below the recorded margin the recomputed one may fall.
    pub tolerance: Decimal,
    pub detail: String,
}

/// Re-verifies at the recorded precision.
pub fn check_certificate(cert: &Certificate) -> Result<bool, DifError> {
    Ok(check_certificate_at(cert, None)?.accepted)
}

/// Re-verifies at `precision`, or the recorded precision when `None`.
///
/// The recomputed minimum margin may fall short of the recorded one by one
/// unit in the last place of the compared values. When the precision differs
/// from the recorded one, that unit is taken at the coarser precision and
/// multiplied by the node count of `g1` and `g2`, since every node may round
/// once.
pub fn check_certificate_at(cert: &Certificate, precision: Option<PrecisionContext>) -> Result<CertificateCheck, DifError> {
    let recorded = cert.problem()?;
    let ctx = precision.unwrap_or(recorded.ctx());
    let p = recorded.at_precision(ctx);
    let mode = cert.mode;
    let tau = match cert.tau_sequence() {
        Ok(t) => t,
        Err(e) => {
            return Ok(CertificateCheck {
                accepted: false,
                precision_digits: ctx.digits(),
                mode,
                min_margin: Decimal::zero(),
                tolerance: Decimal::zero(),
                detail: e.to_string(),
            })
        }
    };

    let (accepted, direction, min_margin, scale) = match mode {
        Mode::Float => {
            let v = verify_tau(&p, &tau)?;
            let scale = v.rows.iter().flat_map(|r| [r.larger.abs(), r.smaller.abs()]).max();
            (v.accepted, v.direction, v.min_margin, scale)
        }
        Mode::Interval => {
            let v = verify_tau_interval(&p, &tau)?;
            let scale = v.rows.iter().flat_map(|r| [r.larger.lo.abs(), r.smaller.hi.abs()]).max();
            (v.accepted, v.direction, v.min_margin, scale)
        }
    };
    let coarse = ctx.digits().min(cert.precision_digits);
    let unit = scale.unwrap_or_else(Decimal::one).ulp(coarse);
    let tolerance = if ctx.digits() == cert.precision_digits {
        unit
    } else {
        let nodes = (p.g1.size() + p.g2.size()) as i64;
        &unit * &Decimal::from(nodes)
    };
    let floor = &cert.min_margin - &tolerance;

    let detail = if !accepted {
        "chain condition fails".to_string()
    } else if direction != cert.direction {
        format!("direction is {direction}, certificate says {}", cert.direction)
    } else if min_margin < floor {
        format!("margin {min_margin} is below the recorded {}", cert.min_margin)
    } else {
        "ok".to_string()
    };
    Ok(CertificateCheck {
        accepted: detail == "ok",
        precision_digits: ctx.digits(),
        mode,
        min_margin,
        tolerance,
        detail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dif::generate_tau;
    use crate::expr::parse;

    fn cert() -> Certificate {
        let p = DifProblem::new(
            parse("exp(x) + 0.2").unwrap(),
            parse("exp(x)").unwrap(),
            Decimal::zero(),
            Decimal::one(),
            DifOptions::default(),
        )
        .unwrap();
        generate_tau(&p).unwrap()
    }

    #[test]
    fn json_shape() {
        let c = cert();
        let v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(v["problem"]["g1"], "exp(x) + 0.2");
        assert_eq!(v["problem"]["interval"][0], "0");
        assert_eq!(v["direction"], "inc");
        assert_eq!(v["mode"], "float");
        assert_eq!(v["precision_digits"], 10);
        assert!(v["tau"].as_array().unwrap().iter().all(|t| t.is_string()));
        assert!(v["min_margin"].is_string());
        assert_eq!(Certificate::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn fresh_certificate_checks() {
        let c = cert();
        assert!(check_certificate(&c).unwrap());
        let twenty = PrecisionContext::new(20).unwrap();
        assert!(check_certificate_at(&c, Some(twenty)).unwrap().accepted);
    }

    #[test]
    fn inflated_margin_is_caught() {
        let mut c = cert();
        c.min_margin = &c.min_margin + &Decimal::one();
        let r = check_certificate_at(&c, None).unwrap();
        assert!(!r.accepted);
        assert!(r.detail.contains("margin"));
    }

    #[test]
    fn unordered_tau_fails_the_check() {
        let mut c = cert();
        c.tau[0] = "0.5".parse().unwrap();
        let r = check_certificate_at(&c, None).unwrap();
        assert!(!r.accepted);
        c.tau.swap(1, 2);
        assert!(!check_certificate(&c).unwrap());
    }
}
