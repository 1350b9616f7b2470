use serde::Serialize;

use super::{detect_direction, DifError, DifProblem, Direction, TauSequence};
use crate::decimal::Decimal;
use crate::expr::{eval_interval, IntervalValue};

/// One line of the five-column check table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationRow {
    pub k: usize,
    pub tau: Decimal,
    pub larger: Decimal,
    pub smaller: Decimal,
    /// `larger - smaller`, exact.
    pub diff: Decimal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verification {
    pub direction: Direction,
    pub accepted: bool,
    /// Accepted and every diff is at least the problem's margin.
    pub rigorous_accepted: bool,
    /// First row (1-based) whose diff is not positive.
    pub first_violation: Option<usize>,
    pub min_margin: Decimal,
    pub rows: Vec<VerificationRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalRow {
    pub k: usize,
    pub tau: Decimal,
    pub larger: IntervalValue,
    pub smaller: IntervalValue,
    /// `larger.lo - smaller.hi`; positive means the row is proven.
    pub diff: Decimal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalVerification {
    pub direction: Direction,
    pub accepted: bool,
    pub first_violation: Option<usize>,
    pub min_margin: Decimal,
    pub rows: Vec<IntervalRow>,
}

/// Index pairs `(larger, smaller)` per row, ending with the repeated last point.
fn row_indices(direction: Direction, n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    let inc = direction == Direction::Increasing;
    (0..n - 1)
        .map(move |k| if inc { (k, k, k + 1) } else { (k, k + 1, k) })
        .chain(std::iter::once((n - 1, n - 1, n - 1)))
}

fn prepare(p: &DifProblem, tau: &TauSequence) -> Result<Direction, DifError> {
    tau.check_endpoints(&p.alpha, &p.beta)?;
    Ok(detect_direction(p)?.0)
}

/// Checks the chain at the problem's precision.
///
/// Stops at the first row where the larger side is strictly below the
/// smaller side; ties are recorded but do not stop the scan.
pub fn verify_tau(p: &DifProblem, tau: &TauSequence) -> Result<Verification, DifError> {
    let direction = prepare(p, tau)?;
    let pts = tau.points();
    let mut rows = Vec::with_capacity(pts.len());
    for (k, li, si) in row_indices(direction, pts.len()) {
        let larger = p.eval(&p.g1, &pts[li])?;
        let smaller = p.eval(&p.g2, &pts[si])?;
        let diff = &larger - &smaller;
        let stop = diff.is_negative();
        rows.push(VerificationRow { k: k + 1, tau: pts[k].clone(), larger, smaller, diff });
        if stop {
            break;
        }
    }
    let first_violation = rows.iter().find(|r| !r.diff.is_positive()).map(|r| r.k);
    let min_margin = rows.iter().map(|r| r.diff.clone()).min().expect("at least one row");
    let accepted = rows.len() == pts.len() && first_violation.is_none();
    let rigorous_accepted = accepted && min_margin >= p.options.margin();
    Ok(Verification { direction, accepted, rigorous_accepted, first_violation, min_margin, rows })
}

/// Checks the chain with outward-rounded enclosures at each point.
pub fn verify_tau_interval(p: &DifProblem, tau: &TauSequence) -> Result<IntervalVerification, DifError> {
    let direction = prepare(p, tau)?;
    let pts = tau.points();
    let ctx = p.ctx();
    let enclose = |e, x: &Decimal| eval_interval(e, &p.var, &IntervalValue::point(x.clone()), ctx);
    let mut rows = Vec::with_capacity(pts.len());
    for (k, li, si) in row_indices(direction, pts.len()) {
        let larger = enclose(&p.g1, &pts[li])?;
        let smaller = enclose(&p.g2, &pts[si])?;
        let diff = &larger.lo - &smaller.hi;
        let stop = !diff.is_positive();
        rows.push(IntervalRow { k: k + 1, tau: pts[k].clone(), larger, smaller, diff });
        if stop {
            break;
        }
    }
    let first_violation = rows.iter().find(|r| !r.diff.is_positive()).map(|r| r.k);
    let min_margin = rows.iter().map(|r| r.diff.clone()).min().expect("at least one row");
    let accepted = rows.len() == pts.len() && first_violation.is_none();
    Ok(IntervalVerification { direction, accepted, first_violation, min_margin, rows })
}
