use std::fmt;

use num_traits::{One, Zero};

use crate::alloc_general::area_bound_applies;
use crate::error::Result;
use crate::metrics::aggregate_metrics;
use crate::model::{AllocationDecision, Instance, Schedule};
use crate::rational::{int, Rational};

use super::intervals::{interval_report, IntervalReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundStatus {
    Pass,
    Fail,
    /// A precondition of the inequality does not hold.
    NotApplicable,
}

impl BoundStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundStatus::Pass => "pass",
            BoundStatus::Fail => "fail",
            BoundStatus::NotApplicable => "not-applicable",
        }
    }
}

impl fmt::Display for BoundStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One inequality `lhs <= rhs` (or `lhs == rhs` for the time split).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub statement: &'static str,
    pub lhs: Rational,
    pub rhs: Rational,
    pub status: BoundStatus,
}

impl BoundCheck {
    fn le(name: &'static str, statement: &'static str, lhs: Rational, rhs: Rational) -> Self {
        let status = if lhs <= rhs {
            BoundStatus::Pass
        } else {
            BoundStatus::Fail
        };
        Self {
            name,
            statement,
            lhs,
            rhs,
            status,
        }
    }

    /// `rhs - lhs`.
    pub fn slack(&self) -> Rational {
        &self.rhs - &self.lhs
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub intervals: IntervalReport,
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.status != BoundStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| c.status == BoundStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Evaluates the phase-two inequalities on a schedule built from the final
/// decision `p` (inside `schedule`) that was derived from `p_initial` by the
/// `mu` cap.
///
/// * `time-split`: `T1 + T2 + T3 = T`.
/// * `critical-path`: `T1 + mu T2 <= C(p')`.
/// * `area`: `mu T2 + (1 - mu) T3 <= d A(p')`, only when `P^min mu^2 >= 1`.
/// * `area-lower-bound`: `A(p) <= T`.
/// * `independent-critical-path` (independent jobs): `mu T2 <= max t(p')`
///   when no low interval exists, otherwise `T1 + T2 <= max t(p')`.
pub fn verify_phase_bounds(
    instance: &Instance,
    schedule: &Schedule,
    p_initial: &AllocationDecision,
    mu: &Rational,
    independent: bool,
) -> Result<BoundReport> {
    let r = interval_report(instance, schedule, mu)?;
    let initial = aggregate_metrics(instance, p_initial)?;
    let final_metrics = aggregate_metrics(instance, &schedule.decision)?;
    let one = Rational::one();
    let mut checks = Vec::new();

    let split = &r.t1 + &r.t2 + &r.t3;
    checks.push(BoundCheck {
        name: "time-split",
        statement: "T1 + T2 + T3 = T",
        status: if split == r.makespan {
            BoundStatus::Pass
        } else {
            BoundStatus::Fail
        },
        lhs: split,
        rhs: r.makespan.clone(),
    });
    checks.push(BoundCheck::le(
        "critical-path",
        "T1 + mu*T2 <= C(p')",
        &r.t1 + mu * &r.t2,
        initial.critical_path_length.clone(),
    ));
    let area_lhs = mu * &r.t2 + (&one - mu) * &r.t3;
    let area_rhs = int(instance.d() as i64) * &initial.area;
    if area_bound_applies(instance.resources(), mu) {
        checks.push(BoundCheck::le(
            "area",
            "mu*T2 + (1-mu)*T3 <= d*A(p')",
            area_lhs,
            area_rhs,
        ));
    } else {
        checks.push(BoundCheck {
            name: "area",
            statement: "mu*T2 + (1-mu)*T3 <= d*A(p')",
            lhs: area_lhs,
            rhs: area_rhs,
            status: BoundStatus::NotApplicable,
        });
    }
    checks.push(BoundCheck::le(
        "area-lower-bound",
        "A(p) <= T",
        final_metrics.area.clone(),
        r.makespan.clone(),
    ));
    if independent {
        let max_t = p_initial
            .durations(instance)?
            .into_iter()
            .max()
            .unwrap_or_else(Rational::zero);
        if r.has_low() {
            checks.push(BoundCheck::le(
                "independent-critical-path",
                "T1 + T2 <= max t(p')",
                &r.t1 + &r.t2,
                max_t,
            ));
        } else {
            checks.push(BoundCheck::le(
                "independent-critical-path",
                "mu*T2 <= max t(p')",
                mu * &r.t2,
                max_t,
            ));
        }
    }
    Ok(BoundReport {
        intervals: r,
        checks,
    })
}
