use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{Instance, Schedule};
use crate::rational::{ceil_u64, int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntervalClass {
    /// Utilization below `ceil(mu P)` on every type.
    Low,
    /// Some type at `ceil(mu P)` or more, every type below `ceil((1 - mu) P)`.
    Medium,
    /// Some type at `ceil((1 - mu) P)` or more.
    High,
}

impl IntervalClass {
    pub fn label(self) -> &'static str {
        match self {
            IntervalClass::Low => "I1",
            IntervalClass::Medium => "I2",
            IntervalClass::High => "I3",
        }
    }
}

impl fmt::Display for IntervalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub start: Rational,
    pub end: Rational,
    pub utilization: Vec<u64>,
    pub class: IntervalClass,
    /// `(job, fraction of the job executed here)` for every job running.
    pub fractions: Vec<(usize, Rational)>,
}

impl Interval {
    pub fn length(&self) -> Rational {
        &self.end - &self.start
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalReport {
    pub mu: Rational,
    pub intervals: Vec<Interval>,
    pub t1: Rational,
    pub t2: Rational,
    pub t3: Rational,
    pub makespan: Rational,
}

impl IntervalReport {
    pub fn has_low(&self) -> bool {
        self.intervals.iter().any(|i| i.class == IntervalClass::Low)
    }

    /// Sum of each job's fractions over all intervals.
    pub fn fraction_totals(&self, n: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); n];
        for iv in &self.intervals {
            for (j, b) in &iv.fractions {
                out[*j] += b;
            }
        }
        out
    }
}

/// Classifies one utilization vector against per-type thresholds.
pub fn classify(utilization: &[u64], low_caps: &[u64], high_caps: &[u64]) -> IntervalClass {
    if utilization.iter().zip(high_caps).any(|(u, h)| u >= h) {
        IntervalClass::High
    } else if utilization.iter().zip(low_caps).any(|(u, l)| u >= l) {
        IntervalClass::Medium
    } else {
        IntervalClass::Low
    }
}

/// Splits `[0, T]` at every start and completion time and classifies each piece.
pub fn interval_report(
    instance: &Instance,
    schedule: &Schedule,
    mu: &Rational,
) -> Result<IntervalReport> {
    if *mu <= Rational::zero() || *mu >= Rational::new(1.into(), 2.into()) {
        return Err(Error::Config("mu must lie in (0, 1/2)".into()));
    }
    let n = instance.n();
    let caps = instance.resources().capacities();
    let low_caps: Vec<u64> = caps
        .iter()
        .map(|&p| ceil_u64(&(mu * int(p as i64))))
        .collect();
    let high_caps: Vec<u64> = caps
        .iter()
        .map(|&p| ceil_u64(&((Rational::one() - mu) * int(p as i64))))
        .collect();

    let mut cuts: Vec<Rational> = vec![Rational::zero()];
    for j in 0..n {
        cuts.push(schedule.start_times[j].clone());
        cuts.push(schedule.completion(j));
    }
    cuts.sort();
    cuts.dedup();

    let mut intervals = Vec::with_capacity(cuts.len());
    let (mut t1, mut t2, mut t3) = (Rational::zero(), Rational::zero(), Rational::zero());
    for w in cuts.windows(2) {
        let (start, end) = (&w[0], &w[1]);
        let len = end - start;
        let mut utilization = vec![0u64; instance.d()];
        let mut fractions = Vec::new();
        for j in 0..n {
            if schedule.start_times[j] <= *start && schedule.completion(j) >= *end {
                for (i, u) in utilization.iter_mut().enumerate() {
                    *u += schedule.decision.get(j).get(i) as u64;
                }
                fractions.push((j, &len / &schedule.durations[j]));
            }
        }
        let class = classify(&utilization, &low_caps, &high_caps);
        match class {
            IntervalClass::Low => t1 += &len,
            IntervalClass::Medium => t2 += &len,
            IntervalClass::High => t3 += &len,
        }
        intervals.push(Interval {
            start: start.clone(),
            end: end.clone(),
            utilization,
            class,
            fractions,
        });
    }
    Ok(IntervalReport {
        mu: mu.clone(),
        intervals,
        t1,
        t2,
        t3,
        makespan: schedule.makespan(),
    })
}
