use num_traits::One;

use crate::error::{Error, Result};
use crate::metrics::{areas_of, average_area_of};
use crate::model::{AllocationDecision, AllocationVector, Instance, ResourceProfile};
use crate::rational::{ceil_u64, int, Rational};

/// `ceil(mu * P^(i))` for every resource type.
pub fn utilization_caps(resources: &ResourceProfile, mu: &Rational) -> Vec<u32> {
    resources
        .capacities()
        .iter()
        .map(|&p| ceil_u64(&(mu * int(p as i64))) as u32)
        .collect()
}

/// True when `P^min >= 1/mu^2`.
pub fn area_bound_applies(resources: &ResourceProfile, mu: &Rational) -> bool {
    int(resources.p_min() as i64) * mu * mu >= Rational::one()
}

#[derive(Clone, Debug)]
pub struct Adjustment {
    pub decision: AllocationDecision,
    /// A job is adjusted when any component shrank.
    pub adjusted: Vec<bool>,
    /// The capped vector was missing from the table and a smaller entry was used.
    pub fallback: Vec<bool>,
    pub caps: Vec<u32>,
}

impl Adjustment {
    pub fn adjusted_count(&self) -> usize {
        self.adjusted.iter().filter(|&&a| a).count()
    }
}

/// Caps every component at `ceil(mu * P^(i))`.
///
/// A capped vector that is not listed in the job's table is replaced by the
/// fastest listed entry that is component-wise below it (ties toward the
/// lexicographically smaller vector).
pub fn adjust_allocation(
    instance: &Instance,
    initial: &AllocationDecision,
    mu: &Rational,
) -> Result<Adjustment> {
    if *mu <= Rational::from_integer(0.into()) || *mu >= Rational::new(1.into(), 2.into()) {
        return Err(Error::Config("mu must lie in (0, 1/2)".into()));
    }
    initial.validate(instance)?;
    let caps = utilization_caps(instance.resources(), mu);
    let n = instance.n();
    let mut out = Vec::with_capacity(n);
    let mut adjusted = vec![false; n];
    let mut fallback = vec![false; n];
    for (j, p) in initial.iter().enumerate() {
        let capped: Vec<u32> = p
            .amounts()
            .iter()
            .zip(&caps)
            .map(|(&a, &c)| a.min(c))
            .collect();
        if capped == p.amounts() {
            out.push(p.clone());
            continue;
        }
        adjusted[j] = true;
        let capped = AllocationVector::unchecked(capped);
        let exec = &instance.job(j).exec;
        if exec.contains(&capped) {
            out.push(capped);
            continue;
        }
        let replacement = exec
            .iter()
            .filter(|(a, _)| a.precedes(&capped))
            .min_by(|a, b| a.1.cmp(b.1).then_with(|| a.0.cmp(b.0)))
            .map(|(a, _)| a.clone())
            .ok_or_else(|| {
                Error::Allocation(format!(
                    "job {:?}: no table entry below the capped allocation {capped}",
                    instance.job(j).id
                ))
            })?;
        fallback[j] = true;
        out.push(replacement);
    }
    Ok(Adjustment {
        decision: AllocationDecision(out),
        adjusted,
        fallback,
        caps,
    })
}

/// Outcome of the per-job adjustment bounds for one adjusted job.
#[derive(Clone, Debug)]
pub struct AdjustmentBound {
    pub job: usize,
    /// `t(p) <= t(p') / mu`.
    pub time_ok: bool,
    /// `a^(i)(p) <= d * a(p')` for every type; `None` when `P^min < 1/mu^2`.
    pub area_ok: Option<bool>,
}

impl AdjustmentBound {
    pub fn holds(&self) -> bool {
        self.time_ok && self.area_ok != Some(false)
    }
}

/// Evaluates both adjustment bounds on every adjusted job (exact arithmetic).
pub fn check_adjustment_bounds(
    instance: &Instance,
    initial: &AllocationDecision,
    adjustment: &Adjustment,
    mu: &Rational,
) -> Result<Vec<AdjustmentBound>> {
    let resources = instance.resources();
    let gated = area_bound_applies(resources, mu);
    let d = int(instance.d() as i64);
    let t_initial = initial.durations(instance)?;
    let t_final = adjustment.decision.durations(instance)?;
    let mut out = Vec::new();
    for j in (0..instance.n()).filter(|&j| adjustment.adjusted[j]) {
        let time_ok = &t_final[j] * mu <= t_initial[j];
        let area_ok = gated.then(|| {
            let bound = &d * average_area_of(resources, initial.get(j), &t_initial[j]);
            areas_of(resources, adjustment.decision.get(j), &t_final[j])
                .iter()
                .all(|a| *a <= bound)
        });
        out.push(AdjustmentBound {
            job: j,
            time_ok,
            area_ok,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExecProfile, Job};
    use crate::rational::{from_f64, ratio};

    fn inst(caps: &[u32], alts: &[(&[u32], Rational)]) -> Instance {
        let p = ResourceProfile::new(caps.to_vec()).unwrap();
        let e = ExecProfile::new(
            alts.iter()
                .map(|(a, t)| (AllocationVector::new(a.to_vec(), &p).unwrap(), t.clone())),
            &p,
        )
        .unwrap();
        Instance::new(
            p,
            vec![Job {
                id: "j".into(),
                exec: e,
            }],
            [],
        )
        .unwrap()
    }

    #[test]
    fn cap_arithmetic() {
        let p = ResourceProfile::new(vec![10]).unwrap();
        let mu = from_f64(0.382).unwrap();
        assert_eq!(utilization_caps(&p, &mu), vec![4]);
        let i = inst(&[10], &[(&[7], int(2)), (&[4], ratio(7, 2))]);
        let a = adjust_allocation(
            &i,
            &AllocationDecision(vec![AllocationVector::unchecked(vec![7])]),
            &mu,
        )
        .unwrap();
        assert_eq!(a.decision.get(0).amounts(), &[4]);
        assert!(a.adjusted[0] && !a.fallback[0]);
    }

    #[test]
    fn small_allocation_untouched() {
        let i = inst(&[10], &[(&[3], int(2))]);
        let dec = AllocationDecision(vec![AllocationVector::unchecked(vec![3])]);
        let a = adjust_allocation(&i, &dec, &ratio(2, 5)).unwrap();
        assert_eq!(a.decision, dec);
        assert_eq!(a.adjusted_count(), 0);
    }

    #[test]
    fn fallback_to_fastest_smaller_entry() {
        let i = inst(
            &[10, 10],
            &[
                (&[8, 8], int(1)),
                (&[2, 3], int(4)),
                (&[4, 1], int(3)),
                (&[1, 1], int(6)),
            ],
        );
        let dec = AllocationDecision(vec![AllocationVector::unchecked(vec![8, 8])]);
        let a = adjust_allocation(&i, &dec, &ratio(2, 5)).unwrap();
        // Cap (4,4) is not listed; (4,1) is the fastest entry below it.
        assert_eq!(a.decision.get(0).amounts(), &[4, 1]);
        assert!(a.fallback[0]);
    }

    #[test]
    fn missing_fallback_is_an_error() {
        let i = inst(&[10], &[(&[8], int(1))]);
        let dec = AllocationDecision(vec![AllocationVector::unchecked(vec![8])]);
        assert!(matches!(
            adjust_allocation(&i, &dec, &ratio(2, 5)),
            Err(Error::Allocation(_))
        ));
    }

    #[test]
    fn bounds_hold_on_linear_speedup() {
        let i = inst(&[10], &[(&[10], int(1)), (&[4], ratio(5, 2))]);
        let dec = AllocationDecision(vec![AllocationVector::unchecked(vec![10])]);
        let mu = ratio(2, 5);
        let a = adjust_allocation(&i, &dec, &mu).unwrap();
        let b = check_adjustment_bounds(&i, &dec, &a, &mu).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].time_ok);
        // 10 * (2/5)^2 = 1.6 >= 1
        assert_eq!(b[0].area_ok, Some(true));
    }
}
