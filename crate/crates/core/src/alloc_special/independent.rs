//! Exact allocation for jobs without precedence constraints.
//!
//! Without edges `L(p) = max(max_j t_j(p_j), sum_j a_j(p_j))`. For a time
//! threshold `tau`, letting every job take its smallest-area alternative
//! with `t <= tau` minimizes the area among decisions whose longest job is at
//! most `tau`. Sweeping `tau` over every distinct alternative time therefore
//! meets the optimum at `tau = max_j t_j(p*_j)`.

use crate::alloc_general::{prune_dominated, Alternative};
use crate::error::{Error, Result};
use crate::model::{AllocationDecision, Instance};
use crate::rational::Rational;

#[derive(Clone, Debug)]
pub struct IndependentAllocation {
    pub decision: AllocationDecision,
    /// `L(p')`, equal to `L_min`.
    pub lower_bound: Rational,
    pub threshold: Rational,
    pub thresholds_tried: usize,
}

pub fn allocate_independent(instance: &Instance) -> Result<IndependentAllocation> {
    if !instance.is_independent() {
        return Err(Error::Config(
            "allocate_independent needs an instance without edges".into(),
        ));
    }
    if instance.n() == 0 {
        return Err(Error::Config("empty instance".into()));
    }
    let alts: Vec<Vec<Alternative>> = instance
        .jobs()
        .iter()
        .map(|j| prune_dominated(&j.exec, instance.resources()))
        .collect();
    let mut taus: Vec<&Rational> = alts.iter().flatten().map(|a| &a.time).collect();
    taus.sort();
    taus.dedup();

    let mut best: Option<(Rational, Vec<usize>, Rational)> = None;
    let mut tried = 0;
    for tau in taus {
        let mut pick = Vec::with_capacity(alts.len());
        for a in &alts {
            // Ties on area go to the faster alternative (earlier in the list).
            let choice = a
                .iter()
                .enumerate()
                .filter(|(_, x)| x.time <= *tau)
                .min_by(|(_, x), (_, y)| x.area.cmp(&y.area));
            match choice {
                Some((k, _)) => pick.push(k),
                None => break,
            }
        }
        if pick.len() < alts.len() {
            continue;
        }
        tried += 1;
        let max_t = pick
            .iter()
            .enumerate()
            .map(|(j, &k)| &alts[j][k].time)
            .max()
            .expect("n > 0");
        let area: Rational = pick
            .iter()
            .enumerate()
            .map(|(j, &k)| alts[j][k].area.clone())
            .sum();
        let l = area.max(max_t.clone());
        if best.as_ref().is_none_or(|(b, _, _)| l < *b) {
            best = Some((l, pick, tau.clone()));
        }
    }
    let (lower_bound, pick, threshold) =
        best.ok_or_else(|| Error::Invariant("no feasible threshold".into()))?;
    Ok(IndependentAllocation {
        decision: AllocationDecision(
            pick.iter()
                .enumerate()
                .map(|(j, &k)| alts[j][k].alloc.clone())
                .collect(),
        ),
        lower_bound,
        threshold,
        thresholds_tried: tried,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::aggregate_metrics;
    use crate::model::{AllocationVector, ExecProfile, Job, ResourceProfile};
    use crate::rational::{int, ratio};

    #[test]
    fn e2_reaches_two() {
        let p = ResourceProfile::new(vec![2]).unwrap();
        let e = ExecProfile::new(
            [
                (AllocationVector::new(vec![1], &p).unwrap(), int(2)),
                (AllocationVector::new(vec![2], &p).unwrap(), int(1)),
            ],
            &p,
        )
        .unwrap();
        let inst = Instance::new(
            p,
            vec![
                Job {
                    id: "a".into(),
                    exec: e.clone(),
                },
                Job {
                    id: "b".into(),
                    exec: e,
                },
            ],
            [],
        )
        .unwrap();
        let r = allocate_independent(&inst).unwrap();
        assert_eq!(r.lower_bound, int(2));
        assert_eq!(
            aggregate_metrics(&inst, &r.decision).unwrap().lower_bound,
            int(2)
        );
    }

    #[test]
    fn single_job_min_of_max() {
        let p = ResourceProfile::new(vec![4]).unwrap();
        let e = ExecProfile::new(
            [
                (AllocationVector::new(vec![1], &p).unwrap(), int(4)),
                (AllocationVector::new(vec![2], &p).unwrap(), ratio(5, 2)),
                (AllocationVector::new(vec![4], &p).unwrap(), int(2)),
            ],
            &p,
        )
        .unwrap();
        let inst = Instance::new(
            p,
            vec![Job {
                id: "a".into(),
                exec: e,
            }],
            [],
        )
        .unwrap();
        assert_eq!(allocate_independent(&inst).unwrap().lower_bound, int(2));
    }

    #[test]
    fn rejects_edges() {
        let p = ResourceProfile::new(vec![1]).unwrap();
        let e =
            ExecProfile::new([(AllocationVector::new(vec![1], &p).unwrap(), int(1))], &p).unwrap();
        let inst = Instance::new(
            p,
            vec![
                Job {
                    id: "a".into(),
                    exec: e.clone(),
                },
                Job {
                    id: "b".into(),
                    exec: e,
                },
            ],
            [(0, 1)],
        )
        .unwrap();
        assert!(allocate_independent(&inst).is_err());
    }
}
