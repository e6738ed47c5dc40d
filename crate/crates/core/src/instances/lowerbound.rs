//! Adversarial family on which list scheduling loses a factor of about `d`.
//!
//! All capacities are 2 and every job runs for one time unit on one unit of
//! a single type. Types `0..d-1` form stages of `2M` jobs each; one job per
//! stage, the unlocker, is the parent of every job in the next stage. The
//! last type holds `2M/3` gadgets of three jobs `a, b, c`, and `a` of gadget
//! `g` is the parent of all of gadget `g + 1`.
//!
//! Running unlockers and `a` jobs first pipelines the stages: stage `s`
//! starts at time `s` and all finish by `M + d - 1`. Running them last
//! serializes the stages (`M` each) and spends two steps on every gadget,
//! for `M(d - 1) + 4M/3` in total.

use crate::error::{Error, Result};
use crate::model::{
    AllocationDecision, AllocationVector, ExecProfile, Instance, Job, ResourceProfile,
};
use crate::rational::{int, Rational};
use crate::scheduler::{list_schedule, PriorityPolicy};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerBoundBundle {
    pub instance: Instance,
    pub optimal_priority: Vec<String>,
    pub adversarial_priority: Vec<String>,
}

impl LowerBoundBundle {
    pub fn optimal_makespan(d: usize, m: u32) -> Rational {
        int(m as i64 + d as i64 - 1)
    }

    pub fn adversarial_makespan(d: usize, m: u32) -> Rational {
        int(m as i64 * d as i64 + m as i64 / 3)
    }

    /// Makespans under the two stored priorities.
    pub fn simulate(&self) -> Result<(Rational, Rational)> {
        let decision = AllocationDecision(
            self.instance
                .jobs()
                .iter()
                .map(|j| j.exec.fastest().0.clone())
                .collect(),
        );
        let run = |order: &[String]| -> Result<Rational> {
            let idx = order
                .iter()
                .map(|id| {
                    self.instance.job_index(id).ok_or_else(|| {
                        Error::Validation(vec![format!("priority names unknown job {id:?}")])
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(
                list_schedule(&self.instance, &decision, &PriorityPolicy::Explicit(idx))?
                    .makespan(),
            )
        };
        Ok((
            run(&self.optimal_priority)?,
            run(&self.adversarial_priority)?,
        ))
    }
}

pub fn lower_bound_bundle(d: usize, m: u32) -> Result<LowerBoundBundle> {
    if d == 0 {
        return Err(Error::Config("d must be at least 1".into()));
    }
    if m == 0 || m % 3 != 0 {
        return Err(Error::Config(format!(
            "M = {m} is not a positive multiple of 3"
        )));
    }
    let resources = ResourceProfile::new(vec![2; d])?;
    let unit = |ty: usize| -> Result<ExecProfile> {
        let mut v = vec![0; d];
        v[ty] = 1;
        ExecProfile::new(
            [(AllocationVector::new(v, &resources)?, int(1))],
            &resources,
        )
    };

    let mut jobs = Vec::new();
    let mut edges = Vec::new();
    // Ids in priority-neutral order, split into "key" jobs (unlockers and
    // gadget heads) and the rest, per type.
    let mut key: Vec<Vec<String>> = vec![Vec::new(); d];
    let mut rest: Vec<Vec<String>> = vec![Vec::new(); d];
    let mut parent: Option<usize> = None;

    for s in 0..d - 1 {
        let exec = unit(s)?;
        let first = jobs.len();
        for k in 0..2 * m as usize {
            let id = if k == 0 {
                format!("t{s}_u")
            } else {
                format!("t{s}_{k}")
            };
            if let Some(p) = parent {
                edges.push((p, jobs.len()));
            }
            if k == 0 { &mut key[s] } else { &mut rest[s] }.push(id.clone());
            jobs.push(Job {
                id,
                exec: exec.clone(),
            });
        }
        parent = Some(first);
    }

    let last = d - 1;
    let exec = unit(last)?;
    for g in 0..(2 * m / 3) as usize {
        let head = jobs.len();
        for (k, tag) in ["a", "b", "c"].iter().enumerate() {
            let id = format!("g{g}_{tag}");
            if let Some(p) = parent {
                edges.push((p, jobs.len()));
            }
            if k == 0 {
                &mut key[last]
            } else {
                &mut rest[last]
            }
            .push(id.clone());
            jobs.push(Job {
                id,
                exec: exec.clone(),
            });
        }
        parent = Some(head);
    }

    let mut optimal_priority = Vec::new();
    let mut adversarial_priority = Vec::new();
    for ty in 0..d {
        optimal_priority.extend(key[ty].iter().cloned());
        optimal_priority.extend(rest[ty].iter().cloned());
        adversarial_priority.extend(rest[ty].iter().cloned());
        adversarial_priority.extend(key[ty].iter().cloned());
    }

    let bundle = LowerBoundBundle {
        instance: Instance::new(resources, jobs, edges)?,
        optimal_priority,
        adversarial_priority,
    };
    let (opt, adv) = bundle.simulate()?;
    let (want_opt, want_adv) = (
        LowerBoundBundle::optimal_makespan(d, m),
        LowerBoundBundle::adversarial_makespan(d, m),
    );
    if opt != want_opt || adv != want_adv {
        return Err(Error::Invariant(format!(
            "lower-bound bundle (d = {d}, M = {m}) simulates to {opt} and {adv}, expected {want_opt} and {want_adv}"
        )));
    }
    Ok(bundle)
}
