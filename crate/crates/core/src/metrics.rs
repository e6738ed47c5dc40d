//! Work, area, critical path and the lower-bound function `L`, plus the
//! schedule and monotonicity validators.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{
    AllocationDecision, AllocationVector, ExecProfile, Instance, ResourceProfile, Schedule,
};
use crate::rational::{self, int, Rational};

/// Work `p^(i) * t(p)` of `job` on resource type `type_index`.
pub fn work(
    instance: &Instance,
    job: usize,
    alloc: &AllocationVector,
    type_index: usize,
) -> Result<Rational> {
    let t = lookup(instance, job, alloc)?;
    if type_index >= instance.d() {
        return Err(Error::Lookup(format!(
            "resource type {type_index} out of range"
        )));
    }
    Ok(int(alloc.get(type_index) as i64) * t)
}

/// Area `w^(i) / P^(i)` on one resource type.
pub fn area_on(
    instance: &Instance,
    job: usize,
    alloc: &AllocationVector,
    type_index: usize,
) -> Result<Rational> {
    Ok(work(instance, job, alloc, type_index)?
        / int(instance.resources().capacity(type_index) as i64))
}

/// Average area over all resource types.
pub fn average_area(instance: &Instance, job: usize, alloc: &AllocationVector) -> Result<Rational> {
    let t = lookup(instance, job, alloc)?;
    Ok(average_area_of(instance.resources(), alloc, t))
}

/// Average area of an allocation with known time.
pub fn average_area_of(
    resources: &ResourceProfile,
    alloc: &AllocationVector,
    time: &Rational,
) -> Rational {
    let mut sum = Rational::zero();
    for (i, &cap) in resources.capacities().iter().enumerate() {
        let a = alloc.get(i);
        if a > 0 {
            sum += Rational::new((a as i64).into(), (cap as i64).into());
        }
    }
    sum * time / int(resources.d() as i64)
}

/// Per-type areas of an allocation with known time.
pub fn areas_of(
    resources: &ResourceProfile,
    alloc: &AllocationVector,
    time: &Rational,
) -> Vec<Rational> {
    resources
        .capacities()
        .iter()
        .enumerate()
        .map(|(i, &cap)| Rational::new((alloc.get(i) as i64).into(), (cap as i64).into()) * time)
        .collect()
}

fn lookup<'a>(
    instance: &'a Instance,
    job: usize,
    alloc: &AllocationVector,
) -> Result<&'a Rational> {
    let j = instance
        .jobs()
        .get(job)
        .ok_or_else(|| Error::Lookup(format!("job index {job} out of range")))?;
    j.exec
        .time(alloc)
        .ok_or_else(|| Error::Lookup(format!("job {:?} has no alternative {alloc}", j.id)))
}

/// Aggregate quantities of an allocation decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Aggregate {
    /// Average total area `A(p)`.
    pub area: Rational,
    /// Total area per type `A^(i)(p)`.
    pub area_per_type: Vec<Rational>,
    /// Total work per type `W^(i)(p)`.
    pub work_per_type: Vec<Rational>,
    /// Critical path length `C(p)`.
    pub critical_path_length: Rational,
    /// One longest source-to-sink path (job indices).
    pub critical_path: Vec<usize>,
    /// `L(p) = max(A(p), C(p))`.
    pub lower_bound: Rational,
}

pub fn aggregate_metrics(instance: &Instance, decision: &AllocationDecision) -> Result<Aggregate> {
    decision.validate(instance)?;
    let durations = decision.durations(instance)?;
    let d = instance.d();
    let mut work_per_type = vec![Rational::zero(); d];
    for (j, alloc) in decision.iter().enumerate() {
        for (i, w) in work_per_type.iter_mut().enumerate() {
            if alloc.get(i) > 0 {
                *w += int(alloc.get(i) as i64) * &durations[j];
            }
        }
    }
    let area_per_type: Vec<Rational> = work_per_type
        .iter()
        .zip(instance.resources().capacities())
        .map(|(w, &c)| w / int(c as i64))
        .collect();
    let area = area_per_type
        .iter()
        .fold(Rational::zero(), |acc, a| acc + a)
        / int(d as i64);
    let (critical_path_length, critical_path) = longest_path(instance, &durations);
    let lower_bound = area.clone().max(critical_path_length.clone());
    Ok(Aggregate {
        area,
        area_per_type,
        work_per_type,
        critical_path_length,
        critical_path,
        lower_bound,
    })
}

/// `L(p)` computed from per-job times and average areas without building an
/// [`AllocationDecision`].
pub fn lower_bound_of(instance: &Instance, durations: &[Rational], areas: &[Rational]) -> Rational {
    let area = areas.iter().fold(Rational::zero(), |acc, a| acc + a);
    let cp = critical_path_length(instance, durations);
    area.max(cp)
}

/// Longest path by summing job durations.
pub fn critical_path_length(instance: &Instance, durations: &[Rational]) -> Rational {
    let mut finish: Vec<Rational> = vec![Rational::zero(); instance.n()];
    let mut best = Rational::zero();
    for &j in instance.topo_order() {
        let start = instance
            .preds(j)
            .iter()
            .map(|&p| &finish[p])
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero);
        finish[j] = start + &durations[j];
        if finish[j] > best {
            best = finish[j].clone();
        }
    }
    best
}

/// Longest path and one witness (ties toward smaller job indices).
pub fn longest_path(instance: &Instance, durations: &[Rational]) -> (Rational, Vec<usize>) {
    let n = instance.n();
    let mut finish: Vec<Rational> = vec![Rational::zero(); n];
    let mut via: Vec<Option<usize>> = vec![None; n];
    for &j in instance.topo_order() {
        let mut start = Rational::zero();
        for &p in instance.preds(j) {
            if via[j].is_none() || finish[p] > start {
                start = finish[p].clone();
                via[j] = Some(p);
            }
        }
        finish[j] = start + &durations[j];
    }
    let Some(mut end) = (0..n).max_by(|&a, &b| finish[a].cmp(&finish[b]).then(b.cmp(&a))) else {
        return (Rational::zero(), Vec::new());
    };
    let len = finish[end].clone();
    let mut path = vec![end];
    while let Some(p) = via[end] {
        path.push(p);
        end = p;
    }
    path.reverse();
    (len, path)
}

/// Longest path from each job to a sink, including the job's own time.
pub fn tail_lengths(instance: &Instance, durations: &[Rational]) -> Vec<Rational> {
    let mut tail = vec![Rational::zero(); instance.n()];
    for &j in instance.topo_order().iter().rev() {
        let rest = instance
            .succs(j)
            .iter()
            .map(|&s| &tail[s])
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero);
        tail[j] = rest + &durations[j];
    }
    tail
}

/// A broken validity condition in a schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleViolation {
    Capacity {
        time: Rational,
        type_index: usize,
        used: u64,
        capacity: u32,
        jobs: Vec<String>,
    },
    Precedence {
        pred: String,
        succ: String,
        pred_completion: Rational,
        succ_start: Rational,
    },
    NegativeStart {
        job: String,
        start: Rational,
    },
    Allocation {
        job: String,
        detail: String,
    },
    Shape(String),
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleViolation::Capacity {
                time,
                type_index,
                used,
                capacity,
                jobs,
            } => write!(
                f,
                "capacity exceeded on type {type_index} at t={}: {used} > {capacity} (jobs {})",
                rational::format(time),
                jobs.join(", ")
            ),
            ScheduleViolation::Precedence {
                pred,
                succ,
                pred_completion,
                succ_start,
            } => write!(
                f,
                "{succ} starts at {} before {pred} completes at {}",
                rational::format(succ_start),
                rational::format(pred_completion)
            ),
            ScheduleViolation::NegativeStart { job, start } => {
                write!(
                    f,
                    "{job} starts at negative time {}",
                    rational::format(start)
                )
            }
            ScheduleViolation::Allocation { job, detail } => write!(f, "{job}: {detail}"),
            ScheduleViolation::Shape(s) => f.write_str(s),
        }
    }
}

/// Checks capacities at every start event and all precedence constraints.
/// Returns every violation found; an empty list means the schedule is valid.
pub fn validate_schedule(instance: &Instance, schedule: &Schedule) -> Vec<ScheduleViolation> {
    let n = instance.n();
    let mut out = Vec::new();
    if schedule.start_times.len() != n
        || schedule.decision.len() != n
        || schedule.durations.len() != n
    {
        out.push(ScheduleViolation::Shape(format!(
            "schedule covers {} jobs, instance has {n}",
            schedule.start_times.len()
        )));
        return out;
    }
    let id = |j: usize| instance.job(j).id.clone();
    for j in 0..n {
        let alloc = schedule.decision.get(j);
        match instance.job(j).exec.time(alloc) {
            None => out.push(ScheduleViolation::Allocation {
                job: id(j),
                detail: format!("allocation {alloc} is not in the job's table"),
            }),
            Some(t) if t != &schedule.durations[j] => out.push(ScheduleViolation::Allocation {
                job: id(j),
                detail: "recorded duration differs from the table".into(),
            }),
            _ => {}
        }
        if schedule.start_times[j].is_negative() {
            out.push(ScheduleViolation::NegativeStart {
                job: id(j),
                start: schedule.start_times[j].clone(),
            });
        }
    }
    let completions: Vec<Rational> = (0..n).map(|j| schedule.completion(j)).collect();
    // Utilization only rises at start events, so those are the only points to check.
    let mut events: Vec<&Rational> = schedule.start_times.iter().collect();
    events.sort();
    events.dedup();
    for t in events {
        let running: Vec<usize> = (0..n)
            .filter(|&j| &schedule.start_times[j] <= t && t < &completions[j])
            .collect();
        for i in 0..instance.d() {
            let used: u64 = running
                .iter()
                .map(|&j| schedule.decision.get(j).get(i) as u64)
                .sum();
            let cap = instance.resources().capacity(i);
            if used > cap as u64 {
                let mut jobs: Vec<String> = running
                    .iter()
                    .filter(|&&j| schedule.decision.get(j).get(i) > 0)
                    .map(|&j| id(j))
                    .collect();
                jobs.sort();
                out.push(ScheduleViolation::Capacity {
                    time: t.clone(),
                    type_index: i,
                    used,
                    capacity: cap,
                    jobs,
                });
            }
        }
    }
    for &(a, b) in instance.edges() {
        if schedule.start_times[b] < completions[a] {
            out.push(ScheduleViolation::Precedence {
                pred: id(a),
                succ: id(b),
                pred_completion: completions[a].clone(),
                succ_start: schedule.start_times[b].clone(),
            });
        }
    }
    out
}

/// Which half of the monotonicity assumption a pair breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonotonicityKind {
    /// More resources but strictly slower.
    SlowerWithMore,
    /// Speedup exceeds the largest per-type resource ratio.
    Superlinear,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotonicityViolation {
    pub smaller: AllocationVector,
    pub larger: AllocationVector,
    pub kind: MonotonicityKind,
}

impl fmt::Display for MonotonicityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self {
                smaller,
                larger,
                kind: MonotonicityKind::SlowerWithMore,
            } => write!(
                f,
                "allocation {larger} is slower than the smaller {smaller}"
            ),
            Self {
                smaller, larger, ..
            } => write!(f, "superlinear speedup from {smaller} to {larger}"),
        }
    }
}

/// Largest per-type ratio `q^(i)/p^(i)`; `None` when some type goes from 0
/// to a positive amount (the bound is then vacuous). Types that are zero in
/// both contribute 1.
pub fn max_resource_ratio(p: &AllocationVector, q: &AllocationVector) -> Option<Rational> {
    let mut best = Rational::one();
    for (&a, &b) in p.amounts().iter().zip(q.amounts()) {
        match (a, b) {
            (0, 0) => {}
            (0, _) => return None,
            (a, b) => {
                let r = Rational::new((b as i64).into(), (a as i64).into());
                if r > best {
                    best = r;
                }
            }
        }
    }
    Some(best)
}

/// Checks `t(q) <= t(p) <= max_i(q^(i)/p^(i)) * t(q)` for every comparable
/// pair `p <= q` in the table.
pub fn validate_monotonicity(exec: &ExecProfile) -> Vec<MonotonicityViolation> {
    let entries: Vec<(&AllocationVector, &Rational)> = exec.iter().collect();
    let mut out = Vec::new();
    for (p, tp) in &entries {
        for (q, tq) in &entries {
            if p == q || !p.precedes(q) {
                continue;
            }
            if tq > tp {
                out.push(MonotonicityViolation {
                    smaller: (*p).clone(),
                    larger: (*q).clone(),
                    kind: MonotonicityKind::SlowerWithMore,
                });
            }
            if let Some(r) = max_resource_ratio(p, q) {
                if **tp > r * *tq {
                    out.push(MonotonicityViolation {
                        smaller: (*p).clone(),
                        larger: (*q).clone(),
                        kind: MonotonicityKind::Superlinear,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Job, ResourceProfile};
    use crate::rational::ratio;

    fn rp(c: &[u32]) -> ResourceProfile {
        ResourceProfile::new(c.to_vec()).unwrap()
    }

    fn av(a: &[u32], p: &ResourceProfile) -> AllocationVector {
        AllocationVector::new(a.to_vec(), p).unwrap()
    }

    fn exec(p: &ResourceProfile, alts: &[(&[u32], Rational)]) -> ExecProfile {
        ExecProfile::new(alts.iter().map(|(a, t)| (av(a, p), t.clone())), p).unwrap()
    }

    fn single(p: ResourceProfile, alts: &[(&[u32], Rational)]) -> Instance {
        let e = exec(&p, alts);
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

    /// Instance E2: d=1, P=2, two independent jobs with t(1)=2, t(2)=1.
    fn e2() -> Instance {
        let p = rp(&[2]);
        let e = exec(&p, &[(&[1], int(2)), (&[2], int(1))]);
        Instance::new(
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
        .unwrap()
    }

    #[test]
    fn work_and_area_examples() {
        let p = rp(&[2, 2]);
        let inst = single(p.clone(), &[(&[2, 1], int(2)), (&[1, 1], int(4))]);
        let a = av(&[2, 1], &p);
        assert_eq!(work(&inst, 0, &a, 0).unwrap(), int(4));
        assert_eq!(work(&inst, 0, &a, 1).unwrap(), int(2));
        assert_eq!(average_area(&inst, 0, &a).unwrap(), ratio(3, 2));
        assert_eq!(average_area(&inst, 0, &av(&[1, 1], &p)).unwrap(), int(2));
        assert!(work(&inst, 0, &av(&[2, 2], &p), 0).is_err());
    }

    #[test]
    fn zero_component_has_zero_work() {
        let p = rp(&[2, 2]);
        let inst = single(p.clone(), &[(&[2, 0], int(3))]);
        let a = av(&[2, 0], &p);
        assert_eq!(work(&inst, 0, &a, 1).unwrap(), int(0));
        assert_eq!(area_on(&inst, 0, &a, 1).unwrap(), int(0));
    }

    #[test]
    fn chain_critical_path() {
        let p = rp(&[1]);
        let jobs = vec![
            Job {
                id: "a".into(),
                exec: exec(&p, &[(&[1], int(2))]),
            },
            Job {
                id: "b".into(),
                exec: exec(&p, &[(&[1], int(3))]),
            },
        ];
        let inst = Instance::new(p.clone(), jobs, [(0, 1)]).unwrap();
        let agg = aggregate_metrics(&inst, &AllocationDecision(vec![av(&[1], &p); 2])).unwrap();
        assert_eq!(agg.critical_path_length, int(5));
        assert_eq!(agg.critical_path, vec![0, 1]);
    }

    #[test]
    fn single_job_lower_bound() {
        let p = rp(&[4]);
        let inst = single(p.clone(), &[(&[4], int(3))]);
        let agg = aggregate_metrics(&inst, &AllocationDecision(vec![av(&[4], &p)])).unwrap();
        assert_eq!(agg.area, int(3));
        assert_eq!(agg.lower_bound, int(3));
        let inst = single(p.clone(), &[(&[1], int(3))]);
        let agg = aggregate_metrics(&inst, &AllocationDecision(vec![av(&[1], &p)])).unwrap();
        assert_eq!(agg.area, ratio(3, 4));
        assert_eq!(agg.lower_bound, int(3));
    }

    #[test]
    fn e2_full_allocation() {
        let inst = e2();
        let p = inst.resources().clone();
        let agg = aggregate_metrics(&inst, &AllocationDecision(vec![av(&[2], &p); 2])).unwrap();
        assert_eq!(agg.area, int(2));
        assert_eq!(agg.critical_path_length, int(1));
        assert_eq!(agg.lower_bound, int(2));
    }

    #[test]
    fn area_identities() {
        let p = rp(&[3, 5]);
        let e = exec(&p, &[(&[1, 2], ratio(7, 3)), (&[3, 1], int(2))]);
        let inst = Instance::new(
            p.clone(),
            vec![
                Job {
                    id: "x".into(),
                    exec: e.clone(),
                },
                Job {
                    id: "y".into(),
                    exec: e,
                },
            ],
            [],
        )
        .unwrap();
        let dec = AllocationDecision(vec![av(&[1, 2], &p), av(&[3, 1], &p)]);
        let agg = aggregate_metrics(&inst, &dec).unwrap();
        for i in 0..2 {
            assert_eq!(
                agg.area_per_type[i],
                &agg.work_per_type[i] / int(p.capacity(i) as i64)
            );
        }
        let mean = (&agg.area_per_type[0] + &agg.area_per_type[1]) / int(2);
        assert_eq!(agg.area, mean);
    }

    #[test]
    fn full_capacity_jobs_overlapping_violate_every_type() {
        let p = rp(&[2, 3]);
        let e = exec(&p, &[(&[2, 3], int(1))]);
        let inst = Instance::new(
            p.clone(),
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
        let s = Schedule::new(
            &inst,
            AllocationDecision(vec![av(&[2, 3], &p); 2]),
            vec![int(0), int(0)],
        )
        .unwrap();
        let v = validate_schedule(&inst, &s);
        let types: Vec<usize> = v
            .iter()
            .filter_map(|x| match x {
                ScheduleViolation::Capacity { type_index, .. } => Some(*type_index),
                _ => None,
            })
            .collect();
        assert_eq!(types, vec![0, 1]);
    }

    #[test]
    fn precedence_boundary_equality_is_valid() {
        let p = rp(&[1]);
        let e = exec(&p, &[(&[1], ratio(3, 2))]);
        let inst = Instance::new(
            p.clone(),
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
        let dec = AllocationDecision(vec![av(&[1], &p); 2]);
        let ok = Schedule::new(&inst, dec.clone(), vec![int(0), ratio(3, 2)]).unwrap();
        assert!(validate_schedule(&inst, &ok).is_empty());
        let bad = Schedule::new(&inst, dec, vec![int(0), int(1)]).unwrap();
        let v = validate_schedule(&inst, &bad);
        assert!(v
            .iter()
            .any(|x| matches!(x, ScheduleViolation::Precedence { .. })));
    }

    #[test]
    fn monotonicity_examples() {
        let p = rp(&[2]);
        let ok = exec(&p, &[(&[1], int(4)), (&[2], int(2))]);
        assert!(validate_monotonicity(&ok).is_empty());
        let bad = exec(&p, &[(&[1], int(5)), (&[2], int(2))]);
        let v = validate_monotonicity(&bad);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, MonotonicityKind::Superlinear);
        let slower = exec(&p, &[(&[1], int(2)), (&[2], int(3))]);
        assert_eq!(
            validate_monotonicity(&slower)[0].kind,
            MonotonicityKind::SlowerWithMore
        );
    }

    #[test]
    fn zero_component_conventions() {
        let p = rp(&[4, 4]);
        // Zero to positive on type 1: the upper bound is vacuous.
        let e = exec(&p, &[(&[1, 0], int(100)), (&[1, 1], int(1))]);
        assert!(validate_monotonicity(&e).is_empty());
        // Zero in both: ratio comes from the other type only.
        let e = exec(&p, &[(&[1, 0], int(5)), (&[2, 0], int(2))]);
        assert_eq!(validate_monotonicity(&e).len(), 1);
    }
}
