use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::tail_lengths;
use crate::model::{AllocationDecision, Instance, Schedule};
use crate::rational::Rational;

/// Order in which the ready queue is scanned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PriorityPolicy {
    /// Queue insertion order; jobs that become ready together enter by index.
    Fifo,
    /// Longest execution time under the decision first.
    LongestTime,
    /// Longest remaining path (own time included) first.
    CriticalPath,
    /// Lower position first; `order` lists job indices.
    Explicit(Vec<usize>),
}

impl PriorityPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            PriorityPolicy::Fifo => "fifo",
            PriorityPolicy::LongestTime => "longest-time",
            PriorityPolicy::CriticalPath => "critical-path",
            PriorityPolicy::Explicit(_) => "explicit-order",
        }
    }
}

impl fmt::Display for PriorityPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PriorityPolicy {
    type Err = Error;

    /// Parses the three structural policies; an explicit order needs job ids.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fifo" => Ok(PriorityPolicy::Fifo),
            "longest-time" => Ok(PriorityPolicy::LongestTime),
            "critical-path" => Ok(PriorityPolicy::CriticalPath),
            _ => Err(Error::Config(format!("unknown policy {s:?}"))),
        }
    }
}

/// Sort key per job; smaller scans first. `None` means insertion order.
fn priority_keys(
    instance: &Instance,
    durations: &[Rational],
    policy: &PriorityPolicy,
) -> Result<Option<Vec<(Rational, usize)>>> {
    let n = instance.n();
    Ok(match policy {
        PriorityPolicy::Fifo => None,
        PriorityPolicy::LongestTime => Some((0..n).map(|j| (-durations[j].clone(), j)).collect()),
        PriorityPolicy::CriticalPath => {
            let tails = tail_lengths(instance, durations);
            Some((0..n).map(|j| (-tails[j].clone(), j)).collect())
        }
        PriorityPolicy::Explicit(order) => {
            let mut rank = vec![usize::MAX; n];
            for (pos, &j) in order.iter().enumerate() {
                if j >= n || rank[j] != usize::MAX {
                    return Err(Error::Config(
                        "explicit order must list every job exactly once".into(),
                    ));
                }
                rank[j] = pos;
            }
            if rank.contains(&usize::MAX) {
                return Err(Error::Config(
                    "explicit order must list every job exactly once".into(),
                ));
            }
            Some(
                rank.into_iter()
                    .enumerate()
                    .map(|(j, r)| (Rational::from_integer(r.into()), j))
                    .collect(),
            )
        }
    })
}

/// Event-driven list scheduling.
///
/// At time zero and at every completion event, jobs that just became ready
/// join the queue in ascending index order; the queue is then scanned once
/// in policy order and every job whose allocation fits the free capacity on
/// all types starts immediately. Simultaneous completions form one event.
pub fn list_schedule(
    instance: &Instance,
    decision: &AllocationDecision,
    policy: &PriorityPolicy,
) -> Result<Schedule> {
    decision.validate(instance)?;
    let caps = instance.resources().capacities().to_vec();
    for (j, p) in decision.iter().enumerate() {
        if !p.fits_within(&caps) {
            return Err(Error::Allocation(format!(
                "job {:?}: allocation {p} exceeds the capacities",
                instance.job(j).id
            )));
        }
    }
    let n = instance.n();
    let durations = decision.durations(instance)?;
    let keys = priority_keys(instance, &durations, policy)?;

    let mut free = caps.clone();
    let mut missing: Vec<usize> = (0..n).map(|j| instance.preds(j).len()).collect();
    let mut queue: Vec<usize> = (0..n).filter(|&j| missing[j] == 0).collect();
    let mut start: Vec<Option<Rational>> = vec![None; n];
    let mut running: BTreeMap<Rational, Vec<usize>> = BTreeMap::new();
    let mut now = Rational::from_integer(0.into());
    let mut done = 0;

    loop {
        if let Some(keys) = &keys {
            queue.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
        }
        let mut waiting = Vec::with_capacity(queue.len());
        for &j in &queue {
            let p = decision.get(j);
            if p.fits_within(&free) {
                for (i, f) in free.iter_mut().enumerate() {
                    *f -= p.get(i);
                }
                start[j] = Some(now.clone());
                running.entry(&now + &durations[j]).or_default().push(j);
            } else {
                waiting.push(j);
            }
        }
        // Free capacity only shrank during the scan, so nothing left behind fits.
        if let Some(&j) = waiting
            .iter()
            .find(|&&j| decision.get(j).fits_within(&free))
        {
            return Err(Error::Invariant(format!(
                "job {j} fits after a single scan"
            )));
        }
        queue = waiting;

        let Some((t, finished)) = running.pop_first() else {
            break;
        };
        now = t;
        let mut newly = Vec::new();
        for j in finished {
            done += 1;
            let p = decision.get(j);
            for (i, f) in free.iter_mut().enumerate() {
                *f += p.get(i);
            }
            for &s in instance.succs(j) {
                missing[s] -= 1;
                if missing[s] == 0 {
                    newly.push(s);
                }
            }
        }
        newly.sort_unstable();
        queue.extend(newly);
    }
    if done != n || !queue.is_empty() {
        return Err(Error::Invariant(
            "list scheduling stalled with unscheduled jobs".into(),
        ));
    }
    let start_times = start
        .into_iter()
        .map(|s| s.expect("every job started"))
        .collect();
    Schedule::new(instance, decision.clone(), start_times)
}

/// A ready job that fitted the free capacity at some event but was not
/// started there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdleViolation {
    pub job: usize,
    pub time: Rational,
}

/// Replays a schedule and reports every event time at which a ready,
/// unstarted job would have fitted.
pub fn check_work_conservation(instance: &Instance, schedule: &Schedule) -> Vec<IdleViolation> {
    let n = instance.n();
    let caps = instance.resources().capacities();
    let mut events: Vec<Rational> = (0..n)
        .flat_map(|j| [schedule.start_times[j].clone(), schedule.completion(j)])
        .collect();
    events.sort();
    events.dedup();
    let mut out = Vec::new();
    for t in &events {
        let mut free: Vec<i64> = caps.iter().map(|&c| c as i64).collect();
        for j in 0..n {
            if schedule.start_times[j] <= *t && schedule.completion(j) > *t {
                for (i, f) in free.iter_mut().enumerate() {
                    *f -= schedule.decision.get(j).get(i) as i64;
                }
            }
        }
        for j in 0..n {
            let ready = instance
                .preds(j)
                .iter()
                .all(|&p| schedule.completion(p) <= *t);
            if ready && schedule.start_times[j] > *t {
                let p = schedule.decision.get(j);
                if (0..caps.len()).all(|i| p.get(i) as i64 <= free[i]) {
                    out.push(IdleViolation {
                        job: j,
                        time: t.clone(),
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
    use crate::metrics::validate_schedule;
    use crate::model::{AllocationVector, ExecProfile, Job, ResourceProfile};
    use crate::rational::int;

    fn single(p: &ResourceProfile, alloc: &[u32], t: i64, id: &str) -> Job {
        Job {
            id: id.into(),
            exec: ExecProfile::new(
                [(AllocationVector::new(alloc.to_vec(), p).unwrap(), int(t))],
                p,
            )
            .unwrap(),
        }
    }

    fn decision_of(inst: &Instance) -> AllocationDecision {
        AllocationDecision(
            inst.jobs()
                .iter()
                .map(|j| j.exec.fastest().0.clone())
                .collect(),
        )
    }

    #[test]
    fn full_capacity_jobs_serialize() {
        let p = ResourceProfile::new(vec![4]).unwrap();
        let inst = Instance::new(
            p.clone(),
            vec![single(&p, &[4], 2, "a"), single(&p, &[4], 3, "b")],
            [],
        )
        .unwrap();
        let s = list_schedule(&inst, &decision_of(&inst), &PriorityPolicy::Fifo).unwrap();
        assert_eq!(s.makespan(), int(5));
        assert!(validate_schedule(&inst, &s).is_empty());
    }

    #[test]
    fn disjoint_types_run_concurrently() {
        let p = ResourceProfile::new(vec![1, 1]).unwrap();
        let inst = Instance::new(
            p.clone(),
            vec![single(&p, &[1, 0], 2, "a"), single(&p, &[0, 1], 3, "b")],
            [],
        )
        .unwrap();
        let s = list_schedule(&inst, &decision_of(&inst), &PriorityPolicy::Fifo).unwrap();
        assert_eq!(s.makespan(), int(3));
    }

    #[test]
    fn chain_waits_for_predecessor() {
        let p = ResourceProfile::new(vec![4]).unwrap();
        let inst = Instance::new(
            p.clone(),
            vec![single(&p, &[1], 2, "a"), single(&p, &[1], 3, "b")],
            [(0, 1)],
        )
        .unwrap();
        let s = list_schedule(&inst, &decision_of(&inst), &PriorityPolicy::Fifo).unwrap();
        assert_eq!(s.start_times, vec![int(0), int(2)]);
        assert!(check_work_conservation(&inst, &s).is_empty());
    }

    #[test]
    fn policies_change_the_order() {
        let p = ResourceProfile::new(vec![2]).unwrap();
        let jobs = vec![single(&p, &[2], 1, "a"), single(&p, &[2], 5, "b")];
        let inst = Instance::new(p, jobs, []).unwrap();
        let dec = decision_of(&inst);
        let fifo = list_schedule(&inst, &dec, &PriorityPolicy::Fifo).unwrap();
        assert_eq!(fifo.start_times, vec![int(0), int(1)]);
        let lt = list_schedule(&inst, &dec, &PriorityPolicy::LongestTime).unwrap();
        assert_eq!(lt.start_times, vec![int(5), int(0)]);
        let ex = list_schedule(&inst, &dec, &PriorityPolicy::Explicit(vec![1, 0])).unwrap();
        assert_eq!(ex.start_times, lt.start_times);
        assert!(list_schedule(&inst, &dec, &PriorityPolicy::Explicit(vec![1])).is_err());
    }

    #[test]
    fn critical_path_prefers_long_tails() {
        let p = ResourceProfile::new(vec![1]).unwrap();
        // a (1) alone; b (1) -> c (5): critical path starts b first.
        let jobs = vec![
            single(&p, &[1], 1, "a"),
            single(&p, &[1], 1, "b"),
            single(&p, &[1], 5, "c"),
        ];
        let inst = Instance::new(p, jobs, [(1, 2)]).unwrap();
        let dec = decision_of(&inst);
        let s = list_schedule(&inst, &dec, &PriorityPolicy::CriticalPath).unwrap();
        assert_eq!(s.start_times[1], int(0));
        assert_eq!(s.makespan(), int(7));
        let f = list_schedule(&inst, &dec, &PriorityPolicy::Fifo).unwrap();
        assert_eq!(f.makespan(), int(7));
    }

    #[test]
    fn replay_detects_idling() {
        let p = ResourceProfile::new(vec![2]).unwrap();
        let inst = Instance::new(
            p.clone(),
            vec![single(&p, &[1], 2, "a"), single(&p, &[1], 2, "b")],
            [],
        )
        .unwrap();
        let s = Schedule::new(&inst, decision_of(&inst), vec![int(0), int(2)]).unwrap();
        assert_eq!(
            check_work_conservation(&inst, &s),
            vec![IdleViolation {
                job: 1,
                time: int(0)
            }]
        );
    }
}
