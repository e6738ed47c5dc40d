//! Exact minimum makespan by exhaustive search, for tiny instances only.
//!
//! Every combination of table entries is a candidate decision. Decisions are
//! visited in increasing `L(p)` order and the search stops once `L(p)` reaches
//! the best makespan found. For each decision, a branch-and-bound over
//! left-shifted schedules decides at each event which subset of the ready,
//! fitting jobs to start; any optimal schedule can be shifted left until
//! every job starts at time zero or at some completion time, so restricting
//! starts to event times loses nothing.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::metrics::{average_area_of, lower_bound_of, tail_lengths};
use crate::model::{AllocationDecision, AllocationVector, Instance, Schedule};
use crate::rational::{int, Rational};

use super::list::{list_schedule, PriorityPolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteLimit {
    /// Largest number of allocation decisions to enumerate.
    pub max_decisions: u64,
    /// Largest number of search nodes over all decisions.
    pub max_nodes: u64,
}

impl Default for BruteLimit {
    fn default() -> Self {
        Self {
            max_decisions: 100_000,
            max_nodes: 5_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BruteResult {
    pub makespan: Rational,
    pub schedule: Schedule,
    pub decisions_examined: u64,
    pub nodes: u64,
}

struct Search<'a> {
    instance: &'a Instance,
    allocs: Vec<&'a AllocationVector>,
    durations: Vec<Rational>,
    tails: Vec<Rational>,
    /// Per-type `p^(i) * t` of each job.
    works: Vec<Vec<Rational>>,
    caps: Vec<Rational>,
    best: Rational,
    best_starts: Option<Vec<Rational>>,
    nodes: u64,
    max_nodes: u64,
}

struct State {
    now: Rational,
    start: Vec<Option<Rational>>,
    free: Vec<u32>,
}

impl Search<'_> {
    fn lower_bound(&self, st: &State) -> Rational {
        let n = self.durations.len();
        let mut lb = st.now.clone();
        let mut work = vec![Rational::zero(); self.caps.len()];
        for j in 0..n {
            match &st.start[j] {
                Some(s) => {
                    let c = s + &self.durations[j];
                    if c > st.now {
                        let left = &c - &st.now;
                        for (i, w) in work.iter_mut().enumerate() {
                            *w += &left * int(self.allocs[j].get(i) as i64);
                        }
                        lb = lb.max(c);
                    }
                }
                None => {
                    lb = lb.max(&st.now + &self.tails[j]);
                    for (i, w) in work.iter_mut().enumerate() {
                        *w += &self.works[j][i];
                    }
                }
            }
        }
        for (w, cap) in work.iter().zip(&self.caps) {
            lb = lb.max(&st.now + w / cap);
        }
        lb
    }

    fn dfs(&mut self, st: &mut State) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::BudgetExceeded(format!(
                "makespan search exceeded {} nodes",
                self.max_nodes
            )));
        }
        let n = self.durations.len();
        if st.start.iter().all(Option::is_some) {
            let t = (0..n)
                .map(|j| st.start[j].as_ref().unwrap() + &self.durations[j])
                .max()
                .unwrap_or_else(Rational::zero);
            if t < self.best {
                self.best = t;
                self.best_starts = Some(st.start.iter().map(|s| s.clone().unwrap()).collect());
            }
            return Ok(());
        }
        if self.lower_bound(st) >= self.best {
            return Ok(());
        }
        let done = |st: &State, j: usize| {
            st.start[j]
                .as_ref()
                .is_some_and(|s| s + &self.durations[j] <= st.now)
        };
        let candidates: Vec<usize> = (0..n)
            .filter(|&j| st.start[j].is_none())
            .filter(|&j| self.instance.preds(j).iter().all(|&p| done(st, p)))
            .filter(|&j| self.allocs[j].fits_within(&st.free))
            .collect();
        let any_running = (0..n).any(|j| {
            st.start[j]
                .as_ref()
                .is_some_and(|s| s + &self.durations[j] > st.now)
        });
        self.choose(st, &candidates, 0, false, any_running)
    }

    /// Enumerates subsets of `candidates[k..]` that fit together, then
    /// advances time to the next completion.
    fn choose(
        &mut self,
        st: &mut State,
        candidates: &[usize],
        k: usize,
        started: bool,
        any_running: bool,
    ) -> Result<()> {
        if k == candidates.len() {
            if !started && !any_running {
                return Ok(());
            }
            return self.advance(st);
        }
        let j = candidates[k];
        if self.allocs[j].fits_within(&st.free) {
            for (i, f) in st.free.iter_mut().enumerate() {
                *f -= self.allocs[j].get(i);
            }
            st.start[j] = Some(st.now.clone());
            let r = self.choose(st, candidates, k + 1, true, any_running);
            st.start[j] = None;
            for (i, f) in st.free.iter_mut().enumerate() {
                *f += self.allocs[j].get(i);
            }
            r?;
        }
        self.choose(st, candidates, k + 1, started, any_running)
    }

    fn advance(&mut self, st: &mut State) -> Result<()> {
        let n = self.durations.len();
        let all_started = st.start.iter().all(Option::is_some);
        if all_started {
            return self.dfs(st);
        }
        let next = (0..n)
            .filter_map(|j| st.start[j].as_ref().map(|s| s + &self.durations[j]))
            .filter(|c| *c > st.now)
            .min();
        let Some(next) = next else {
            return Ok(());
        };
        let prev = std::mem::replace(&mut st.now, next);
        let saved = st.free.clone();
        for j in 0..n {
            if let Some(s) = &st.start[j] {
                let c = s + &self.durations[j];
                if c > prev && c <= st.now {
                    for (i, f) in st.free.iter_mut().enumerate() {
                        *f += self.allocs[j].get(i);
                    }
                }
            }
        }
        let r = self.dfs(st);
        st.free = saved;
        st.now = prev;
        r
    }
}

/// Optimal makespan over all table entries and all start orders.
pub fn brute_force_makespan(instance: &Instance, limit: BruteLimit) -> Result<BruteResult> {
    let n = instance.n();
    let resources = instance.resources();
    let options: Vec<Vec<(&AllocationVector, &Rational)>> = instance
        .jobs()
        .iter()
        .map(|j| j.exec.iter().collect())
        .collect();
    let total = options
        .iter()
        .try_fold(1u64, |acc, o| acc.checked_mul(o.len() as u64))
        .unwrap_or(u64::MAX);
    if total > limit.max_decisions {
        return Err(Error::BudgetExceeded(format!(
            "{total} allocation decisions exceed the limit of {}",
            limit.max_decisions
        )));
    }

    let mut decisions: Vec<(Rational, Vec<usize>)> = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; n];
    loop {
        let durations: Vec<Rational> = (0..n).map(|j| options[j][idx[j]].1.clone()).collect();
        let areas: Vec<Rational> = (0..n)
            .map(|j| average_area_of(resources, options[j][idx[j]].0, options[j][idx[j]].1))
            .collect();
        decisions.push((lower_bound_of(instance, &durations, &areas), idx.clone()));
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    decisions.sort();

    let to_decision =
        |c: &[usize]| AllocationDecision((0..n).map(|j| options[j][c[j]].0.clone()).collect());
    let first = to_decision(&decisions[0].1);
    let seed = list_schedule(instance, &first, &PriorityPolicy::CriticalPath)?;
    let mut best = seed.makespan();
    let mut best_schedule = seed;
    let mut nodes = 0u64;
    let mut examined = 0u64;
    let caps: Vec<Rational> = resources
        .capacities()
        .iter()
        .map(|&c| int(c as i64))
        .collect();

    for (l, choice) in &decisions {
        if *l >= best {
            break;
        }
        examined += 1;
        let allocs: Vec<&AllocationVector> = (0..n).map(|j| options[j][choice[j]].0).collect();
        let durations: Vec<Rational> = (0..n).map(|j| options[j][choice[j]].1.clone()).collect();
        let works = (0..n)
            .map(|j| {
                (0..instance.d())
                    .map(|i| &durations[j] * int(allocs[j].get(i) as i64))
                    .collect()
            })
            .collect();
        let mut search = Search {
            instance,
            tails: tail_lengths(instance, &durations),
            allocs,
            durations,
            works,
            caps: caps.clone(),
            best: best.clone(),
            best_starts: None,
            nodes,
            max_nodes: limit.max_nodes,
        };
        let mut st = State {
            now: Rational::zero(),
            start: vec![None; n],
            free: resources.capacities().to_vec(),
        };
        search.dfs(&mut st)?;
        nodes = search.nodes;
        if let Some(starts) = search.best_starts {
            best = search.best;
            best_schedule = Schedule::new(instance, to_decision(choice), starts)?;
        }
    }
    Ok(BruteResult {
        makespan: best,
        schedule: best_schedule,
        decisions_examined: examined,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::validate_schedule;
    use crate::model::{ExecProfile, Job, ResourceProfile};

    fn e2() -> Instance {
        let p = ResourceProfile::new(vec![2]).unwrap();
        let e = ExecProfile::new(
            [
                (AllocationVector::new(vec![1], &p).unwrap(), int(2)),
                (AllocationVector::new(vec![2], &p).unwrap(), int(1)),
            ],
            &p,
        )
        .unwrap();
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
    fn e2_optimum_is_two() {
        let r = brute_force_makespan(&e2(), BruteLimit::default()).unwrap();
        assert_eq!(r.makespan, int(2));
        assert!(validate_schedule(&e2(), &r.schedule).is_empty());
    }

    #[test]
    fn single_job_takes_fastest() {
        let p = ResourceProfile::new(vec![4]).unwrap();
        let e = ExecProfile::new(
            [
                (AllocationVector::new(vec![1], &p).unwrap(), int(4)),
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
        assert_eq!(
            brute_force_makespan(&inst, BruteLimit::default())
                .unwrap()
                .makespan,
            int(2)
        );
    }

    #[test]
    fn precedence_and_capacity_interact() {
        // P = 2; a (1 unit, 1), b (1 unit, 3), c (2 units, 3) after a.
        // c cannot overlap b, so the best is a,b at 0 and c at 3.
        let p = ResourceProfile::new(vec![2]).unwrap();
        let mk = |a: u32, t: i64, id: &str| Job {
            id: id.into(),
            exec: ExecProfile::new([(AllocationVector::new(vec![a], &p).unwrap(), int(t))], &p)
                .unwrap(),
        };
        let inst = Instance::new(
            p.clone(),
            vec![mk(1, 1, "a"), mk(1, 3, "b"), mk(2, 3, "c")],
            [(0, 2)],
        )
        .unwrap();
        assert_eq!(
            brute_force_makespan(&inst, BruteLimit::default())
                .unwrap()
                .makespan,
            int(6)
        );
    }

    #[test]
    fn limit_refuses() {
        let lim = BruteLimit {
            max_decisions: 3,
            max_nodes: 10,
        };
        assert!(matches!(
            brute_force_makespan(&e2(), lim),
            Err(Error::BudgetExceeded(_))
        ));
    }
}
