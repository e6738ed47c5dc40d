//! Reference computations written without the library's algorithms, used
//! to cross-check them.

#![allow(dead_code)]

use moldsched::instances::{generate_instance, GeneratorConfig, GeneratorKind};
use moldsched::rational::int;
use moldsched::{AllocationDecision, AllocationVector, Instance, Rational, Schedule};
use num_traits::Zero;

/// `max(C(p), A(p))` straight from the definitions.
pub fn naive_l(instance: &Instance, decision: &[AllocationVector]) -> Rational {
    let n = instance.n();
    let d = instance.d();
    let times: Vec<Rational> = (0..n)
        .map(|j| {
            instance
                .job(j)
                .exec
                .time(&decision[j])
                .expect("listed")
                .clone()
        })
        .collect();
    let mut area = Rational::zero();
    for j in 0..n {
        for i in 0..d {
            area += &times[j] * int(decision[j].get(i) as i64)
                / int(instance.resources().capacity(i) as i64);
        }
    }
    area /= int(d as i64);
    // Longest path by repeated relaxation; n is tiny.
    let mut finish = times.clone();
    for _ in 0..n {
        for &(a, b) in instance.edges() {
            let cand = &finish[a] + &times[b];
            if cand > finish[b] {
                finish[b] = cand;
            }
        }
    }
    let c = finish.into_iter().max().unwrap_or_else(Rational::zero);
    c.max(area)
}

/// `L_min` by enumerating every table entry of every job.
pub fn naive_l_min(instance: &Instance) -> Rational {
    let tables: Vec<Vec<AllocationVector>> = instance
        .jobs()
        .iter()
        .map(|j| j.exec.iter().map(|(a, _)| a.clone()).collect())
        .collect();
    let mut idx = vec![0usize; tables.len()];
    let mut best: Option<Rational> = None;
    loop {
        let dec: Vec<AllocationVector> = idx
            .iter()
            .enumerate()
            .map(|(j, &k)| tables[j][k].clone())
            .collect();
        let l = naive_l(instance, &dec);
        if best.as_ref().is_none_or(|b| l < *b) {
            best = Some(l);
        }
        let mut j = 0;
        loop {
            if j == idx.len() {
                return best.expect("at least one decision");
            }
            idx[j] += 1;
            if idx[j] < tables[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Product of table sizes.
pub fn decision_space(instance: &Instance) -> u64 {
    instance
        .jobs()
        .iter()
        .map(|j| j.exec.len() as u64)
        .product()
}

/// Capacity at every start time and precedence, from scratch.
pub fn naive_schedule_ok(instance: &Instance, s: &Schedule) -> bool {
    let n = instance.n();
    let t: Vec<Rational> = (0..n)
        .map(|j| {
            instance
                .job(j)
                .exec
                .time(s.decision.get(j))
                .expect("listed")
                .clone()
        })
        .collect();
    for &(a, b) in instance.edges() {
        if &s.start_times[a] + &t[a] > s.start_times[b] {
            return false;
        }
    }
    for probe in &s.start_times {
        for i in 0..instance.d() {
            let used: u64 = (0..n)
                .filter(|&j| s.start_times[j] <= *probe && *probe < &s.start_times[j] + &t[j])
                .map(|j| s.decision.get(j).get(i) as u64)
                .sum();
            if used > instance.resources().capacity(i) as u64 {
                return false;
            }
        }
    }
    s.start_times.iter().all(|x| *x >= Rational::zero())
}

pub fn fastest(instance: &Instance) -> AllocationDecision {
    AllocationDecision(
        instance
            .jobs()
            .iter()
            .map(|j| j.exec.fastest().0.clone())
            .collect(),
    )
}

pub fn gen(
    kind: GeneratorKind,
    n: usize,
    d: usize,
    cap: (u32, u32),
    alts: usize,
    seed: u64,
) -> Instance {
    generate_instance(&GeneratorConfig {
        kind,
        n,
        d,
        capacity_min: cap.0,
        capacity_max: cap.1,
        max_alternatives: alts,
        seed,
        ..GeneratorConfig::default()
    })
    .expect("generator config is valid")
}
