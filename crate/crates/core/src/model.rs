//! Domain types: resources, allocations, execution-time tables, instances,
//! allocation decisions and schedules.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// The `d` resource types and their integer capacities.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ResourceProfile {
    capacities: Vec<u32>,
}

impl ResourceProfile {
    pub fn new(capacities: Vec<u32>) -> Result<Self> {
        if capacities.is_empty() {
            return Err(Error::Validation(vec![
                "at least one resource type is required".into(),
            ]));
        }
        if let Some(i) = capacities.iter().position(|&c| c == 0) {
            return Err(Error::Validation(vec![format!(
                "capacity of resource type {i} must be a positive integer"
            )]));
        }
        Ok(Self { capacities })
    }

    /// Number of resource types.
    pub fn d(&self) -> usize {
        self.capacities.len()
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn capacity(&self, i: usize) -> u32 {
        self.capacities[i]
    }

    pub fn p_min(&self) -> u32 {
        *self.capacities.iter().min().expect("non-empty")
    }

    /// Size of the full allocation space, `prod_i P^(i)`.
    pub fn allocation_space(&self) -> u128 {
        self.capacities.iter().map(|&c| c as u128).product()
    }
}

/// Per-type integer resource amounts held by a running job.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AllocationVector(Vec<u32>);

impl AllocationVector {
    /// Builds a vector and checks it against `profile`: matching length,
    /// within capacity on every type, and not all zero.
    pub fn new(amounts: Vec<u32>, profile: &ResourceProfile) -> Result<Self> {
        if amounts.len() != profile.d() {
            return Err(Error::Validation(vec![format!(
                "allocation {amounts:?} has {} components, expected {}",
                amounts.len(),
                profile.d()
            )]));
        }
        for (i, (&a, &cap)) in amounts.iter().zip(profile.capacities()).enumerate() {
            if a > cap {
                return Err(Error::Validation(vec![format!(
                    "allocation {amounts:?} exceeds capacity {cap} on type {i}"
                )]));
            }
        }
        if amounts.iter().all(|&a| a == 0) {
            return Err(Error::Validation(vec![format!(
                "allocation {amounts:?} is zero on every type"
            )]));
        }
        Ok(Self(amounts))
    }

    /// Builds a vector without checking it against a profile.
    pub(crate) fn unchecked(amounts: Vec<u32>) -> Self {
        Self(amounts)
    }

    pub fn amounts(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    /// Component-wise `self <= other`.
    pub fn precedes(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn fits_within(&self, available: &[u32]) -> bool {
        self.0.iter().zip(available).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for AllocationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A job's sparse execution-time table. Only listed allocations are legal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecProfile {
    table: BTreeMap<AllocationVector, Rational>,
}

impl ExecProfile {
    pub fn new(
        entries: impl IntoIterator<Item = (AllocationVector, Rational)>,
        profile: &ResourceProfile,
    ) -> Result<Self> {
        let mut table = BTreeMap::new();
        let mut problems = Vec::new();
        for (alloc, time) in entries {
            if alloc.d() != profile.d() {
                problems.push(format!("allocation {alloc} has wrong dimension"));
                continue;
            }
            if !alloc.fits_within(profile.capacities()) {
                problems.push(format!("allocation {alloc} exceeds capacities"));
                continue;
            }
            if !time.is_positive() {
                problems.push(format!("allocation {alloc} has non-positive time"));
                continue;
            }
            if table.insert(alloc.clone(), time).is_some() {
                problems.push(format!("allocation {alloc} listed twice"));
            }
        }
        if table.is_empty() && problems.is_empty() {
            problems.push("execution profile has no alternatives".into());
        }
        if table.len() as u128 > profile.allocation_space() {
            problems.push("more alternatives than possible allocations".into());
        }
        if problems.is_empty() {
            Ok(Self { table })
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn time(&self, alloc: &AllocationVector) -> Option<&Rational> {
        self.table.get(alloc)
    }

    pub fn contains(&self, alloc: &AllocationVector) -> bool {
        self.table.contains_key(alloc)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Alternatives in canonical (lexicographic allocation) order.
    pub fn iter(&self) -> impl Iterator<Item = (&AllocationVector, &Rational)> {
        self.table.iter()
    }

    /// The alternative with minimum time (ties toward the smaller allocation).
    pub fn fastest(&self) -> (&AllocationVector, &Rational) {
        self.table
            .iter()
            .min_by(|a, b| a.1.cmp(b.1).then_with(|| a.0.cmp(b.0)))
            .expect("non-empty")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub id: String,
    pub exec: ExecProfile,
}

/// A resource profile, a job set, and a precedence DAG over the jobs.
///
/// Jobs are addressed by index everywhere inside the crate; string ids only
/// appear at the I/O boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    resources: ResourceProfile,
    jobs: Vec<Job>,
    edges: Vec<(usize, usize)>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl Instance {
    /// Validates ids, edges, acyclicity and every job's monotonicity.
    pub fn new(
        resources: ResourceProfile,
        jobs: Vec<Job>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let n = jobs.len();
        let mut problems = Vec::new();
        let mut seen = HashMap::new();
        for (j, job) in jobs.iter().enumerate() {
            if let Some(prev) = seen.insert(job.id.as_str(), j) {
                problems.push(format!(
                    "duplicate job id {:?} (jobs {prev} and {j})",
                    job.id
                ));
            }
            for (alloc, _) in job.exec.iter() {
                if alloc.d() != resources.d() || !alloc.fits_within(resources.capacities()) {
                    problems.push(format!(
                        "job {:?}: allocation {alloc} does not fit the resource profile",
                        job.id
                    ));
                }
            }
            for v in crate::metrics::validate_monotonicity(&job.exec) {
                problems.push(format!("job {:?}: {v}", job.id));
            }
        }
        let mut edge_list: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                problems.push(format!("edge ({a}, {b}) references a missing job"));
            } else if a == b {
                problems.push(format!("self-loop on job {:?}", jobs[a].id));
            } else {
                edge_list.push((a, b));
            }
        }
        edge_list.sort_unstable();
        edge_list.dedup();
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(a, b) in &edge_list {
            succs[a].push(b);
            preds[b].push(a);
        }
        let topo = match topological_order(&preds, &succs) {
            Ok(t) => t,
            Err(cycle) => {
                let names: Vec<&str> = cycle.iter().map(|&j| jobs[j].id.as_str()).collect();
                return Err(Error::Validation(vec![format!(
                    "precedence cycle: {}",
                    names.join(" -> ")
                )]));
            }
        };
        Ok(Self {
            resources,
            jobs,
            edges: edge_list,
            preds,
            succs,
            topo,
        })
    }

    /// Same as [`Instance::new`] with edges given by job id.
    pub fn with_id_edges<S: AsRef<str>>(
        resources: ResourceProfile,
        jobs: Vec<Job>,
        edges: &[(S, S)],
    ) -> Result<Self> {
        let index: HashMap<&str, usize> = jobs
            .iter()
            .enumerate()
            .map(|(j, job)| (job.id.as_str(), j))
            .collect();
        let mut idx_edges = Vec::with_capacity(edges.len());
        let mut missing = Vec::new();
        for (a, b) in edges {
            match (index.get(a.as_ref()), index.get(b.as_ref())) {
                (Some(&x), Some(&y)) => idx_edges.push((x, y)),
                _ => missing.push(format!(
                    "edge ({:?}, {:?}) references an unknown job id",
                    a.as_ref(),
                    b.as_ref()
                )),
            }
        }
        if !missing.is_empty() {
            return Err(Error::Validation(missing));
        }
        Self::new(resources, jobs, idx_edges)
    }

    pub fn resources(&self) -> &ResourceProfile {
        &self.resources
    }

    pub fn d(&self) -> usize {
        self.resources.d()
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn job(&self, j: usize) -> &Job {
        &self.jobs[j]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn preds(&self, j: usize) -> &[usize] {
        &self.preds[j]
    }

    pub fn succs(&self, j: usize) -> &[usize] {
        &self.succs[j]
    }

    /// A topological order (Kahn's algorithm, smallest index first).
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn job_index(&self, id: &str) -> Option<usize> {
        self.jobs.iter().position(|j| j.id == id)
    }

    pub fn is_independent(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Kahn's algorithm; on failure returns one cycle as a job sequence.
fn topological_order(
    preds: &[Vec<usize>],
    succs: &[Vec<usize>],
) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let n = preds.len();
    let mut indeg: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&j| indeg[j] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(j) = ready.pop_first() {
        order.push(j);
        for &s in &succs[j] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                ready.insert(s);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Walk predecessors among the unprocessed jobs until a job repeats.
    let start = (0..n).find(|&j| indeg[j] > 0).expect("cycle exists");
    let mut pos = vec![usize::MAX; n];
    let mut path = Vec::new();
    let mut cur = start;
    loop {
        if pos[cur] != usize::MAX {
            let mut cycle: Vec<usize> = path[pos[cur]..].to_vec();
            cycle.reverse();
            cycle.push(cycle[0]);
            return Err(cycle);
        }
        pos[cur] = path.len();
        path.push(cur);
        cur = *preds[cur]
            .iter()
            .find(|&&p| indeg[p] > 0)
            .expect("unprocessed job has an unprocessed predecessor");
    }
}

/// One allocation vector per job, indexed like [`Instance::jobs`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AllocationDecision(pub Vec<AllocationVector>);

impl AllocationDecision {
    pub fn get(&self, j: usize) -> &AllocationVector {
        &self.0[j]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AllocationVector> {
        self.0.iter()
    }

    /// Checks that every vector is a listed alternative of its job.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if self.0.len() != instance.n() {
            return Err(Error::Validation(vec![format!(
                "decision has {} entries for {} jobs",
                self.0.len(),
                instance.n()
            )]));
        }
        let problems: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(j, a)| !instance.job(*j).exec.contains(a))
            .map(|(j, a)| {
                format!(
                    "job {:?}: allocation {a} is not in its table",
                    instance.job(j).id
                )
            })
            .collect();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Execution times under this decision.
    pub fn durations(&self, instance: &Instance) -> Result<Vec<Rational>> {
        self.0
            .iter()
            .enumerate()
            .map(|(j, a)| {
                instance.job(j).exec.time(a).cloned().ok_or_else(|| {
                    Error::Lookup(format!(
                        "job {:?} has no alternative {a}",
                        instance.job(j).id
                    ))
                })
            })
            .collect()
    }
}

/// Start times plus the allocation decision they were computed for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub decision: AllocationDecision,
    pub start_times: Vec<Rational>,
    pub durations: Vec<Rational>,
}

impl Schedule {
    pub fn new(
        instance: &Instance,
        decision: AllocationDecision,
        start_times: Vec<Rational>,
    ) -> Result<Self> {
        let durations = decision.durations(instance)?;
        if start_times.len() != durations.len() {
            return Err(Error::Validation(vec![
                "start time count does not match job count".into(),
            ]));
        }
        Ok(Self {
            decision,
            start_times,
            durations,
        })
    }

    pub fn completion(&self, j: usize) -> Rational {
        &self.start_times[j] + &self.durations[j]
    }

    pub fn makespan(&self) -> Rational {
        (0..self.start_times.len())
            .map(|j| self.completion(j))
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn rp(c: &[u32]) -> ResourceProfile {
        ResourceProfile::new(c.to_vec()).unwrap()
    }

    fn job(id: &str, profile: &ResourceProfile, alts: &[(&[u32], i64)]) -> Job {
        Job {
            id: id.into(),
            exec: ExecProfile::new(
                alts.iter()
                    .map(|(a, t)| (AllocationVector::new(a.to_vec(), profile).unwrap(), int(*t))),
                profile,
            )
            .unwrap(),
        }
    }

    #[test]
    fn resource_profile_rejects_zero_capacity() {
        assert!(ResourceProfile::new(vec![2, 0]).is_err());
        assert!(ResourceProfile::new(vec![]).is_err());
        assert_eq!(rp(&[3, 5]).p_min(), 3);
    }

    #[test]
    fn allocation_vector_invariants() {
        let p = rp(&[2, 2]);
        assert!(AllocationVector::new(vec![0, 0], &p).is_err());
        assert!(AllocationVector::new(vec![3, 0], &p).is_err());
        assert!(AllocationVector::new(vec![1], &p).is_err());
        let a = AllocationVector::new(vec![1, 2], &p).unwrap();
        let b = AllocationVector::new(vec![2, 2], &p).unwrap();
        assert!(a.precedes(&b));
        assert!(!b.precedes(&a));
    }

    #[test]
    fn cycle_is_named() {
        let p = rp(&[2]);
        let jobs = vec![
            job("a", &p, &[(&[1], 1)]),
            job("b", &p, &[(&[1], 1)]),
            job("c", &p, &[(&[1], 1)]),
        ];
        let err =
            Instance::with_id_edges(p, jobs, &[("a", "b"), ("b", "c"), ("c", "a")]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cycle"), "{msg}");
        assert!(
            msg.contains("a") && msg.contains("b") && msg.contains("c"),
            "{msg}"
        );
    }

    #[test]
    fn duplicate_ids_and_unknown_edges_rejected() {
        let p = rp(&[2]);
        let jobs = vec![job("a", &p, &[(&[1], 1)]), job("a", &p, &[(&[1], 1)])];
        assert!(Instance::new(p.clone(), jobs, []).is_err());
        let jobs = vec![job("a", &p, &[(&[1], 1)])];
        assert!(Instance::with_id_edges(p, jobs, &[("a", "zz")]).is_err());
    }

    #[test]
    fn monotonicity_checked_on_construction() {
        let p = rp(&[2]);
        let jobs = vec![job("a", &p, &[(&[1], 5), (&[2], 2)])];
        assert!(Instance::new(p, jobs, []).is_err());
    }

    #[test]
    fn topo_order_respects_edges() {
        let p = rp(&[2]);
        let jobs = (0..4)
            .map(|k| job(&format!("j{k}"), &p, &[(&[1], 1)]))
            .collect();
        let inst = Instance::new(p, jobs, [(3, 1), (1, 0), (2, 0)]).unwrap();
        let pos: Vec<usize> = {
            let mut pos = vec![0; 4];
            for (i, &j) in inst.topo_order().iter().enumerate() {
                pos[j] = i;
            }
            pos
        };
        for &(a, b) in inst.edges() {
            assert!(pos[a] < pos[b]);
        }
    }
}
