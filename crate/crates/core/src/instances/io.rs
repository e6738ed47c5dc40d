//! JSON files for instances, lower-bound bundles and schedules.
//!
//! Times are exact `"num/den"` strings. Field order is fixed by the structs
//! below, so serializing the same instance always yields the same bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AllocationDecision, AllocationVector, ExecProfile, Instance, Job, ResourceProfile, Schedule,
};
use crate::rational::{self, Rational};
use crate::scheduler::{IntervalClass, IntervalReport};

use super::lowerbound::LowerBoundBundle;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlternativeFile {
    alloc: Vec<u32>,
    time: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobFile {
    id: String,
    alternatives: Vec<AlternativeFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    d: usize,
    capacities: Vec<u32>,
    jobs: Vec<JobFile>,
    edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    optimal_priority: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    adversarial_priority: Option<Vec<String>>,
}

/// A parsed instance file, with the priorities a bundle carries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceDocument {
    pub instance: Instance,
    pub optimal_priority: Option<Vec<String>>,
    pub adversarial_priority: Option<Vec<String>>,
}

impl InstanceDocument {
    pub fn into_bundle(self) -> Option<LowerBoundBundle> {
        Some(LowerBoundBundle {
            instance: self.instance,
            optimal_priority: self.optimal_priority?,
            adversarial_priority: self.adversarial_priority?,
        })
    }
}

fn to_file(instance: &Instance) -> InstanceFile {
    InstanceFile {
        d: instance.d(),
        capacities: instance.resources().capacities().to_vec(),
        jobs: instance
            .jobs()
            .iter()
            .map(|j| JobFile {
                id: j.id.clone(),
                alternatives: j
                    .exec
                    .iter()
                    .map(|(a, t)| AlternativeFile {
                        alloc: a.amounts().to_vec(),
                        time: rational::format(t),
                    })
                    .collect(),
            })
            .collect(),
        edges: instance
            .edges()
            .iter()
            .map(|&(a, b)| (instance.job(a).id.clone(), instance.job(b).id.clone()))
            .collect(),
        optimal_priority: None,
        adversarial_priority: None,
    }
}

fn render<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn instance_to_string(instance: &Instance) -> String {
    render(&to_file(instance))
}

pub fn bundle_to_string(bundle: &LowerBoundBundle) -> String {
    let mut f = to_file(&bundle.instance);
    f.optimal_priority = Some(bundle.optimal_priority.clone());
    f.adversarial_priority = Some(bundle.adversarial_priority.clone());
    render(&f)
}

fn from_file(f: InstanceFile) -> Result<InstanceDocument> {
    if f.capacities.len() != f.d {
        return Err(Error::Validation(vec![format!(
            "d = {} but {} capacities are listed",
            f.d,
            f.capacities.len()
        )]));
    }
    let resources = ResourceProfile::new(f.capacities)?;
    let mut problems = Vec::new();
    let mut jobs = Vec::with_capacity(f.jobs.len());
    for (j, job) in f.jobs.into_iter().enumerate() {
        let mut entries = Vec::with_capacity(job.alternatives.len());
        for (k, alt) in job.alternatives.into_iter().enumerate() {
            let at = format!("jobs[{j}] ({:?}).alternatives[{k}]", job.id);
            let time =
                rational::parse(&alt.time).map_err(|e| Error::Parse(format!("{at}.time: {e}")))?;
            match AllocationVector::new(alt.alloc, &resources) {
                Ok(a) => entries.push((a, time)),
                Err(e) => problems.push(format!("{at}.alloc: {e}")),
            }
        }
        match ExecProfile::new(entries, &resources) {
            Ok(exec) => jobs.push(Job { id: job.id, exec }),
            Err(e) => problems.push(format!("jobs[{j}] ({:?}): {e}", job.id)),
        }
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let instance = Instance::with_id_edges(resources, jobs, &f.edges)?;
    for list in [&f.optimal_priority, &f.adversarial_priority]
        .into_iter()
        .flatten()
    {
        check_total_order(&instance, list)?;
    }
    Ok(InstanceDocument {
        instance,
        optimal_priority: f.optimal_priority,
        adversarial_priority: f.adversarial_priority,
    })
}

fn check_total_order(instance: &Instance, ids: &[String]) -> Result<()> {
    let mut seen = vec![false; instance.n()];
    for id in ids {
        match instance.job_index(id) {
            Some(j) if !seen[j] => seen[j] = true,
            Some(_) => {
                return Err(Error::Validation(vec![format!(
                    "priority lists {id:?} twice"
                )]))
            }
            None => {
                return Err(Error::Validation(vec![format!(
                    "priority names unknown job {id:?}"
                )]))
            }
        }
    }
    if seen.contains(&false) {
        return Err(Error::Validation(vec![
            "priority does not list every job".into()
        ]));
    }
    Ok(())
}

pub fn parse_document(text: &str) -> Result<InstanceDocument> {
    let f: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    from_file(f)
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    parse_document(text).map(|d| d.instance)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn load_document(path: &Path) -> Result<InstanceDocument> {
    with_path(path, parse_document(&read(path)?))
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    load_document(path).map(|d| d.instance)
}

pub fn save_instance(instance: &Instance, path: &Path) -> Result<()> {
    Ok(fs::write(path, instance_to_string(instance))?)
}

pub fn save_bundle(bundle: &LowerBoundBundle, path: &Path) -> Result<()> {
    Ok(fs::write(path, bundle_to_string(bundle))?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    start_times: BTreeMap<String, String>,
    allocations: BTreeMap<String, Vec<u32>>,
    makespan: String,
}

pub fn schedule_to_string(instance: &Instance, schedule: &Schedule) -> String {
    let f = ScheduleFile {
        start_times: instance
            .jobs()
            .iter()
            .zip(&schedule.start_times)
            .map(|(j, s)| (j.id.clone(), rational::format(s)))
            .collect(),
        allocations: instance
            .jobs()
            .iter()
            .zip(schedule.decision.iter())
            .map(|(j, a)| (j.id.clone(), a.amounts().to_vec()))
            .collect(),
        makespan: rational::format(&schedule.makespan()),
    };
    render(&f)
}

/// Reads a schedule for `instance`. The stored makespan must match the one
/// implied by the start times and allocations.
pub fn parse_schedule(instance: &Instance, text: &str) -> Result<Schedule> {
    let mut f: ScheduleFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut problems = Vec::new();
    let mut starts = Vec::with_capacity(instance.n());
    let mut allocs = Vec::with_capacity(instance.n());
    for job in instance.jobs() {
        match (f.start_times.remove(&job.id), f.allocations.remove(&job.id)) {
            (Some(s), Some(a)) => {
                let s = rational::parse(&s)
                    .map_err(|e| Error::Parse(format!("start_times[{:?}]: {e}", job.id)))?;
                starts.push(s);
                allocs.push(AllocationVector::unchecked(a));
            }
            _ => problems.push(format!("job {:?} has no start time or allocation", job.id)),
        }
    }
    problems.extend(
        f.start_times
            .keys()
            .map(|id| format!("start time for unknown job {id:?}")),
    );
    problems.extend(
        f.allocations
            .keys()
            .map(|id| format!("allocation for unknown job {id:?}")),
    );
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let schedule = Schedule::new(instance, AllocationDecision(allocs), starts)?;
    let stated =
        rational::parse(&f.makespan).map_err(|e| Error::Parse(format!("makespan: {e}")))?;
    if stated != schedule.makespan() {
        return Err(Error::Validation(vec![format!(
            "stated makespan {} differs from the computed {}",
            rational::format(&stated),
            rational::format(&schedule.makespan())
        )]));
    }
    Ok(schedule)
}

pub fn load_schedule(instance: &Instance, path: &Path) -> Result<Schedule> {
    with_path(path, parse_schedule(instance, &read(path)?))
}

pub fn save_schedule(instance: &Instance, schedule: &Schedule, path: &Path) -> Result<()> {
    Ok(fs::write(path, schedule_to_string(instance, schedule))?)
}

#[derive(Clone, Debug, Deserialize)]
struct AllocationFile {
    allocations: BTreeMap<String, Vec<u32>>,
}

/// Per-job allocations keyed by id, in the same shape as the `allocations`
/// field of a schedule file.
pub fn allocations_json(instance: &Instance, decision: &AllocationDecision) -> serde_json::Value {
    let map: BTreeMap<&str, &[u32]> = instance
        .jobs()
        .iter()
        .zip(decision.iter())
        .map(|(j, a)| (j.id.as_str(), a.amounts()))
        .collect();
    serde_json::json!(map)
}

/// Reads the `allocations` object of a JSON document (other fields are
/// ignored) and validates the decision against the instance.
pub fn parse_allocation(instance: &Instance, text: &str) -> Result<AllocationDecision> {
    let mut f: AllocationFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut problems = Vec::new();
    let mut allocs = Vec::with_capacity(instance.n());
    for job in instance.jobs() {
        match f.allocations.remove(&job.id) {
            Some(a) => allocs.push(AllocationVector::unchecked(a)),
            None => problems.push(format!("job {:?} has no allocation", job.id)),
        }
    }
    problems.extend(
        f.allocations
            .keys()
            .map(|id| format!("allocation for unknown job {id:?}")),
    );
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let decision = AllocationDecision(allocs);
    decision.validate(instance)?;
    Ok(decision)
}

pub fn load_allocation(instance: &Instance, path: &Path) -> Result<AllocationDecision> {
    with_path(path, parse_allocation(instance, &read(path)?))
}

fn class_name(c: IntervalClass) -> &'static str {
    match c {
        IntervalClass::Low => "low",
        IntervalClass::Medium => "medium",
        IntervalClass::High => "high",
    }
}

/// JSON view of an interval report, with exact rational strings.
pub fn interval_report_json(report: &IntervalReport) -> serde_json::Value {
    let r = |v: &Rational| serde_json::Value::String(rational::format(v));
    serde_json::json!({
        "mu": r(&report.mu),
        "makespan": r(&report.makespan),
        "t1": r(&report.t1),
        "t2": r(&report.t2),
        "t3": r(&report.t3),
        "intervals": report.intervals.iter().map(|i| serde_json::json!({
            "start": r(&i.start),
            "end": r(&i.end),
            "class": class_name(i.class),
            "utilization": i.utilization,
        })).collect::<Vec<_>>(),
    })
}
