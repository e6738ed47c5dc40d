//! Exhaustive minimization of the lower bound `L(p) = max(A(p), C(p))`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::alloc_general::prune_dominated;
use crate::error::{Error, Result};
use crate::metrics::{average_area_of, lower_bound_of};
use crate::model::{AllocationDecision, AllocationVector, Instance};
use crate::rational::{self, Rational};

pub const BUDGET_ENV: &str = "MOLDSCHED_ORACLE_BUDGET";

/// Limits for the exhaustive oracles. Exceeding any limit is a refusal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    /// Largest product of per-job alternative counts.
    pub max_decisions: u64,
    pub max_wall_time: Option<Duration>,
    /// Directory for persisted results, in addition to the in-memory cache.
    pub cache_dir: Option<PathBuf>,
    /// Reuse and record results in the process-wide cache.
    pub memory_cache: bool,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_decisions: 2_000_000,
            max_wall_time: None,
            cache_dir: None,
            memory_cache: true,
        }
    }
}

impl OracleBudget {
    /// Default budget with `max_decisions` taken from `MOLDSCHED_ORACLE_BUDGET`
    /// when set.
    pub fn from_env() -> Result<Self> {
        let mut b = Self::default();
        if let Some(v) = read_env_budget()? {
            b.max_decisions = v;
        }
        Ok(b)
    }
}

pub(crate) fn read_env_budget() -> Result<Option<u64>> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse::<u64>().map(Some).map_err(|_| {
            Error::Config(format!(
                "{BUDGET_ENV} must be a non-negative integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(None),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub l_min: Rational,
    pub witness: AllocationDecision,
    pub decisions: u64,
    pub cached: bool,
}

/// Alternatives searched per job.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SearchSpace {
    NonDominated,
    FullTable,
}

/// `L_min` over non-dominated allocations (pruning first is exact).
pub fn exact_min_l(instance: &Instance, budget: &OracleBudget) -> Result<OracleResult> {
    exact_min_l_in(instance, budget, SearchSpace::NonDominated)
}

/// `L_min` over every table entry.
pub fn exact_min_l_unpruned(instance: &Instance, budget: &OracleBudget) -> Result<OracleResult> {
    exact_min_l_in(instance, budget, SearchSpace::FullTable)
}

type CacheKey = [u8; 32];

fn memory_cache() -> &'static Mutex<HashMap<CacheKey, (Rational, Vec<usize>, u64)>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, (Rational, Vec<usize>, u64)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Canonical text of an instance: capacities, then every job's sorted table,
/// then the sorted edge list by index.
pub fn canonical_form(instance: &Instance) -> String {
    let mut s = String::new();
    let _ = write!(s, "caps={:?};", instance.resources().capacities());
    for job in instance.jobs() {
        s.push_str("job[");
        for (a, t) in job.exec.iter() {
            let _ = write!(s, "{:?}:{},", a.amounts(), rational::format(t));
        }
        s.push_str("];");
    }
    let _ = write!(s, "edges={:?}", instance.edges());
    s
}

pub fn instance_hash(instance: &Instance) -> CacheKey {
    Sha256::digest(canonical_form(instance).as_bytes()).into()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn cache_key(instance: &Instance, space: SearchSpace) -> CacheKey {
    let mut h = Sha256::new();
    h.update(canonical_form(instance).as_bytes());
    h.update(match space {
        SearchSpace::NonDominated => b"nd",
        SearchSpace::FullTable => b"ft",
    });
    h.finalize().into()
}

fn read_disk(dir: &std::path::Path, key: &CacheKey) -> Option<(Rational, Vec<usize>, u64)> {
    let text = std::fs::read_to_string(dir.join(format!("{}.lmin", hex(key)))).ok()?;
    let mut lines = text.lines();
    let l = rational::parse(lines.next()?).ok()?;
    let choice = lines
        .next()?
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().ok())
        .collect::<Option<Vec<usize>>>()?;
    let decisions = lines.next()?.parse().ok()?;
    Some((l, choice, decisions))
}

fn write_disk(
    dir: &std::path::Path,
    key: &CacheKey,
    value: &(Rational, Vec<usize>, u64),
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let choice: Vec<String> = value.1.iter().map(usize::to_string).collect();
    let body = format!(
        "{}\n{}\n{}\n",
        rational::format(&value.0),
        choice.join(","),
        value.2
    );
    std::fs::write(dir.join(format!("{}.lmin", hex(key))), body)?;
    Ok(())
}

pub fn exact_min_l_in(
    instance: &Instance,
    budget: &OracleBudget,
    space: SearchSpace,
) -> Result<OracleResult> {
    let n = instance.n();
    let resources = instance.resources();
    // (alloc, time, average area) per alternative, in a fixed order.
    let options: Vec<Vec<(AllocationVector, Rational, Rational)>> = instance
        .jobs()
        .iter()
        .map(|job| match space {
            SearchSpace::NonDominated => prune_dominated(&job.exec, resources)
                .into_iter()
                .map(|a| (a.alloc, a.time, a.area))
                .collect(),
            SearchSpace::FullTable => job
                .exec
                .iter()
                .map(|(a, t)| (a.clone(), t.clone(), average_area_of(resources, a, t)))
                .collect(),
        })
        .collect();
    let total = options
        .iter()
        .try_fold(1u64, |acc, o| acc.checked_mul(o.len() as u64))
        .unwrap_or(u64::MAX);
    if total > budget.max_decisions {
        return Err(Error::BudgetExceeded(format!(
            "{total} allocation decisions exceed the budget of {}",
            budget.max_decisions
        )));
    }
    let to_decision = |choice: &[usize]| {
        AllocationDecision((0..n).map(|j| options[j][choice[j]].0.clone()).collect())
    };

    let key = cache_key(instance, space);
    let hit = if budget.memory_cache {
        memory_cache()
            .lock()
            .expect("cache lock")
            .get(&key)
            .cloned()
    } else {
        None
    };
    let hit = hit.or_else(|| budget.cache_dir.as_deref().and_then(|d| read_disk(d, &key)));
    if let Some((l, choice, decisions)) = hit {
        if choice.len() == n && choice.iter().zip(&options).all(|(&c, o)| c < o.len()) {
            if budget.memory_cache {
                memory_cache()
                    .lock()
                    .expect("cache lock")
                    .insert(key, (l.clone(), choice.clone(), decisions));
            }
            return Ok(OracleResult {
                l_min: l,
                witness: to_decision(&choice),
                decisions,
                cached: true,
            });
        }
    }

    let started = Instant::now();
    let timed_out = AtomicBool::new(false);
    let decode = |mut k: u64| -> Vec<usize> {
        (0..n)
            .map(|j| {
                let m = options[j].len() as u64;
                let c = (k % m) as usize;
                k /= m;
                c
            })
            .collect()
    };
    let evaluate = |k: u64| -> Option<(Rational, u64)> {
        if let Some(limit) = budget.max_wall_time {
            if k % 1024 == 0 && started.elapsed() > limit {
                timed_out.store(true, Ordering::Relaxed);
            }
            if timed_out.load(Ordering::Relaxed) {
                return None;
            }
        }
        let c = decode(k);
        let durations: Vec<Rational> = (0..n).map(|j| options[j][c[j]].1.clone()).collect();
        let areas: Vec<Rational> = (0..n).map(|j| options[j][c[j]].2.clone()).collect();
        Some((lower_bound_of(instance, &durations, &areas), k))
    };
    let best = (0..total)
        .into_par_iter()
        .filter_map(evaluate)
        .min()
        .ok_or_else(|| Error::Invariant("empty decision space".into()))?;
    if timed_out.load(Ordering::Relaxed) {
        return Err(Error::BudgetExceeded(
            "oracle exceeded its wall-time budget".into(),
        ));
    }
    let choice = decode(best.1);
    let value = (best.0.clone(), choice.clone(), total);
    if let Some(dir) = &budget.cache_dir {
        write_disk(dir, &key, &value)?;
    }
    if budget.memory_cache {
        memory_cache()
            .lock()
            .expect("cache lock")
            .insert(key, value);
    }
    Ok(OracleResult {
        l_min: best.0,
        witness: to_decision(&choice),
        decisions: total,
        cached: false,
    })
}
