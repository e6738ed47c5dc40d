//! Seeded random instances.
//!
//! Execution times follow `t(p) = s + sum_i w_i / max(p_i, 1)` over the
//! types a job uses (other types stay at zero). Every term speeds up at most
//! linearly and the constant `s` not at all, so the monotonicity assumption
//! holds by construction; times are rounded up to multiples of `1/1000` and
//! each table is validated again afterwards.
//!
//! Tables are closed under the utilization caps of the default `mu` values
//! for `d`: with every listed vector `p`, `min(p, ceil(mu P))` is listed too,
//! so capping a chosen allocation never leaves the table.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alloc_general::adjust::utilization_caps;
use crate::alloc_general::params::{h_root, mu_golden, mu_sqrt};
use crate::error::{Error, Result};
use crate::metrics::validate_monotonicity;
use crate::model::{AllocationVector, ExecProfile, Instance, Job, ResourceProfile};
use crate::rational::{ceil_to_denominator, int, ratio, Rational};

use super::lowerbound::{lower_bound_bundle, LowerBoundBundle};

pub const TIME_DENOMINATOR: u32 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    RandomDag,
    SeriesParallel,
    Tree,
    Independent,
    LowerBound,
}

impl GeneratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::RandomDag => "random-dag",
            GeneratorKind::SeriesParallel => "sp",
            GeneratorKind::Tree => "tree",
            GeneratorKind::Independent => "independent",
            GeneratorKind::LowerBound => "lowerbound",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-dag" | "dag" => Ok(GeneratorKind::RandomDag),
            "sp" => Ok(GeneratorKind::SeriesParallel),
            "tree" => Ok(GeneratorKind::Tree),
            "independent" => Ok(GeneratorKind::Independent),
            "lowerbound" => Ok(GeneratorKind::LowerBound),
            _ => Err(Error::Config(format!("unknown instance kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    pub n: usize,
    pub d: usize,
    pub capacity_min: u32,
    pub capacity_max: u32,
    /// Sampled alternatives per job before cap closure.
    pub max_alternatives: usize,
    /// Probability of each forward edge between layers (random DAGs only).
    pub edge_probability: f64,
    pub seed: u64,
    /// Size parameter of the lower-bound family; a positive multiple of 3.
    pub m: Option<u32>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            kind: GeneratorKind::RandomDag,
            n: 8,
            d: 2,
            capacity_min: 7,
            capacity_max: 12,
            max_alternatives: 3,
            edge_probability: 0.3,
            seed: 0,
            m: None,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("d must be at least 1".into()));
        }
        if self.kind == GeneratorKind::LowerBound {
            return match self.m {
                Some(m) if m > 0 && m % 3 == 0 => Ok(()),
                _ => Err(Error::Config(
                    "lowerbound needs M, a positive multiple of 3".into(),
                )),
            };
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.capacity_min == 0 || self.capacity_min > self.capacity_max {
            return Err(Error::Config(
                "capacity range must satisfy 1 <= min <= max".into(),
            ));
        }
        if self.max_alternatives == 0 {
            return Err(Error::Config(
                "at least one alternative per job is needed".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.edge_probability) {
            return Err(Error::Config("edge probability must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Output of [`generate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generated {
    Instance(Instance),
    LowerBound(LowerBoundBundle),
}

impl Generated {
    pub fn instance(&self) -> &Instance {
        match self {
            Generated::Instance(i) => i,
            Generated::LowerBound(b) => &b.instance,
        }
    }
}

pub fn generate(config: &GeneratorConfig) -> Result<Generated> {
    config.validate()?;
    if config.kind == GeneratorKind::LowerBound {
        return Ok(Generated::LowerBound(lower_bound_bundle(
            config.d,
            config.m.expect("validated"),
        )?));
    }
    generate_instance(config).map(Generated::Instance)
}

/// [`generate`] for every kind except the lower-bound family.
pub fn generate_instance(config: &GeneratorConfig) -> Result<Instance> {
    config.validate()?;
    if config.kind == GeneratorKind::LowerBound {
        return Err(Error::Config(
            "use generate() for the lower-bound family".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let capacities: Vec<u32> = (0..config.d)
        .map(|_| rng.gen_range(config.capacity_min..=config.capacity_max))
        .collect();
    let resources = ResourceProfile::new(capacities)?;
    let caps = closure_caps(&resources);
    let jobs = (0..config.n)
        .map(|j| {
            Ok(Job {
                id: format!("j{j}"),
                exec: random_profile(&mut rng, &resources, config.max_alternatives, &caps)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let edges = match config.kind {
        GeneratorKind::Independent => Vec::new(),
        GeneratorKind::RandomDag => layered_edges(&mut rng, config.n, config.edge_probability),
        GeneratorKind::Tree => (1..config.n).map(|j| (rng.gen_range(0..j), j)).collect(),
        GeneratorKind::SeriesParallel => sp_edges(&mut rng, config.n),
        GeneratorKind::LowerBound => unreachable!("handled above"),
    };
    Instance::new(resources, jobs, edges)
}

/// Cap vectors for the default `mu` of every graph class at this `d`.
fn closure_caps(resources: &ResourceProfile) -> Vec<Vec<u32>> {
    let d = resources.d();
    let mut mus = vec![mu_golden()];
    if d >= 4 {
        mus.push(mu_sqrt(d));
    }
    if d >= 22 {
        mus.extend(h_root(d).ok());
    }
    let mut caps: Vec<Vec<u32>> = mus.iter().map(|m| utilization_caps(resources, m)).collect();
    caps.sort();
    caps.dedup();
    caps
}

fn safe_time(s: &Rational, w: &[Option<Rational>], p: &[u32]) -> Rational {
    let mut t = s.clone();
    for (wi, &pi) in w.iter().zip(p) {
        if let Some(wi) = wi {
            t += wi / int(pi.max(1) as i64);
        }
    }
    ceil_to_denominator(&t, TIME_DENOMINATOR)
}

const MAX_ATTEMPTS: usize = 64;

fn random_profile(
    rng: &mut ChaCha8Rng,
    resources: &ResourceProfile,
    max_alternatives: usize,
    caps: &[Vec<u32>],
) -> Result<ExecProfile> {
    let d = resources.d();
    for _ in 0..MAX_ATTEMPTS {
        let mut used: Vec<bool> = (0..d).map(|_| rng.gen_bool(0.6)).collect();
        if !used.contains(&true) {
            let i = rng.gen_range(0..d);
            used[i] = true;
        }
        // Sequential part in tenths, per-type work in whole units.
        let s = if rng.gen_bool(0.5) {
            ratio(rng.gen_range(1..=20), 10)
        } else {
            int(0)
        };
        let w: Vec<Option<Rational>> = used
            .iter()
            .map(|&u| u.then(|| int(rng.gen_range(1..=30))))
            .collect();
        let k = rng.gen_range(1..=max_alternatives);
        let mut base: Vec<Vec<u32>> = Vec::with_capacity(k);
        for _ in 0..4 * k {
            if base.len() == k {
                break;
            }
            let v: Vec<u32> = (0..d)
                .map(|i| {
                    if used[i] {
                        rng.gen_range(1..=resources.capacity(i))
                    } else {
                        0
                    }
                })
                .collect();
            if !base.contains(&v) {
                base.push(v);
            }
        }
        let mut all = base.clone();
        for v in &base {
            for c in caps {
                let capped: Vec<u32> = v.iter().zip(c).map(|(&a, &b)| a.min(b)).collect();
                if !all.contains(&capped) {
                    all.push(capped);
                }
            }
        }
        all.sort();
        let entries: Vec<(AllocationVector, Rational)> = all
            .into_iter()
            .map(|v| {
                let t = safe_time(&s, &w, &v);
                (AllocationVector::new(v, resources), t)
            })
            .map(|(a, t)| a.map(|a| (a, t)))
            .collect::<Result<_>>()?;
        let profile = ExecProfile::new(entries, resources)?;
        if validate_monotonicity(&profile).is_empty() {
            return Ok(profile);
        }
    }
    Err(Error::Invariant(
        "could not draw a monotone execution profile".into(),
    ))
}

/// Jobs get uniform layers; each pair in increasing layers is linked with
/// probability `p`.
fn layered_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let layers = ((n as f64).sqrt().ceil() as usize).max(1);
    let layer: Vec<usize> = (0..n).map(|_| rng.gen_range(0..layers)).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if layer[a] < layer[b] && rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Random series/parallel composition of single jobs.
fn sp_edges(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    // (sources, sinks) per component.
    let mut parts: Vec<(Vec<usize>, Vec<usize>)> = (0..n).map(|j| (vec![j], vec![j])).collect();
    let mut edges = Vec::new();
    while parts.len() > 1 {
        parts.shuffle(rng);
        let b = parts.pop().expect("two parts");
        let a = parts.pop().expect("two parts");
        let merged = if rng.gen_bool(0.5) {
            for &x in &a.1 {
                for &y in &b.0 {
                    edges.push((x, y));
                }
            }
            (a.0, b.1)
        } else {
            let mut src = a.0;
            src.extend(b.0);
            let mut snk = a.1;
            snk.extend(b.1);
            (src, snk)
        };
        parts.push(merged);
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alloc_special::recognize_sp;

    fn cfg(kind: GeneratorKind, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            kind,
            seed,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn independent_has_no_edges() {
        let i = generate_instance(&GeneratorConfig {
            n: 4,
            ..cfg(GeneratorKind::Independent, 1)
        })
        .unwrap();
        assert!(i.edges().is_empty());
        assert_eq!(i.n(), 4);
    }

    #[test]
    fn deterministic_per_seed() {
        for kind in [
            GeneratorKind::RandomDag,
            GeneratorKind::SeriesParallel,
            GeneratorKind::Tree,
        ] {
            assert_eq!(
                generate_instance(&cfg(kind, 9)).unwrap(),
                generate_instance(&cfg(kind, 9)).unwrap()
            );
        }
        assert_ne!(
            generate_instance(&cfg(GeneratorKind::RandomDag, 1)).unwrap(),
            generate_instance(&cfg(GeneratorKind::RandomDag, 2)).unwrap()
        );
    }

    #[test]
    fn sp_and_tree_kinds_are_recognized() {
        for seed in 0..20 {
            for kind in [GeneratorKind::SeriesParallel, GeneratorKind::Tree] {
                let i = generate_instance(&cfg(kind, seed)).unwrap();
                recognize_sp(&i).unwrap();
            }
        }
    }

    #[test]
    fn tables_are_cap_closed_and_on_grid() {
        for seed in 0..20 {
            let i = generate_instance(&GeneratorConfig {
                d: 4,
                ..cfg(GeneratorKind::RandomDag, seed)
            })
            .unwrap();
            let caps = closure_caps(i.resources());
            for job in i.jobs() {
                for (a, t) in job.exec.iter() {
                    assert!(t.denom() <= &TIME_DENOMINATOR.into());
                    for c in &caps {
                        let capped: Vec<u32> =
                            a.amounts().iter().zip(c).map(|(&x, &y)| x.min(y)).collect();
                        assert!(job.exec.contains(&AllocationVector::unchecked(capped)));
                    }
                }
            }
        }
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(generate(&GeneratorConfig {
            n: 0,
            ..GeneratorConfig::default()
        })
        .is_err());
        assert!(generate(&GeneratorConfig {
            kind: GeneratorKind::LowerBound,
            m: Some(4),
            ..GeneratorConfig::default()
        })
        .is_err());
    }
}
