//! End-to-end runs: allocation, adjustment, list scheduling and the bound
//! checks, summarized in a [`RunReport`].

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::alloc_general::params::{golden_ratio_bound, rounded_ratio};
use crate::alloc_general::{
    actual_ratio, adjust_allocation, check_adjustment_bounds, estimated_ratio,
    parameters_with_overrides, round_allocation, select_parameters, solve_fractional, Adjustment,
    GraphClass, ParamChoice,
};
use crate::alloc_special::{allocate_independent, fptas_allocate, recognize_sp, SpDecomposition};
use crate::error::{Error, Result};
use crate::metrics::{aggregate_metrics, validate_schedule};
use crate::model::{AllocationDecision, Instance, Schedule};
use crate::oracles::{exact_min_l, OracleBudget};
use crate::rational::{self, to_f64, Rational};
use crate::scheduler::{
    brute_force_makespan, check_work_conservation, list_schedule, verify_phase_bounds, BoundReport,
    BoundStatus, BruteLimit, PriorityPolicy,
};

/// Phase-one allocator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Fractional relaxation plus threshold rounding; any DAG.
    Lp,
    /// Pareto-frontier scheme; series-parallel orders only.
    Fptas,
    /// Threshold sweep; instances without edges only.
    Independent,
    /// Exhaustive `L_min` minimizer; small instances only.
    ExactOracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lp => "lp",
            Method::Fptas => "fptas",
            Method::Independent => "independent",
            Method::ExactOracle => "exact-oracle",
        }
    }

    pub fn default_for(class: GraphClass) -> Self {
        match class {
            GraphClass::General => Method::Lp,
            GraphClass::SeriesParallel => Method::Fptas,
            GraphClass::Independent => Method::Independent,
        }
    }

    /// Class whose parameter selection and guarantee apply to this method.
    /// An exact allocation loses nothing in phase one, so it is analyzed like
    /// the special-case allocators with `epsilon = 0`.
    fn parameter_class(self) -> GraphClass {
        match self {
            Method::Lp => GraphClass::General,
            Method::Fptas => GraphClass::SeriesParallel,
            Method::Independent => GraphClass::Independent,
            Method::ExactOracle => GraphClass::SeriesParallel,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" => Ok(Method::Lp),
            "fptas" => Ok(Method::Fptas),
            "independent" => Ok(Method::Independent),
            "exact-oracle" => Ok(Method::ExactOracle),
            _ => Err(Error::Config(format!("unknown method {s:?}"))),
        }
    }
}

/// Most specific class of the precedence order.
pub fn detect_class(instance: &Instance) -> (GraphClass, Option<SpDecomposition>) {
    if instance.is_independent() {
        return (GraphClass::Independent, None);
    }
    match recognize_sp(instance) {
        Ok(dec) => (GraphClass::SeriesParallel, Some(dec)),
        Err(_) => (GraphClass::General, None),
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Allocator; `None` picks the one matching the detected class.
    pub method: Option<Method>,
    pub mu: Option<Rational>,
    pub rho: Option<Rational>,
    pub epsilon: Option<Rational>,
    pub policy: PriorityPolicy,
    /// Refuse to run when `P^min` is below the parameters' requirement.
    pub strict: bool,
    pub seed: u64,
    /// Compute `L_min` exactly when the budget allows.
    pub oracle: Option<OracleBudget>,
    /// Compute the optimal makespan exhaustively when the limit allows.
    pub brute: Option<BruteLimit>,
    /// Record wall time in the report (makes reports non-reproducible).
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: None,
            mu: None,
            rho: None,
            epsilon: None,
            policy: PriorityPolicy::Fifo,
            strict: false,
            seed: 0,
            oracle: None,
            brute: None,
            timings: false,
        }
    }
}

/// Result of phase one and the adjustment step.
#[derive(Clone, Debug)]
pub struct AllocationOutcome {
    pub detected_class: GraphClass,
    pub method: Method,
    pub params: ParamChoice,
    /// Decision `p'` produced by the allocator.
    pub initial: AllocationDecision,
    /// A certified lower bound on `L_min`.
    pub lower_bound: Rational,
    /// `L_min` when the allocator is exact.
    pub exact_l_min: Option<Rational>,
    pub adjustment: Adjustment,
    /// Both adjustment bounds hold for every adjusted job.
    pub adjustment_bounds_hold: bool,
}

/// Runs the allocator chosen by `config` and applies the utilization cap.
pub fn allocate(instance: &Instance, config: &RunConfig) -> Result<AllocationOutcome> {
    if instance.n() == 0 {
        return Err(Error::Config("instance has no jobs".into()));
    }
    let (detected_class, sp) = detect_class(instance);
    let method = config
        .method
        .unwrap_or_else(|| Method::default_for(detected_class));
    let params_class = method.parameter_class();
    let epsilon = if method == Method::ExactOracle {
        Some(Rational::zero())
    } else {
        config.epsilon.clone()
    };
    let rho = if params_class == GraphClass::General {
        config.rho.clone()
    } else {
        None
    };
    let params =
        parameters_with_overrides(instance.d(), params_class, config.mu.clone(), rho, epsilon)?;

    let (initial, lower_bound, exact_l_min) = match method {
        Method::Lp => {
            let frac = solve_fractional(instance)?;
            let rho = params.rho.clone().expect("general parameters carry rho");
            let rounded = round_allocation(&frac, &rho)?;
            (rounded.decision, frac.lower_bound, None)
        }
        Method::Fptas => {
            let dec = match sp {
                Some(dec) => dec,
                None => recognize_sp(instance)?,
            };
            let eps = params.epsilon.clone().unwrap_or_else(Rational::zero);
            let r = fptas_allocate(instance, &dec, &eps)?;
            // L(p') <= (1 + eps) L_min, and every rejected target is below L_min.
            let lb = (&r.lower_bound / (Rational::one() + &eps)).max(r.bracket_low.clone());
            let exact = eps.is_zero().then(|| r.lower_bound.clone());
            (r.decision, lb, exact)
        }
        Method::Independent => {
            let r = allocate_independent(instance)?;
            (r.decision, r.lower_bound.clone(), Some(r.lower_bound))
        }
        Method::ExactOracle => {
            let budget = config
                .oracle
                .clone()
                .map_or_else(OracleBudget::from_env, Ok)?;
            let r = exact_min_l(instance, &budget)?;
            (r.witness, r.l_min.clone(), Some(r.l_min))
        }
    };
    let adjustment = adjust_allocation(instance, &initial, &params.mu)?;
    let adjustment_bounds_hold =
        check_adjustment_bounds(instance, &initial, &adjustment, &params.mu)?
            .iter()
            .all(|b| b.holds());
    Ok(AllocationOutcome {
        detected_class,
        method,
        params,
        initial,
        lower_bound,
        exact_l_min,
        adjustment,
        adjustment_bounds_hold,
    })
}

fn ser_rational<S: Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational::format(v))
}

fn ser_opt_rational<S: Serializer>(
    v: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&rational::format(v)),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub status: String,
    #[serde(serialize_with = "ser_rational")]
    pub lhs: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub rhs: Rational,
}

/// Summary of one end-to-end run. Rationals serialize as `"num/den"`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub instance_id: String,
    pub n: usize,
    pub d: usize,
    pub graph_class: String,
    pub method: String,
    #[serde(serialize_with = "ser_rational")]
    pub mu: Rational,
    #[serde(serialize_with = "ser_opt_rational")]
    pub rho: Option<Rational>,
    #[serde(serialize_with = "ser_opt_rational")]
    pub epsilon: Option<Rational>,
    pub policy: String,
    pub seed: u64,
    pub p_min: u32,
    pub required_pmin: u64,
    pub pmin_ok: bool,
    /// Certified lower bound on `L_min` from the allocator (`L-bar`).
    #[serde(serialize_with = "ser_rational")]
    pub lower_bound: Rational,
    #[serde(serialize_with = "ser_opt_rational")]
    pub l_min: Option<Rational>,
    #[serde(serialize_with = "ser_opt_rational")]
    pub t_opt: Option<Rational>,
    /// Critical path and average area of the allocator's decision `p'`.
    #[serde(serialize_with = "ser_rational")]
    pub c_initial: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub a_initial: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub l_initial: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub makespan: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub t1: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub t2: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub t3: Rational,
    /// `"l_min"` or `"lower_bound"`: the denominator of `ratio`.
    pub ratio_basis: String,
    pub ratio: f64,
    /// `T / T_opt` when the exhaustive makespan oracle ran.
    pub ratio_opt: Option<f64>,
    pub guaranteed_ratio: f64,
    pub ratio_ok: bool,
    pub adjusted_jobs: usize,
    pub fallback_jobs: usize,
    pub adjustment_bounds_hold: bool,
    pub idle_violations: usize,
    pub checks: Vec<CheckSummary>,
    pub wall_time_ms: Option<f64>,
}

impl RunReport {
    /// Broken guarantees; empty for a clean run. Ratio failures only count
    /// when the capacity precondition holds.
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .filter(|c| c.status == BoundStatus::Fail.as_str())
            .map(|c| {
                format!(
                    "bound {} fails: {} > {}",
                    c.name,
                    rational::format(&c.lhs),
                    rational::format(&c.rhs)
                )
            })
            .collect();
        if self.pmin_ok && !self.ratio_ok {
            out.push(format!(
                "ratio {} exceeds guarantee {}",
                self.ratio, self.guaranteed_ratio
            ));
        }
        if self.pmin_ok && !self.adjustment_bounds_hold {
            out.push("adjustment bounds fail".into());
        }
        if self.idle_violations > 0 {
            out.push(format!(
                "{} idle intervals with a startable job",
                self.idle_violations
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: RunReport,
    pub allocation: AllocationOutcome,
    pub schedule: Schedule,
    pub bounds: BoundReport,
}

/// Slack for comparing an exact ratio against a closed form evaluated in f64.
const RATIO_TOLERANCE: f64 = 1e-9;

pub fn run_pipeline(
    instance: &Instance,
    instance_id: &str,
    config: &RunConfig,
) -> Result<RunOutput> {
    let started = Instant::now();
    let alloc = allocate(instance, config)?;
    let p_min = instance.resources().p_min();
    let pmin_ok = p_min as u64 >= alloc.params.required_pmin;
    if config.strict && !pmin_ok {
        return Err(Error::Precondition(format!(
            "P^min = {p_min} is below {} required for mu = {}",
            alloc.params.required_pmin,
            rational::format(&alloc.params.mu)
        )));
    }

    let schedule = list_schedule(instance, &alloc.adjustment.decision, &config.policy)?;
    let violations = validate_schedule(instance, &schedule);
    if !violations.is_empty() {
        let msgs = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Invariant(format!(
            "list schedule is invalid: {msgs}"
        )));
    }
    let idle = check_work_conservation(instance, &schedule);
    let bounds = verify_phase_bounds(
        instance,
        &schedule,
        &alloc.initial,
        &alloc.params.mu,
        instance.is_independent(),
    )?;
    let initial = aggregate_metrics(instance, &alloc.initial)?;

    let mut l_min = alloc.exact_l_min.clone();
    if l_min.is_none() {
        if let Some(budget) = &config.oracle {
            l_min = optional(exact_min_l(instance, budget))?.map(|r| r.l_min);
        }
    }
    let t_opt = match config.brute {
        Some(limit) => optional(brute_force_makespan(instance, limit))?.map(|r| r.makespan),
        None => None,
    };

    let makespan = schedule.makespan();
    let (ratio_basis, denom) = match &l_min {
        Some(l) => ("l_min", l.clone()),
        None => ("lower_bound", alloc.lower_bound.clone()),
    };
    let ratio = to_f64(&(&makespan / &denom));
    let ratio_opt = t_opt.as_ref().map(|t| to_f64(&(&makespan / t)));
    let guaranteed = alloc.params.guaranteed_ratio;
    let ratio_ok = ratio <= guaranteed * (1.0 + RATIO_TOLERANCE);

    let ir = &bounds.intervals;
    let report = RunReport {
        instance_id: instance_id.to_string(),
        n: instance.n(),
        d: instance.d(),
        graph_class: alloc.detected_class.as_str().to_string(),
        method: alloc.method.as_str().to_string(),
        mu: alloc.params.mu.clone(),
        rho: alloc.params.rho.clone(),
        epsilon: alloc.params.epsilon.clone(),
        policy: config.policy.name().to_string(),
        seed: config.seed,
        p_min,
        required_pmin: alloc.params.required_pmin,
        pmin_ok,
        lower_bound: alloc.lower_bound.clone(),
        l_min,
        t_opt,
        c_initial: initial.critical_path_length.clone(),
        a_initial: initial.area.clone(),
        l_initial: initial.lower_bound.clone(),
        makespan,
        t1: ir.t1.clone(),
        t2: ir.t2.clone(),
        t3: ir.t3.clone(),
        ratio_basis: ratio_basis.to_string(),
        ratio,
        ratio_opt,
        guaranteed_ratio: guaranteed,
        ratio_ok,
        adjusted_jobs: alloc.adjustment.adjusted_count(),
        fallback_jobs: alloc.adjustment.fallback.iter().filter(|&&f| f).count(),
        adjustment_bounds_hold: alloc.adjustment_bounds_hold,
        idle_violations: idle.len(),
        checks: bounds
            .checks
            .iter()
            .map(|c| CheckSummary {
                name: c.name.to_string(),
                status: c.status.as_str().to_string(),
                lhs: c.lhs.clone(),
                rhs: c.rhs.clone(),
            })
            .collect(),
        wall_time_ms: config
            .timings
            .then(|| started.elapsed().as_secs_f64() * 1e3),
    };
    Ok(RunOutput {
        report,
        allocation: alloc,
        schedule,
        bounds,
    })
}

/// A budget refusal becomes `None`; other errors propagate.
fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::BudgetExceeded(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs every instance on a pool of `workers` threads. Results keep the
/// input order and do not depend on the pool size.
pub fn run_batch(
    instances: &[(String, Instance)],
    config: &RunConfig,
    workers: usize,
) -> Result<Vec<Result<RunOutput>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        instances
            .par_iter()
            .map(|(id, inst)| run_pipeline(inst, id, config))
            .collect()
    }))
}

/// One row of the closed-form ratio table.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub d: usize,
    pub golden_ratio_bound: f64,
    pub rounded_ratio: f64,
    /// Default `mu` for general graphs and its guarantee.
    pub mu: Rational,
    pub ratio: f64,
    /// Root of `h_d` and the ratio it attains (`d >= 22`).
    pub actual_ratio: Option<f64>,
    pub estimated_ratio: Option<f64>,
}

pub fn bench_ratios(d_min: usize, d_max: usize) -> Result<Vec<RatioRow>> {
    if d_min == 0 || d_min > d_max {
        return Err(Error::Config("need 1 <= d-min <= d-max".into()));
    }
    (d_min..=d_max)
        .map(|d| {
            let p = select_parameters(d, GraphClass::General)?;
            let large = d >= 22;
            Ok(RatioRow {
                d,
                golden_ratio_bound: golden_ratio_bound(d),
                rounded_ratio: rounded_ratio(d),
                mu: p.mu,
                ratio: p.guaranteed_ratio,
                actual_ratio: if large { Some(actual_ratio(d)?) } else { None },
                estimated_ratio: large.then(|| estimated_ratio(d)),
            })
        })
        .collect()
}

pub const RATIO_CSV_HEADER: &str =
    "d,golden_ratio_bound,rounded_ratio,mu,mu_decimal,ratio,actual_ratio,estimated_ratio";

pub fn ratio_csv(rows: &[RatioRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
    let mut out = String::from(RATIO_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:.9},{:.9},{},{:.12},{:.9},{},{}\n",
            r.d,
            r.golden_ratio_bound,
            r.rounded_ratio,
            rational::format(&r.mu),
            to_f64(&r.mu),
            r.ratio,
            opt(r.actual_ratio),
            opt(r.estimated_ratio)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AllocationVector, ExecProfile, Job, ResourceProfile};
    use crate::rational::int;

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
    fn e2_independent_run() {
        let out = run_pipeline(&e2(), "e2", &RunConfig::default()).unwrap();
        assert_eq!(out.report.method, "independent");
        assert_eq!(out.report.l_initial, int(2));
        assert!(!out.report.pmin_ok);
    }

    #[test]
    fn strict_refuses_small_capacity() {
        let cfg = RunConfig {
            strict: true,
            ..RunConfig::default()
        };
        assert!(matches!(
            run_pipeline(&e2(), "e2", &cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn every_method_runs_on_e2() {
        for m in [
            Method::Lp,
            Method::Fptas,
            Method::Independent,
            Method::ExactOracle,
        ] {
            let cfg = RunConfig {
                method: Some(m),
                oracle: Some(OracleBudget::default()),
                brute: Some(BruteLimit::default()),
                ..RunConfig::default()
            };
            let r = run_pipeline(&e2(), "e2", &cfg).unwrap().report;
            assert_eq!(r.l_min, Some(int(2)));
            assert_eq!(r.t_opt, Some(int(2)));
        }
    }

    #[test]
    fn ratio_table_header_and_rows() {
        let csv = ratio_csv(&bench_ratios(20, 23).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], RATIO_CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[1].ends_with(",,"));
        assert!(!lines[4].ends_with(","));
    }
}
