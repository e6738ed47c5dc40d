//! `moldsched`: generate instances, allocate, schedule, verify and run the
//! two-phase scheduler end to end.
//!
//! Exit codes: 0 on success, 1 when a bound or invariant is violated (or a
//! run is refused), 2 on invalid input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use moldsched::alloc_general::select_parameters;
use moldsched::instances::{
    allocations_json, bundle_to_string, generate, instance_to_string, interval_report_json,
    load_allocation, load_document, load_schedule, schedule_to_string, Generated, GeneratorConfig,
    GeneratorKind, InstanceDocument,
};
use moldsched::metrics::{aggregate_metrics, validate_schedule};
use moldsched::oracles::OracleBudget;
use moldsched::pipeline::{
    allocate, bench_ratios, detect_class, ratio_csv, run_batch, Method, RunConfig,
};
use moldsched::rational::{self, Rational};
use moldsched::scheduler::{
    check_work_conservation, interval_report, list_schedule, BruteLimit, PriorityPolicy,
};
use moldsched::Error;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "moldsched",
    version,
    about = "Multi-resource scheduling of moldable DAG workflows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance (or lower-bound bundle) as JSON.
    Generate(GenerateArgs),
    /// Run phase one and the utilization cap; print the allocation.
    Allocate(AllocateArgs),
    /// List-schedule an instance and write the schedule JSON.
    Schedule(ScheduleArgs),
    /// Check a schedule file and report its interval decomposition.
    Verify(VerifyArgs),
    /// Full pipeline with bound checks; one JSON report per instance.
    Run(RunArgs),
    /// CSV of closed-form approximation ratios over a range of d.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// random-dag, sp, tree, independent or lowerbound.
    #[arg(long, default_value = "random-dag")]
    kind: String,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 7)]
    cap_min: u32,
    #[arg(long, default_value_t = 12)]
    cap_max: u32,
    /// Sampled alternatives per job before cap closure.
    #[arg(long, default_value_t = 3)]
    alternatives: usize,
    #[arg(long, default_value_t = 0.3)]
    edge_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size of the lower-bound family (multiple of 3).
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// lp, fptas, independent or exact-oracle; default follows the graph class.
    #[arg(long)]
    method: Option<String>,
    /// Utilization cap parameter, as "num/den" or a decimal.
    #[arg(long)]
    mu: Option<String>,
    /// Rounding threshold for the lp method.
    #[arg(long)]
    rho: Option<String>,
    /// Accuracy of the fptas method.
    #[arg(long)]
    epsilon: Option<String>,
}

#[derive(Args)]
struct AllocateArgs {
    instance: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleArgs {
    instance: PathBuf,
    /// Allocation JSON (an `allocations` object); computed when absent.
    #[arg(long)]
    allocation: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    /// fifo, longest-time, critical-path, optimal-priority or adversarial-priority.
    #[arg(long, default_value = "fifo")]
    policy: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    schedule: PathBuf,
    /// Classification parameter; defaults to the class's selected mu.
    #[arg(long)]
    mu: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value = "fifo")]
    policy: String,
    /// Recorded in the report.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse instances whose smallest capacity is below the requirement.
    #[arg(long)]
    strict: bool,
    /// Compute L_min exhaustively when within budget.
    #[arg(long)]
    oracle: bool,
    /// Compute the optimal makespan exhaustively when within budget.
    #[arg(long)]
    brute: bool,
    /// Include wall time in reports.
    #[arg(long)]
    timings: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Directory for `<name>.report.json` and `<name>.schedule.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1)]
    d_min: usize,
    #[arg(long, default_value_t = 50)]
    d_max: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Outcome of a subcommand that ran to completion.
enum Status {
    Ok,
    Violated,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Allocate(a) => cmd_allocate(a),
        Command::Schedule(a) => cmd_schedule(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violated) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(err) if !err.is_input_error() => 1,
        _ => 2,
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn parse_rational(flag: &str, v: &Option<String>) -> Result<Option<Rational>> {
    v.as_deref()
        .map(|s| rational::parse(s).map_err(|e| Error::Config(format!("--{flag}: {e}"))))
        .transpose()
        .map_err(Into::into)
}

fn run_config(p: &ParamArgs) -> Result<RunConfig> {
    Ok(RunConfig {
        method: p.method.as_deref().map(str::parse::<Method>).transpose()?,
        mu: parse_rational("mu", &p.mu)?,
        rho: parse_rational("rho", &p.rho)?,
        epsilon: parse_rational("epsilon", &p.epsilon)?,
        ..RunConfig::default()
    })
}

fn resolve_policy(name: &str, doc: &InstanceDocument) -> Result<PriorityPolicy> {
    let order = match name {
        "optimal-priority" => &doc.optimal_priority,
        "adversarial-priority" => &doc.adversarial_priority,
        other => return Ok(other.parse::<PriorityPolicy>()?),
    };
    let order = order.as_ref().ok_or_else(|| {
        Error::Config(format!(
            "policy {name} needs an instance file with that priority list"
        ))
    })?;
    let idx = order
        .iter()
        .map(|id| doc.instance.job_index(id).expect("checked on load"))
        .collect();
    Ok(PriorityPolicy::Explicit(idx))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into())
}

fn cmd_generate(a: GenerateArgs) -> Result<Status> {
    let cfg = GeneratorConfig {
        kind: a.kind.parse::<GeneratorKind>()?,
        n: a.n,
        d: a.d,
        capacity_min: a.cap_min,
        capacity_max: a.cap_max,
        max_alternatives: a.alternatives,
        edge_probability: a.edge_prob,
        seed: a.seed,
        m: a.m,
    };
    let text = match generate(&cfg)? {
        Generated::Instance(i) => instance_to_string(&i),
        Generated::LowerBound(b) => bundle_to_string(&b),
    };
    emit(a.out.as_deref(), &text)?;
    Ok(Status::Ok)
}

fn cmd_allocate(a: AllocateArgs) -> Result<Status> {
    let doc = load_document(&a.instance)?;
    let inst = &doc.instance;
    let out = allocate(inst, &run_config(&a.params)?)?;
    let m = aggregate_metrics(inst, &out.initial)?;
    let r = |v: &Rational| rational::format(v);
    let report = json!({
        "instance": stem(&a.instance),
        "graph_class": out.detected_class.as_str(),
        "method": out.method.as_str(),
        "mu": r(&out.params.mu),
        "rho": out.params.rho.as_ref().map(r),
        "epsilon": out.params.epsilon.as_ref().map(r),
        "guaranteed_ratio": out.params.guaranteed_ratio,
        "required_pmin": out.params.required_pmin,
        "lower_bound": r(&out.lower_bound),
        "c_initial": r(&m.critical_path_length),
        "a_initial": r(&m.area),
        "l_initial": r(&m.lower_bound),
        "adjusted_jobs": out.adjustment.adjusted_count(),
        "adjustment_bounds_hold": out.adjustment_bounds_hold,
        "initial": allocations_json(inst, &out.initial),
        "allocations": allocations_json(inst, &out.adjustment.decision),
    });
    emit(
        a.out.as_deref(),
        &format!("{}\n", serde_json::to_string_pretty(&report)?),
    )?;
    Ok(Status::Ok)
}

fn cmd_schedule(a: ScheduleArgs) -> Result<Status> {
    let doc = load_document(&a.instance)?;
    let policy = resolve_policy(&a.policy, &doc)?;
    let inst = &doc.instance;
    let decision = match &a.allocation {
        Some(p) => load_allocation(inst, p)?,
        None => allocate(inst, &run_config(&a.params)?)?.adjustment.decision,
    };
    let s = list_schedule(inst, &decision, &policy)?;
    emit(a.out.as_deref(), &schedule_to_string(inst, &s))?;
    Ok(Status::Ok)
}

fn cmd_verify(a: VerifyArgs) -> Result<Status> {
    let doc = load_document(&a.instance)?;
    let inst = &doc.instance;
    let s = load_schedule(inst, &a.schedule)?;
    let mu = match parse_rational("mu", &a.mu)? {
        Some(m) => m,
        None => select_parameters(inst.d(), detect_class(inst).0)?.mu,
    };
    let violations: Vec<String> = validate_schedule(inst, &s)
        .iter()
        .map(ToString::to_string)
        .collect();
    let valid = violations.is_empty();
    let mut report = json!({
        "valid": valid,
        "violations": violations,
        "makespan": rational::format(&s.makespan()),
    });
    if valid {
        report["idle_violations"] = json!(check_work_conservation(inst, &s).len());
        report["intervals"] = interval_report_json(&interval_report(inst, &s, &mu)?);
    }
    emit(
        None,
        &format!("{}\n", serde_json::to_string_pretty(&report)?),
    )?;
    Ok(if valid { Status::Ok } else { Status::Violated })
}

fn cmd_run(a: RunArgs) -> Result<Status> {
    let mut cfg = run_config(&a.params)?;
    let env_budget = OracleBudget::from_env()?;
    cfg.strict = a.strict;
    cfg.seed = a.seed;
    cfg.timings = a.timings;
    cfg.oracle = a.oracle.then(|| env_budget.clone());
    cfg.brute = a.brute.then(|| {
        let mut limit = BruteLimit::default();
        if std::env::var_os(moldsched::oracles::BUDGET_ENV).is_some() {
            limit.max_decisions = env_budget.max_decisions;
        }
        limit
    });

    let docs = a
        .instances
        .iter()
        .map(|p| Ok((stem(p), load_document(p)?)))
        .collect::<Result<Vec<_>>>()?;
    // Explicit priorities come from each file, so runs are grouped by policy.
    let mut batches: Vec<(PriorityPolicy, Vec<usize>)> = Vec::new();
    for (k, (_, doc)) in docs.iter().enumerate() {
        let p = resolve_policy(&a.policy, doc)?;
        match batches.iter_mut().find(|(q, _)| *q == p) {
            Some((_, ks)) => ks.push(k),
            None => batches.push((p, vec![k])),
        }
    }
    let mut results: Vec<Option<_>> = (0..docs.len()).map(|_| None).collect();
    for (policy, ks) in batches {
        let items: Vec<_> = ks
            .iter()
            .map(|&k| (docs[k].0.clone(), docs[k].1.instance.clone()))
            .collect();
        let cfg = RunConfig {
            policy,
            ..cfg.clone()
        };
        for (k, r) in ks.into_iter().zip(run_batch(&items, &cfg, a.workers)?) {
            results[k] = Some(r);
        }
    }

    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut status = Status::Ok;
    let mut first_error: Option<anyhow::Error> = None;
    for ((name, doc), r) in docs.iter().zip(results) {
        match r.expect("every instance ran") {
            Ok(out) => {
                let violations = out.report.violations();
                if !violations.is_empty() {
                    status = Status::Violated;
                    for v in &violations {
                        eprintln!("{name}: {v}");
                    }
                }
                let line = out.report.to_json();
                emit(None, &format!("{line}\n"))?;
                if let Some(dir) = &a.out {
                    fs::write(dir.join(format!("{name}.report.json")), format!("{line}\n"))?;
                    fs::write(
                        dir.join(format!("{name}.schedule.json")),
                        schedule_to_string(&doc.instance, &out.schedule),
                    )?;
                }
            }
            Err(e) => {
                emit(
                    None,
                    &format!(
                        "{}\n",
                        json!({ "instance_id": name, "error": e.to_string() })
                    ),
                )?;
                if first_error.is_none() {
                    first_error = Some(anyhow!(e).context(format!("instance {name}")));
                }
            }
        }
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(status),
    }
}

fn cmd_bench(a: BenchArgs) -> Result<Status> {
    if a.d_min == 0 || a.d_min > a.d_max {
        bail!(Error::Config("need 1 <= --d-min <= --d-max".into()));
    }
    emit(
        a.out.as_deref(),
        &ratio_csv(&bench_ratios(a.d_min, a.d_max)?),
    )?;
    Ok(Status::Ok)
}
