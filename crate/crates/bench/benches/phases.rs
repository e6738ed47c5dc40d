use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use moldsched::alloc_general::{
    adjust_allocation, round_allocation, select_parameters, solve_fractional, GraphClass,
};
use moldsched::alloc_special::{allocate_independent, fptas_allocate, recognize_sp};
use moldsched::instances::{lower_bound_bundle, GeneratorKind};
use moldsched::oracles::{exact_min_l_in, OracleBudget, SearchSpace};
use moldsched::rational::ratio;
use moldsched::scheduler::{brute_force_makespan, list_schedule, BruteLimit, PriorityPolicy};
use moldsched_bench::{fastest, fixture};

fn allocation(c: &mut Criterion) {
    let mut g = c.benchmark_group("allocation");
    for n in [10, 25] {
        let inst = fixture(GeneratorKind::RandomDag, n, 3, 1);
        let rho = select_parameters(3, GraphClass::General)
            .unwrap()
            .rho
            .unwrap();
        g.bench_with_input(BenchmarkId::new("lp-round", n), &inst, |b, i| {
            b.iter(|| round_allocation(&solve_fractional(i).unwrap(), &rho).unwrap())
        });
        let sp = fixture(GeneratorKind::SeriesParallel, n, 3, 1);
        let dec = recognize_sp(&sp).unwrap();
        g.bench_with_input(BenchmarkId::new("fptas", n), &sp, |b, i| {
            b.iter(|| fptas_allocate(i, &dec, &ratio(1, 10)).unwrap())
        });
        let ind = fixture(GeneratorKind::Independent, n, 3, 1);
        g.bench_with_input(BenchmarkId::new("independent", n), &ind, |b, i| {
            b.iter(|| allocate_independent(i).unwrap())
        });
    }
    let inst = fixture(GeneratorKind::RandomDag, 50, 3, 2);
    let mu = select_parameters(3, GraphClass::General).unwrap().mu;
    let dec = fastest(&inst);
    g.bench_function("adjust/50", |b| {
        b.iter(|| adjust_allocation(&inst, &dec, &mu).unwrap())
    });
    g.finish();
}

fn scheduling(c: &mut Criterion) {
    let mut g = c.benchmark_group("list-schedule");
    for n in [50, 200] {
        let inst = fixture(GeneratorKind::RandomDag, n, 3, 3);
        let dec = fastest(&inst);
        for policy in [PriorityPolicy::Fifo, PriorityPolicy::CriticalPath] {
            g.bench_with_input(BenchmarkId::new(policy.name(), n), &inst, |b, i| {
                b.iter(|| list_schedule(i, &dec, &policy).unwrap())
            });
        }
    }
    let lb = lower_bound_bundle(3, 30).unwrap();
    let dec = fastest(&lb.instance);
    g.bench_function("lower-bound-3-30", |b| {
        b.iter(|| list_schedule(&lb.instance, &dec, &PriorityPolicy::Fifo).unwrap())
    });
    g.finish();
}

fn oracles(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracles");
    g.sample_size(10);
    let inst = fixture(GeneratorKind::RandomDag, 6, 2, 4);
    let budget = OracleBudget {
        memory_cache: false,
        ..OracleBudget::default()
    };
    g.bench_function("exact-min-l-full/6", |b| {
        b.iter(|| exact_min_l_in(&inst, &budget, SearchSpace::FullTable).unwrap())
    });
    let small = fixture(GeneratorKind::RandomDag, 5, 2, 5);
    g.bench_function("brute-makespan/5", |b| {
        b.iter(|| brute_force_makespan(&small, BruteLimit::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, allocation, scheduling, oracles);
criterion_main!(benches);
