//! Fixtures shared by the benchmarks.

use moldsched::instances::{generate_instance, GeneratorConfig, GeneratorKind};
use moldsched::{AllocationDecision, Instance};

pub fn fixture(kind: GeneratorKind, n: usize, d: usize, seed: u64) -> Instance {
    generate_instance(&GeneratorConfig {
        kind,
        n,
        d,
        capacity_min: 8,
        capacity_max: 16,
        max_alternatives: 3,
        edge_probability: 0.2,
        seed,
        m: None,
    })
    .expect("fixture config is valid")
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
