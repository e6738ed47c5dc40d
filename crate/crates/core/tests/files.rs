mod common;

use moldsched::instances::{
    load_document, load_instance, load_schedule, lower_bound_bundle, save_bundle, save_instance,
    save_schedule, GeneratorKind,
};
use moldsched::oracles::{exact_min_l, OracleBudget};
use moldsched::pipeline::{run_pipeline, RunConfig};
use moldsched::Error;

use common::gen;

#[test]
fn hundred_instances_survive_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..100 {
        let kind = [
            GeneratorKind::RandomDag,
            GeneratorKind::SeriesParallel,
            GeneratorKind::Tree,
            GeneratorKind::Independent,
        ][seed as usize % 4];
        let inst = gen(
            kind,
            1 + seed as usize % 9,
            1 + seed as usize % 4,
            (3, 12),
            3,
            seed,
        );
        let path = dir.path().join(format!("{seed}.json"));
        save_instance(&inst, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), inst);
    }
}

#[test]
fn bundle_and_schedule_files() {
    let dir = tempfile::tempdir().unwrap();
    let b = lower_bound_bundle(2, 9).unwrap();
    let path = dir.path().join("lb.json");
    save_bundle(&b, &path).unwrap();
    let doc = load_document(&path).unwrap();
    assert_eq!(doc.into_bundle().unwrap(), b);

    let inst = gen(GeneratorKind::RandomDag, 6, 2, (7, 10), 3, 4);
    let out = run_pipeline(&inst, "x", &RunConfig::default()).unwrap();
    let spath = dir.path().join("s.json");
    save_schedule(&inst, &out.schedule, &spath).unwrap();
    let back = load_schedule(&inst, &spath).unwrap();
    assert_eq!(back.start_times, out.schedule.start_times);
}

#[test]
fn parse_errors_carry_the_path_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        "{\"d\": 1,\n \"capacities\": [1.5], \"jobs\": [], \"edges\": []}",
    )
    .unwrap();
    let err = load_instance(&path).unwrap_err();
    assert!(matches!(err, Error::Parse(_)));
    let msg = err.to_string();
    assert!(msg.contains("bad.json") && msg.contains("line 2"), "{msg}");
}

#[test]
fn oracle_cache_directory_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(GeneratorKind::RandomDag, 5, 2, (7, 9), 3, 77);
    let budget = OracleBudget {
        cache_dir: Some(dir.path().to_path_buf()),
        ..OracleBudget::default()
    };
    let first = exact_min_l(&inst, &budget).unwrap();
    assert!(std::fs::read_dir(dir.path()).unwrap().count() >= 1);
    let second = exact_min_l(&inst, &budget).unwrap();
    assert!(second.cached);
    assert_eq!(first.l_min, second.l_min);
}
